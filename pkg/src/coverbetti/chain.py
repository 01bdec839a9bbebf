"""Equivariant chain complexes and their induction to finite covers.

Chains are row vectors and boundaries act on the right: the k-th boundary
is an r_k x r_{k-1} matrix over Z[F] and x -> x * d_k.  Inducing along a
finite quotient replaces each word by the permutation matrix of its right
action on cosets, which is multiplicative in the same order, so the block
matrices compose exactly like the group-ring matrices do.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .alexander import fox_derivative
from .errors import IdentityViolated, InputError, MismatchedPresentation
from .exactla.fp import rank_fp
from .exactla.rational import rank_q
from .fpgroup import FiniteQuotient, GroupPresentation, GroupRingElement, word_to_perm


@dataclass
class EquivariantComplex:
    dims: list  # r_0, r_1, ..., r_N
    boundaries: dict  # k -> r_k x r_{k-1} nested list of GroupRingElement

    def __post_init__(self):
        self.dims = [int(r) for r in self.dims]
        if not self.dims or self.dims[0] < 1:
            raise InputError("complex needs at least one 0-cell")
        for k in range(1, len(self.dims)):
            mat = self.boundaries.setdefault(k, [[GroupRingElement() for _ in range(self.dims[k - 1])]
                                                 for _ in range(self.dims[k])])
            if len(mat) != self.dims[k] or any(len(row) != self.dims[k - 1] for row in mat):
                raise InputError(f"boundary {k} must be {self.dims[k]} x {self.dims[k - 1]}")
        extra = set(self.boundaries) - set(range(1, len(self.dims)))
        if extra:
            raise InputError(f"boundaries given for nonexistent degrees {sorted(extra)}")

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def max_generator(self) -> int:
        return max((abs(x) for mat in self.boundaries.values() for row in mat
                    for e in row for w in e.terms for x in w), default=0)

    def composite(self, k: int) -> list:
        """d_{k+1} * d_k in the free group ring (words freely reduced)."""
        upper, lower = self.boundaries[k + 1], self.boundaries[k]
        out = []
        for row in upper:
            new_row = []
            for c in range(self.dims[k - 1]):
                acc = GroupRingElement()
                for j, e in enumerate(row):
                    acc = acc + e * lower[j][c]
                new_row.append(acc)
            out.append(new_row)
        return out

    def to_document(self) -> dict:
        bds = []
        for k in sorted(self.boundaries):
            entries = [{"row": r, "col": c, "terms": e.to_document()}
                       for r, row in enumerate(self.boundaries[k])
                       for c, e in enumerate(row) if e]
            bds.append({"k": k, "entries": entries})
        return {"dims": list(self.dims), "boundaries": bds}

    @classmethod
    def from_document(cls, doc) -> "EquivariantComplex":
        dims = doc["dims"]
        boundaries = {}
        for b in doc.get("boundaries", []):
            k = int(b["k"])
            if not 1 <= k < len(dims):
                raise InputError(f"boundary degree {k} outside 1..{len(dims) - 1}")
            mat = [[GroupRingElement() for _ in range(dims[k - 1])] for _ in range(dims[k])]
            for ent in b["entries"]:
                r, c = int(ent["row"]), int(ent["col"])
                if not (0 <= r < dims[k] and 0 <= c < dims[k - 1]):
                    raise InputError(f"entry ({r},{c}) out of range in boundary {k}")
                mat[r][c] = mat[r][c] + GroupRingElement.from_document(ent["terms"])
            boundaries[k] = mat
        return cls(dims, boundaries)


def presentation_complex(pres: GroupPresentation) -> EquivariantComplex:
    """One 0-cell, a 1-cell per generator, a 2-cell per relator; d_2 by Fox derivatives."""
    g = pres.num_generators
    one = GroupRingElement.one()
    d1 = [[GroupRingElement.word((k,)) - one] for k in range(1, g + 1)]
    dims = [1, g]
    boundaries = {1: d1}
    if pres.relators:
        dims.append(len(pres.relators))
        boundaries[2] = [[fox_derivative(r, k) for k in range(1, g + 1)] for r in pres.relators]
    return EquivariantComplex(dims, boundaries)


@dataclass
class InducedComplex:
    level: int
    index: int
    dims: list  # r_k (cells of the base)
    blocks: dict  # k -> list of (row_block, col_block, coeff, perm)
    _cache: dict = field(default_factory=dict, repr=False)

    def chain_rank(self, k: int) -> int:
        return self.dims[k] * self.index if 0 <= k < len(self.dims) else 0

    def sparse(self, k: int) -> sp.csr_matrix:
        """Integer boundary matrix d_k of the cover, (r_k m) x (r_{k-1} m)."""
        if k not in self._cache:
            m = self.index
            shape = (self.chain_rank(k), self.chain_rank(k - 1))
            rows, cols, vals = [], [], []
            base = np.arange(m, dtype=np.int64)
            for rb, cb, coeff, perm in self.blocks.get(k, []):
                rows.append(rb * m + base)
                cols.append(cb * m + perm)
                vals.append(np.full(m, coeff, dtype=np.int64))
            if rows:
                mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                    shape=shape).tocsr()
                mat.sum_duplicates()
                mat.eliminate_zeros()
            else:
                mat = sp.csr_matrix(shape, dtype=np.int64)
            self._cache[k] = mat
        return self._cache[k]

    def dense(self, k: int) -> np.ndarray:
        return self.sparse(k).toarray()

    def dd_is_zero(self) -> bool:
        for k in range(1, len(self.dims) - 1):
            prod = self.sparse(k + 1) @ self.sparse(k)
            if prod.count_nonzero():
                return False
        return True


def induce(cx: EquivariantComplex, q: FiniteQuotient) -> InducedComplex:
    """Boundary matrices of the cover attached to q, as permutation blocks."""
    if cx.max_generator() > len(q.gen_perms):
        raise MismatchedPresentation("complex uses generators the quotient does not know")
    blocks: dict = {}
    perm_cache: dict = {}
    for k, mat in cx.boundaries.items():
        out = []
        for r, row in enumerate(mat):
            for c, elem in enumerate(row):
                for w, coeff in sorted(elem.terms.items()):
                    if w not in perm_cache:
                        perm_cache[w] = word_to_perm(q, w)
                    out.append((r, c, coeff, perm_cache[w]))
        blocks[k] = out
    ind = InducedComplex(q.level, q.index, list(cx.dims), blocks)
    if not ind.dd_is_zero():
        raise IdentityViolated(f"boundary composite is nonzero on the level-{q.level} cover")
    return ind


@dataclass
class DegreeBetti:
    k: int
    betti: int
    coker: int  # dim coker(d_k : C_k -> C_{k-1})
    rank: int  # rank d_k


def boundary_rank(ind: InducedComplex, k: int, field_: str, p: int | None = None,
                  seed: int = 0xB3771) -> int:
    if k < 1 or k >= len(ind.dims) or ind.chain_rank(k) == 0 or ind.chain_rank(k - 1) == 0:
        return 0
    mat = ind.sparse(k)
    if mat.nnz == 0:
        return 0
    if field_ == "q":
        return rank_q(mat.toarray(), seed=seed)
    return rank_fp(mat.toarray(), p)


def betti(ind: InducedComplex, field_: str, p: int | None = None, seed: int = 0xB3771,
          ranks: dict | None = None) -> list[DegreeBetti]:
    """b_k = (r_k m - rank d_k) - rank d_{k+1} for every degree.

    d_0 maps to the zero space and the boundary above the top degree comes
    from the zero space, so coker(d_0) = 0 and coker(d_{N+1}) = C_N.
    """
    if field_ not in ("q", "fp"):
        raise InputError(f"unknown field {field_!r}")
    if field_ == "fp" and p is None:
        raise InputError("F_p Betti numbers need a prime")
    top = len(ind.dims) - 1
    if ranks is None:
        ranks = {k: boundary_rank(ind, k, field_, p, seed) for k in range(1, top + 1)}
    ranks = {0: 0, top + 1: 0, **ranks}
    out = []
    for k in range(top + 1):
        b = ind.chain_rank(k) - ranks[k] - ranks[k + 1]
        out.append(DegreeBetti(k, b, ind.chain_rank(k - 1) - ranks[k], ranks[k]))
    return out


def cokernel_identity_residuals(ind: InducedComplex, rows: list[DegreeBetti]) -> list[int]:
    """b_k - (dim coker d_k + dim coker d_{k+1} - m r_{k-1}) per degree."""
    top = len(ind.dims) - 1
    coker = {r.k: r.coker for r in rows}
    coker[top + 1] = ind.chain_rank(top)
    return [r.betti - (coker[r.k] + coker[r.k + 1] - ind.chain_rank(r.k - 1)) for r in rows]


def cokernel_identity_check(ind: InducedComplex, rows: list[DegreeBetti]) -> tuple[bool, list[int]]:
    res = cokernel_identity_residuals(ind, rows)
    if any(res):
        raise IdentityViolated(f"cokernel identity fails at level {ind.level}: residuals {res}")
    return True, res


def orbit_count(q: FiniteQuotient) -> int:
    """Connected components of the coset graph (union-find over generator edges)."""
    parent = np.arange(q.index)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for perm in q.gen_perms:
        for x, y in enumerate(perm):
            rx, ry = find(x), find(int(y))
            if rx != ry:
                parent[rx] = ry
    return len({find(x) for x in range(q.index)})


def euler_characteristic(cx: EquivariantComplex) -> int:
    return sum((-1) ** k * r for k, r in enumerate(cx.dims))


def normalized(b: int, index: int) -> Fraction:
    return Fraction(b, index)
