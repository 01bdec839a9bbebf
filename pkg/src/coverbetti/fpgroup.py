"""Finitely presented groups, p-adic representations and their finite images.

Words are tuples of nonzero ints: ``k`` is the k-th generator (1-based) and
``-k`` its inverse.  A representation sends generator k to an integer
matrix read modulo p^i at level i; the level-i quotient is the image of the
group in GL_n(Z/p^i), enumerated explicitly and acting on itself by right
multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ElementCapExceeded, InputError, InsufficientLevels, NotHomomorphism
from .exactla.fp import inverse_mod_p

DEFAULT_ELEMENT_CAP = 200_000

Word = tuple


def free_reduce(word) -> Word:
    out: list[int] = []
    for x in word:
        if x == 0:
            raise InputError("generator index 0 is not allowed in words")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(int(x))
    return tuple(out)


def invert_word(word) -> Word:
    return tuple(-x for x in reversed(word))


def commutator(u, v) -> Word:
    """u v u^-1 v^-1, freely reduced."""
    return free_reduce(tuple(u) + tuple(v) + invert_word(u) + invert_word(v))


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple
    relators: tuple = ()

    def __post_init__(self):
        gens = tuple(str(g) for g in self.generators)
        rels = tuple(tuple(int(x) for x in r) for r in self.relators)
        for r in rels:
            for x in r:
                if x == 0 or abs(x) > len(gens):
                    raise InputError(f"relator {list(r)} uses a generator index out of range")
            if free_reduce(r) != r:
                raise InputError(f"relator {list(r)} is not freely reduced")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", rels)

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    @classmethod
    def from_words(cls, generators, relators):
        return cls(tuple(generators), tuple(free_reduce(r) for r in relators))


class GroupRingElement:
    """Finite Z-linear combination of freely reduced words in Z[F]."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        acc: dict[Word, int] = {}
        if isinstance(terms, dict):
            terms = terms.items()
        for word, c in terms or ():
            w = free_reduce(word)
            acc[w] = acc.get(w, 0) + int(c)
        self.terms = {w: c for w, c in acc.items() if c}

    @classmethod
    def word(cls, w, coeff: int = 1) -> "GroupRingElement":
        return cls([(w, coeff)])

    @classmethod
    def one(cls) -> "GroupRingElement":
        return cls([((), 1)])

    def __add__(self, other):
        return GroupRingElement(list(self.terms.items()) + list(other.terms.items()))

    def __neg__(self):
        return GroupRingElement([(w, -c) for w, c in self.terms.items()])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return GroupRingElement([(w, c * other) for w, c in self.terms.items()])
        return GroupRingElement([(u + v, a * b) for u, a in self.terms.items()
                                 for v, b in other.terms.items()])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, GroupRingElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{list(w)}" for w, c in sorted(self.terms.items()))

    def augmentation(self) -> int:
        return sum(self.terms.values())

    def to_document(self) -> list:
        return [[c, list(w)] for w, c in sorted(self.terms.items())]

    @classmethod
    def from_document(cls, doc) -> "GroupRingElement":
        return cls([(tuple(w), c) for c, w in doc])


# -- p-adic representations ----------------------------------------------------

def _mat_inverse_mod_prime_power(a: np.ndarray, p: int, level: int) -> np.ndarray:
    """Lift the mod-p inverse to mod p^level by Newton iteration X <- X(2I - AX)."""
    n = a.shape[0]
    x = inverse_mod_p(a, p)
    prec = 1
    eye = np.eye(n, dtype=object)
    a_obj = a.astype(object)
    x = x.astype(object)
    while prec < level:
        prec = min(2 * prec, level)
        q = p**prec
        x = (x @ (2 * eye - a_obj @ x)) % q
    return x


@dataclass
class PadicRep:
    prime: int
    n: int
    images: list  # one n x n integer matrix per generator
    max_level: int

    def __post_init__(self):
        if self.prime < 2 or any(self.prime % q == 0 for q in range(2, math.isqrt(self.prime) + 1)):
            raise InputError(f"{self.prime} is not a prime")
        self.images = [np.array(m, dtype=object).reshape(self.n, self.n) for m in self.images]
        for k, m in enumerate(self.images):
            try:
                inverse_mod_p(np.mod(m, self.prime).astype(np.int64), self.prime)
            except ValueError:
                raise InputError(f"image of generator {k + 1} is not invertible mod {self.prime}")
        self._inverse_images = None

    def image_mod(self, k: int, level: int) -> np.ndarray:
        """Image of signed generator index k reduced mod p^level (object dtype)."""
        q = self.prime**level
        if k > 0:
            return self.images[k - 1] % q
        if self._inverse_images is None or self._inv_level < level:
            top = max(level, self.max_level, 1)
            self._inverse_images = [
                _mat_inverse_mod_prime_power(np.mod(m, self.prime**top), self.prime, top)
                for m in self.images]
            self._inv_level = top
        return self._inverse_images[-k - 1] % q

    def evaluate(self, word, level: int) -> np.ndarray:
        q = self.prime**level
        out = np.eye(self.n, dtype=object) % q if q > 1 else np.zeros((self.n, self.n), dtype=object)
        for x in word:
            out = (out @ self.image_mod(x, level)) % q
        return out

    def validate(self, pres: GroupPresentation, level: int | None = None):
        if len(self.images) != pres.num_generators:
            raise InputError("representation must give one image per generator")
        level = self.max_level if level is None else level
        q = self.prime**level
        ident = np.eye(self.n, dtype=object) % q
        for r in pres.relators:
            if not np.array_equal(self.evaluate(r, level), ident):
                raise NotHomomorphism(f"relator {list(r)} is not the identity mod {self.prime}^{level}")

    def to_document(self) -> dict:
        return {"p": self.prime, "n": self.n, "max_level": self.max_level,
                "images": [[[int(x) for x in row] for row in m.tolist()] for m in self.images]}


def abelian_rep(images, prime: int, max_level: int) -> PadicRep:
    """Commuting unipotent rep realizing generator -> Z^d -> Z_p^d.

    Generator k goes to the block-diagonal matrix whose j-th 2x2 block is
    [[1, v_j], [0, 1]] for its image vector v in Z^d.
    """
    images = [list(v) for v in images]
    d = len(images[0]) if images else 0
    mats = []
    for v in images:
        m = np.eye(2 * d, dtype=object)
        for j, x in enumerate(v):
            m[2 * j, 2 * j + 1] = int(x)
        mats.append(m)
    return PadicRep(prime, 2 * d, mats, max_level)


# -- finite quotients -------------------------------------------------------------

@dataclass
class FiniteQuotient:
    level: int
    prime: int
    elements: np.ndarray  # (index, n, n) int64, entries in [0, p^level)
    gen_perms: list  # np.ndarray per generator: coset x -> x * g
    identity_idx: int = 0
    presentation: GroupPresentation | None = field(default=None, repr=False)
    _inv_perms: list | None = field(default=None, repr=False)

    @property
    def index(self) -> int:
        return len(self.elements)

    def perm(self, x: int) -> np.ndarray:
        if x > 0:
            return self.gen_perms[x - 1]
        if self._inv_perms is None:
            self._inv_perms = [np.argsort(g) for g in self.gen_perms]
        return self._inv_perms[-x - 1]


def _keys(batch: np.ndarray) -> list[bytes]:
    flat = np.ascontiguousarray(batch.reshape(len(batch), -1))
    return [row.tobytes() for row in flat]


def enumerate_quotient(pres: GroupPresentation, rep: PadicRep, level: int,
                       element_cap: int = DEFAULT_ELEMENT_CAP) -> FiniteQuotient:
    """Image of the group in GL_n(Z/p^level) by breadth-first closure."""
    if level < 0 or level > rep.max_level:
        raise InputError(f"level {level} outside 0..{rep.max_level}")
    if len(rep.images) != pres.num_generators:
        raise InputError("representation must give one image per generator")
    n = rep.n
    g = pres.num_generators
    if level == 0:
        perms = [np.zeros(1, dtype=np.int64) for _ in range(g)]
        return FiniteQuotient(0, rep.prime, np.zeros((1, n, n), dtype=np.int64), perms, 0, pres)
    q = rep.prime**level
    if q >= 2**31 // max(n, 1):
        raise ElementCapExceeded(f"modulus {rep.prime}^{level} too large for int64 arithmetic")
    gens = [np.asarray(rep.image_mod(k, level), dtype=np.int64) for k in range(1, g + 1)]
    invs = [np.asarray(rep.image_mod(-k, level), dtype=np.int64) for k in range(1, g + 1)]
    moves = gens + invs

    ident = np.eye(n, dtype=np.int64) % q
    index_of = {ident.tobytes(): 0}
    elements = [ident]
    frontier = ident[None]
    while len(frontier):
        fresh = []
        for mat in moves:
            prod = np.mod(frontier @ mat, q)
            for key, m in zip(_keys(prod), prod):
                if key not in index_of:
                    index_of[key] = len(elements)
                    elements.append(m)
                    fresh.append(m)
                    if len(elements) > element_cap:
                        raise ElementCapExceeded(
                            f"level {level} quotient exceeds {element_cap} elements")
        frontier = np.array(fresh, dtype=np.int64).reshape(-1, n, n)

    elems = np.array(elements, dtype=np.int64)
    perms = []
    for mat in gens:
        prod = np.mod(elems @ mat, q)
        perms.append(np.array([index_of[k] for k in _keys(prod)], dtype=np.int64))
    quotient = FiniteQuotient(level, rep.prime, elems, perms, 0, pres)
    for r in pres.relators:
        if not np.array_equal(word_to_perm(quotient, r), np.arange(quotient.index)):
            raise NotHomomorphism(f"relator {list(r)} acts nontrivially at level {level}")
    return quotient


def word_to_perm(q: FiniteQuotient, w) -> np.ndarray:
    """Permutation x -> x * w of the cosets, composing generator actions left to right."""
    out = np.arange(q.index, dtype=np.int64)
    for x in w:
        if x == 0 or abs(x) > len(q.gen_perms):
            raise InputError(f"generator index {x} out of range")
        out = q.perm(x)[out]
    return out


def reduce_quotient(q: FiniteQuotient, level: int) -> set[bytes]:
    """Image of q's elements under reduction mod p^level, as canonical keys."""
    mod = q.prime**level
    return set(_keys(np.mod(q.elements, mod)))


@dataclass
class DimensionEstimate:
    estimate: Fraction | float
    steps: list  # (level_from, level_to, estimate)
    stabilized: bool


def estimate_dim(indices, p: int) -> DimensionEstimate:
    """Estimate dim G from index growth: log_p(index_{i+1} / index_i)."""
    pts = sorted((int(i), int(n)) for i, n in indices)
    steps = []
    for (i0, n0), (i1, n1) in zip(pts, pts[1:]):
        if i1 == i0 + 1 and n1 > n0:
            ratio = Fraction(n1, n0)
            steps.append((i0, i1, _log_p(ratio, p)))
    if not steps:
        raise InsufficientLevels("need two consecutive levels with increasing index")
    last = steps[-1][2]
    stabilized = len(steps) >= 2 and steps[-1][2] == steps[-2][2]
    return DimensionEstimate(last, steps, stabilized)


def _log_p(ratio: Fraction, p: int):
    """Exact integer log when ratio is a power of p, else a float."""
    if ratio.denominator == 1:
        k, r = 0, ratio.numerator
        while r % p == 0:
            r //= p
            k += 1
        if r == 1:
            return k
    return math.log(ratio) / math.log(p)
