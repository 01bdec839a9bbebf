"""Truncations of the Iwasawa algebra F_p[[Z_p^d]] = F_p[[X_1..X_d]].

With X_j = x_j - 1, the ideal generated by h - 1 for h in p^i Z_p^d is
(X_1^{p^i}, ..., X_d^{p^i}) because (1 + X)^{p^i} - 1 = X^{p^i} in
characteristic p.  So F_p tensored with M over the level-i subgroup is the
cokernel of the presentation matrix acting on copies of
F_p[X]/(X_j^{p^i}), a space with the p^{id} monomials as basis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .errors import BudgetExceeded, InputError
from .exactla.fp import rank_fp_sparse
from .exactla.laurent import LaurentMatrix, poly_add, poly_mul, rank_laurent, \
    rank_laurent_univariate_exact

DEFAULT_BUDGET = 250_000


@dataclass
class ModulePresentation:
    """M = coker(F_p[[X]]^r -> F_p[[X]]^s, x -> x A); A is r x s."""

    num_vars: int
    prime: int
    matrix: list  # r rows of s polynomials {exponent tuple: coeff}
    num_cols: int | None = None

    def __post_init__(self):
        self.matrix = [[{tuple(int(x) for x in e): int(c) % self.prime
                         for e, c in f.items() if int(c) % self.prime}
                        for f in row] for row in self.matrix]
        if self.num_cols is None:
            if not self.matrix:
                raise InputError("an empty presentation needs an explicit column count")
            self.num_cols = len(self.matrix[0])
        for row in self.matrix:
            if len(row) != self.num_cols:
                raise InputError("presentation rows must all have length s")
            for f in row:
                for e in f:
                    if len(e) != self.num_vars or min(e, default=0) < 0:
                        raise InputError(f"bad exponent vector {e}")

    @property
    def rows(self) -> int:
        return len(self.matrix)

    @classmethod
    def cyclic(cls, num_vars: int, prime: int, a: dict) -> "ModulePresentation":
        return cls(num_vars, prime, [[a]])

    @classmethod
    def free(cls, num_vars: int, prime: int, rank: int) -> "ModulePresentation":
        return cls(num_vars, prime, [], rank)

    def to_document(self) -> dict:
        return {"p": self.prime, "d": self.num_vars, "s": self.num_cols,
                "presentation": [[[[c, list(e)] for e, c in sorted(f.items())] for f in row]
                                 for row in self.matrix]}

    @classmethod
    def from_document(cls, doc) -> "ModulePresentation":
        try:
            matrix = [[{tuple(e): c for c, e in poly} for poly in row] for row in doc["presentation"]]
            return cls(int(doc["d"]), int(doc["p"]), matrix, doc.get("s"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed module document: {exc}") from exc


def _basis(d: int, bound: int) -> list[tuple]:
    mons = list(itertools.product(range(bound), repeat=d))
    mons.sort(key=lambda e: (sum(e), e))
    return mons


def _coker_dim(mod: ModulePresentation, basis: list[tuple], survives) -> int:
    pos = {e: j for j, e in enumerate(basis)}
    n = len(basis)
    s = mod.num_cols
    rows = []
    for row in mod.matrix:
        for u in basis:
            out: dict = {}
            for col, f in enumerate(row):
                for e, c in f.items():
                    v = tuple(a + b for a, b in zip(u, e))
                    if survives(v):
                        key = col * n + pos[v]
                        out[key] = (out.get(key, 0) + c) % mod.prime
            out = {k: v for k, v in out.items() if v}
            if out:
                rows.append(out)
    return s * n - rank_fp_sparse(rows, mod.prime)


def truncated_codim(mod: ModulePresentation, level: int, budget: int = DEFAULT_BUDGET) -> int:
    """dim over F_p of M / (X_1^{p^i}, ..., X_d^{p^i}) M."""
    bound = mod.prime**level
    size = bound**mod.num_vars * max(mod.rows, mod.num_cols)
    if size > budget:
        raise BudgetExceeded(f"truncated module of dimension {size} exceeds budget {budget}")
    basis = _basis(mod.num_vars, bound)
    return _coker_dim(mod, basis, lambda v: max(v, default=0) < bound)


def augmentation_codim(mod: ModulePresentation, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """dim over F_p of M / Delta^n M, Delta the augmentation ideal (X_1..X_d)."""
    basis = [e for e in _basis(mod.num_vars, n) if sum(e) < n]
    if len(basis) * max(mod.rows, mod.num_cols) > budget:
        raise BudgetExceeded("augmentation truncation exceeds budget")
    return _coker_dim(mod, basis, lambda v: sum(v) < n)


def iwasawa_rank(mod: ModulePresentation, trials: int = 4, seed: int = 0xB3771) -> int:
    """Rank of M over F_p[[X]]: s minus the generic rank of A.

    A is rewritten in t_j = 1 + X_j; the substitution is a ring automorphism
    so it preserves the rank over the fraction field, and a minor vanishes in
    the power series ring exactly when it is the zero polynomial.
    """
    if mod.rows == 0:
        return mod.num_cols
    d, p = mod.num_vars, mod.prime
    shifted = []
    for row in mod.matrix:
        new_row = []
        for f in row:
            acc: dict = {}
            for e, c in f.items():
                term = {tuple([0] * d): c}
                for j, k in enumerate(e):
                    base = {tuple(1 if i == j else 0 for i in range(d)): 1, tuple([0] * d): -1}
                    for _ in range(k):
                        term = poly_mul(term, base)
                acc = poly_add(acc, term)
            new_row.append({e: c % p for e, c in acc.items() if c % p})
        shifted.append(new_row)
    lm = LaurentMatrix(d, mod.rows, mod.num_cols, shifted)
    if d == 1:
        rank = rank_laurent_univariate_exact(lm, p)
    else:
        rank = rank_laurent(lm, p, trials=trials, seed=seed)
    return mod.num_cols - rank


def binomial_dim_formula(d: int, m: int, s: int, i: int, p: int) -> int:
    """Monomials in d variables with total degree in [m p^i - s, m p^i)."""
    top = m * p**i
    if m < 1 or not 0 <= s <= top:
        raise InputError("need m >= 1 and 0 <= s <= m p^i")
    return comb(d + top - 1, d) - comb(d + top - s - 1, d)


@dataclass
class HarrisReport:
    num_vars: int
    prime: int
    rank: int
    levels: list = field(default_factory=list)
    codims: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    ratios: list = field(default_factory=list)  # Fraction or None for excluded levels
    passed: bool = False

    @property
    def sup_ratio(self):
        used = [r for r in self.ratios if r is not None]
        return max(used) if used else None

    def to_document(self) -> dict:
        return {
            "d": self.num_vars, "p": self.prime, "rank": self.rank,
            "rows": [{"level": i, "codim": c, "residual": e,
                      "ratio": None if r is None else str(r)}
                     for i, c, e, r in zip(self.levels, self.codims, self.residuals, self.ratios)],
            "sup_ratio": None if self.sup_ratio is None else str(self.sup_ratio),
            "verdict": "PASS" if self.passed else "FAIL",
        }


def harris_check(mod: ModulePresentation, levels: int, budget: int = DEFAULT_BUDGET,
                 trials: int = 4, seed: int = 0xB3771) -> HarrisReport:
    """Residuals codim_i - rank p^{id} and their ratios to p^{i(d-1)}.

    Level 1 is excluded from the ratios when p = 2.  PASS when every residual
    is nonnegative and the last ratio is at most twice the largest earlier one.
    """
    if levels < 1:
        raise InputError("levels must be >= 1")
    d, p = mod.num_vars, mod.prime
    rank = iwasawa_rank(mod, trials=trials, seed=seed)
    rep = HarrisReport(d, p, rank)
    for i in range(1, levels + 1):
        codim = truncated_codim(mod, i, budget)
        e = codim - rank * p ** (i * d)
        rep.levels.append(i)
        rep.codims.append(codim)
        rep.residuals.append(e)
        rep.ratios.append(None if (p == 2 and i == 1) else Fraction(e, p ** (i * (d - 1))))
    used = [r for r in rep.ratios if r is not None]
    ok = all(e >= 0 for e in rep.residuals)
    if len(used) >= 2:
        ok = ok and used[-1] <= 2 * max(used[:-1])
    rep.passed = ok
    return rep
