"""Multivariate Laurent polynomial matrices and their generic rank.

A polynomial is a dict mapping exponent tuples to nonzero integer
coefficients.  Rank over the fraction field F_p(t_1..t_d) is computed by
evaluating at random points of F_{p^e}: the rank of an evaluation never
exceeds the generic rank, and by Schwartz-Zippel a single evaluation hits
the generic rank with probability at least 1 - D*r/(p^e - 1) where D bounds
entry degrees and r is the rank.  Elements of F_{p^e} are modelled by their
e x e multiplication matrices over F_p, so the evaluated matrix is an
F_p-matrix whose rank is e times the F_{p^e}-rank.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from ..errors import FieldTooSmall
from .fp import inverse_mod_p, rank_fp

Poly = dict  # {exponent tuple: int coefficient}

DEGREE_CAP = 10_000


def poly_clean(f: Poly, p: int | None = None) -> Poly:
    if p is None:
        return {e: c for e, c in f.items() if c}
    return {e: c % p for e, c in f.items() if c % p}


def poly_add(f: Poly, g: Poly, scale: int = 1) -> Poly:
    out = dict(f)
    for e, c in g.items():
        out[e] = out.get(e, 0) + scale * c
    return poly_clean(out)


def poly_mul(f: Poly, g: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return poly_clean(out)


def monomial(exps, coeff: int = 1) -> Poly:
    return {tuple(exps): coeff} if coeff else {}


@dataclass
class LaurentMatrix:
    num_vars: int
    rows: int
    cols: int
    entries: list = field(default_factory=list)  # rows x cols list of Poly

    def __post_init__(self):
        if not self.entries:
            self.entries = [[{} for _ in range(self.cols)] for _ in range(self.rows)]
        for row in self.entries:
            for f in row:
                for e in f:
                    if len(e) != self.num_vars:
                        raise ValueError("exponent vector length does not match num_vars")
                    if max((abs(x) for x in e), default=0) > DEGREE_CAP:
                        raise ValueError("exponent exceeds degree cap")

    def reduce_mod(self, p: int) -> "LaurentMatrix":
        return LaurentMatrix(self.num_vars, self.rows, self.cols,
                             [[poly_clean(f, p) for f in row] for row in self.entries])

    def substitute(self, fn) -> "LaurentMatrix":
        return LaurentMatrix(self.num_vars, self.rows, self.cols,
                             [[fn(f) for f in row] for row in self.entries])

    def degree_bound(self) -> int:
        """Largest total degree of an entry after clearing negative exponents globally."""
        lows = [0] * self.num_vars
        for row in self.entries:
            for f in row:
                for e in f:
                    lows = [min(a, b) for a, b in zip(lows, e)]
        deg = 0
        for row in self.entries:
            for f in row:
                for e in f:
                    deg = max(deg, sum(a - b for a, b in zip(e, lows)))
        return max(deg, 1)

    def is_zero(self) -> bool:
        return all(not f for row in self.entries for f in row)


# -- F_{p^e} as multiplication matrices --------------------------------------

def _poly_strip(a: list[int], p: int) -> list[int]:
    a = [x % p for x in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod_p_divmod(a: list[int], b: list[int], p: int):
    a, b = a[:], _poly_strip(b, p)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        while a and a[-1] % p == 0:
            a.pop()
        if len(a) < len(b):
            break
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        q[shift] = c
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
    while a and a[-1] % p == 0:
        a.pop()
    return q, a


def _poly_mulmod(a, b, f, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _poly_mod_p_divmod(out, f, p)[1]


def _poly_gcd(a, b, p):
    a, b = _poly_strip(a, p), _poly_strip(b, p)
    while b:
        a, b = b, _poly_mod_p_divmod(a, b, p)[1]
    return a


def _is_irreducible(f: list[int], p: int) -> bool:
    """Ben-Or test for a monic polynomial given low-to-high."""
    e = len(f) - 1
    x = [0, 1]
    power = x
    for _ in range(e // 2):
        # power <- power^p mod f
        result = [1]
        base, k = power, p
        while k:
            if k & 1:
                result = _poly_mulmod(result, base, f, p)
            base = _poly_mulmod(base, base, f, p)
            k >>= 1
        power = result
        diff = power + [0] * (2 - len(power)) if len(power) < 2 else power[:]
        diff[1] = (diff[1] - 1) % p
        g = _poly_gcd(f, diff, p)
        if len(g) > 1:
            return False
    return True


def irreducible_poly(p: int, e: int) -> list[int]:
    """Deterministic monic irreducible polynomial of degree e over F_p (low-to-high)."""
    if e == 1:
        return [0, 1]
    rng = random.Random(p * 1009 + e)
    while True:
        f = [rng.randrange(p) for _ in range(e)] + [1]
        if f[0] and _is_irreducible(f, p):
            return f


class ExtensionField:
    """F_{p^e}; elements are represented by e x e multiplication matrices."""

    def __init__(self, p: int, e: int):
        self.p, self.e = p, e
        f = irreducible_poly(p, e)
        comp = np.zeros((e, e), dtype=np.int64)
        for i in range(e - 1):
            comp[i, i + 1] = 1
        comp[e - 1, :] = [(-c) % p for c in f[:e]]
        self.companion = comp  # row-vector action: multiplication by x

    def element(self, coeffs) -> np.ndarray:
        out = np.zeros((self.e, self.e), dtype=np.int64)
        power = np.eye(self.e, dtype=np.int64)
        for c in coeffs:
            out = (out + int(c) * power) % self.p
            power = power @ self.companion % self.p
        return out

    def random_nonzero(self, rng: random.Random) -> np.ndarray:
        while True:
            coeffs = [rng.randrange(self.p) for _ in range(self.e)]
            if any(coeffs):
                return self.element(coeffs)

    def power(self, a: np.ndarray, k: int) -> np.ndarray:
        if k < 0:
            a, k = inverse_mod_p(a, self.p), -k
        result = np.eye(self.e, dtype=np.int64)
        while k:
            if k & 1:
                result = result @ a % self.p
            a = a @ a % self.p
            k >>= 1
        return result


def required_extension_degree(p: int, degree: int, size: int) -> int:
    """Smallest e with p^e > 4 * degree * size."""
    e = 1
    while p**e <= 4 * degree * size:
        e += 1
    return e


def evaluate_matrix(m: LaurentMatrix, field: ExtensionField, point) -> np.ndarray:
    """Block F_p-matrix of m evaluated at ``point`` (one field element per variable)."""
    e, p = field.e, field.p
    out = np.zeros((m.rows * e, m.cols * e), dtype=np.int64)
    cache: dict[tuple[int, int], np.ndarray] = {}

    def var_power(j, k):
        key = (j, k)
        if key not in cache:
            cache[key] = field.power(point[j], k)
        return cache[key]

    for r, row in enumerate(m.entries):
        for c, f in enumerate(row):
            block = np.zeros((e, e), dtype=np.int64)
            for exps, coeff in f.items():
                term = np.eye(e, dtype=np.int64) * (coeff % p)
                for j, k in enumerate(exps):
                    if k:
                        term = term @ var_power(j, k) % p
                block = (block + term) % p
            out[r * e:(r + 1) * e, c * e:(c + 1) * e] = block
    return out


def rank_laurent(m: LaurentMatrix, p: int, trials: int = 4, ext_degree: int | None = None,
                 seed: int = 0xB3771, job_id: int = 0) -> int:
    """Rank over F_p(t_1..t_d) with one-sided (never too large) error.

    Each trial draws one random point of F_{p^e}^d; the result is the
    maximum evaluated rank.  Trials are drawn from a stream seeded by
    (seed, job_id), so the first T trials of a T+1 run are identical and the
    answer is monotone in ``trials``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m = m.reduce_mod(p)
    if m.rows == 0 or m.cols == 0 or m.is_zero():
        return 0
    degree = m.degree_bound()
    size = max(m.rows, m.cols)
    needed = required_extension_degree(p, degree, size)
    e = needed if ext_degree is None else ext_degree
    if p**e <= 4 * degree * size:
        raise FieldTooSmall(
            f"p^e = {p}^{e} does not exceed 4*{degree}*{size}; need e >= {needed}")
    field = ExtensionField(p, e)
    rng = random.Random(f"{seed}:{job_id}")
    best = 0
    full = min(m.rows, m.cols)
    for _ in range(trials):
        point = [field.random_nonzero(rng) for _ in range(m.num_vars)]
        r = rank_fp(evaluate_matrix(m, field, point), p) // e
        best = max(best, r)
        if best == full:
            break
    return best


# -- exact path for one variable ---------------------------------------------

def _upoly_from_laurent(f: Poly, shift: int, p: int) -> list[int]:
    if not f:
        return []
    top = max(e[0] for e in f) - shift
    out = [0] * (top + 1)
    for (k,), c in f.items():
        out[k - shift] = c % p
    while out and out[-1] == 0:
        out.pop()
    return out


def _upoly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    while out and out[-1] == 0:
        out.pop()
    return out


def _upoly_sub(a, b, p):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return out


def _upoly_exact_div(a, b, p):
    if not a:
        return []
    q, r = _poly_mod_p_divmod(a, b, p)
    if r:
        raise ArithmeticError("inexact polynomial division")
    while q and q[-1] == 0:
        q.pop()
    return q


def rank_laurent_univariate_exact(m: LaurentMatrix, p: int) -> int:
    """Deterministic rank over F_p(t) by fraction-free elimination in F_p[t]."""
    if m.num_vars != 1:
        raise ValueError("exact path needs exactly one variable")
    m = m.reduce_mod(p)
    shift = min((e[0] for row in m.entries for f in row for e in f), default=0)
    a = [[_upoly_from_laurent(f, shift, p) for f in row] for row in m.entries]
    nrows, ncols = m.rows, m.cols
    rank, prev = 0, [1]
    for c in range(ncols):
        piv = next((r for r in range(rank, nrows) if a[r][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        pr = a[rank]
        for r in range(rank + 1, nrows):
            row = a[r]
            f = row[c]
            for j in range(c + 1, ncols):
                row[j] = _upoly_exact_div(
                    _upoly_sub(_upoly_mul(pr[c], row[j], p), _upoly_mul(f, pr[j], p), p),
                    prev, p)
            row[c] = []
        prev = pr[c]
        rank += 1
        if rank == nrows:
            break
    return rank
