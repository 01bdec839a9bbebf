"""Fox calculus, Alexander matrices and abelian-cover predictions.

The Alexander matrix of a presentation with respect to a surjection onto
Z^d has (j, k) entry the Fox derivative of relator j along generator k,
pushed into Z[t_1^{+-1}, ..., t_d^{+-1}].  Its generic rank over F_p
determines the mod-p L^2 Betti number in degree one of the presentation
complex, which is what the F_p limits of abelian p-adic towers converge to.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import sympy

from .errors import DegenerateMatrix, InputError, RelatorNotKilled
from .exactla.laurent import LaurentMatrix, poly_add, poly_mul, rank_laurent, rank_laurent_univariate_exact
from .exactla.rational import random_primes
from .fpgroup import GroupPresentation, GroupRingElement, Word, free_reduce

DEFAULT_SEED = 0xB3771
DEFAULT_TRIALS = 4


def fox_derivative(r, k: int) -> GroupRingElement:
    """Free derivative of the word r with respect to generator k (1-based)."""
    terms = []
    for j, x in enumerate(r):
        if x == k:
            terms.append((tuple(r[:j]), 1))
        elif x == -k:
            terms.append((tuple(r[:j + 1]), -1))
    return GroupRingElement(terms)


def fox_identity_residual(r, num_generators: int) -> GroupRingElement:
    """sum_k (dr/dx_k)(x_k - 1) - (r - 1); zero in Z[F] for every word r."""
    total = GroupRingElement()
    for k in range(1, num_generators + 1):
        total = total + fox_derivative(r, k) * (GroupRingElement.word((k,)) - GroupRingElement.one())
    return total - (GroupRingElement.word(free_reduce(r)) - GroupRingElement.one())


@dataclass
class AbelianizationMap:
    images: list  # one Z^d vector per generator

    def __post_init__(self):
        self.images = [tuple(int(x) for x in v) for v in self.images]
        if self.images and len({len(v) for v in self.images}) != 1:
            raise InputError("all meridian images must have the same length")

    @property
    def rank(self) -> int:
        return len(self.images[0]) if self.images else 0

    def of_word(self, w) -> tuple:
        out = [0] * self.rank
        for x in w:
            v = self.images[abs(x) - 1]
            s = 1 if x > 0 else -1
            out = [a + s * b for a, b in zip(out, v)]
        return tuple(out)

    def validate(self, pres: GroupPresentation):
        if len(self.images) != pres.num_generators:
            raise InputError("need one meridian image per generator")
        for r in pres.relators:
            if any(self.of_word(r)):
                raise RelatorNotKilled(f"relator {list(r)} maps to {list(self.of_word(r))}")

    def push(self, elem: GroupRingElement) -> dict:
        out: dict = {}
        for w, c in elem.terms.items():
            e = self.of_word(w)
            out = poly_add(out, {e: c})
        return out


def alexander_matrix(pres: GroupPresentation, ab: AbelianizationMap) -> LaurentMatrix:
    ab.validate(pres)
    g = pres.num_generators
    entries = [[ab.push(fox_derivative(r, k)) for k in range(1, g + 1)] for r in pres.relators]
    return LaurentMatrix(ab.rank, len(pres.relators), g, entries)


def fundamental_identity_holds(a: LaurentMatrix, ab: AbelianizationMap) -> bool:
    """Each row of A, weighted by (t^{image(x_k)} - 1), sums to zero."""
    zero = tuple([0] * ab.rank)
    for row in a.entries:
        total: dict = {}
        for f, v in zip(row, ab.images):
            weight = poly_add({tuple(v): 1}, {zero: 1}, scale=-1)
            total = poly_add(total, poly_mul(f, weight))
        if total:
            return False
    return True


def _l2_betti_1(a: LaurentMatrix, g: int, ab: AbelianizationMap, rank: int) -> int:
    if not any(any(v) for v in ab.images):
        raise InputError("abelianization map is trivial")
    # kernel of d_1 over the fraction field has dimension g - 1
    return (g - 1) - rank


def modp_l2_betti_1(pres: GroupPresentation, ab: AbelianizationMap, p: int,
                    trials: int = DEFAULT_TRIALS, seed: int = DEFAULT_SEED,
                    exact: bool | None = None) -> int:
    """beta_1 of the presentation complex over F_p[Z^d], via the Alexander matrix."""
    a = alexander_matrix(pres, ab)
    if a.rows == 0:
        rank = 0
    elif exact or (exact is None and a.num_vars == 1):
        rank = rank_laurent_univariate_exact(a, p)
    else:
        rank = rank_laurent(a, p, trials=trials, seed=seed)
    return _l2_betti_1(a, pres.num_generators, ab, rank)


def rational_l2_betti_1(pres: GroupPresentation, ab: AbelianizationMap,
                        trials: int = DEFAULT_TRIALS, seed: int = DEFAULT_SEED) -> int:
    """beta_1 over Q[Z^d]; the rank over Q(t) is read off modulo a random 31-bit prime."""
    a = alexander_matrix(pres, ab)
    rank = 0
    if a.rows:
        big = random_primes(seed, 1)[0]
        rank = rank_laurent(a, big, trials=trials, seed=seed, ext_degree=1)
    return _l2_betti_1(a, pres.num_generators, ab, rank)


# -- one-variable specialization ---------------------------------------------

_T = sympy.Symbol("t")


def _specialize(f: dict) -> dict:
    out: dict = {}
    for e, c in f.items():
        k = sum(e)
        out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c}


def _to_sympy(f: dict, shift: int):
    return sympy.Poly(sum((c * _T ** (k - shift) for k, c in f.items()), sympy.Integer(0)),
                      _T, domain="ZZ")


def normalize_poly(poly: sympy.Poly) -> sympy.Poly:
    """Strip powers of t and make the leading coefficient positive."""
    if poly.is_zero:
        return poly
    coeffs = poly.all_coeffs()[::-1]
    low = next(i for i, c in enumerate(coeffs) if c)
    poly = sympy.Poly(sum(c * _T ** (i - low) for i, c in enumerate(coeffs) if c), _T, domain="ZZ")
    if poly.LC() < 0:
        poly = -poly
    return poly


@dataclass
class DiagonalResult:
    minor_gcd: sympy.Poly  # gcd over Z[t] of the maximal relevant minors
    delta: sympy.Poly  # Delta(t,t) (d=2) or Delta(t) (d=1)
    divisor: sympy.Poly | None = None

    def coefficients(self, poly=None) -> list[int]:
        poly = self.delta if poly is None else poly
        return [int(c) for c in poly.all_coeffs()[::-1]]


def diagonal_specialization(a: LaurentMatrix, ab: AbelianizationMap | None = None) -> DiagonalResult:
    """Delta(t,t) from the (g-1)-minors after setting every variable to t.

    Minors are combined by a gcd in Z[t] (content included) and normalized.
    For d = 2 the gcd carries the extra factor t^c - 1, c the gcd of the
    generators' specialized degrees (c = 1 for meridians); it is divided out.
    """
    if a.num_vars not in (1, 2):
        raise InputError("diagonal specialization supports d = 1 or d = 2 only")
    g = a.cols
    size = g - 1
    specialized = [[_specialize(f) for f in row] for row in a.entries]
    if size <= 0 or a.rows < size:
        raise DegenerateMatrix("no (g-1)-minors exist")
    shift = min((k for row in specialized for f in row for k in f), default=0)
    mats = [[_to_sympy(f, shift) for f in row] for row in specialized]
    gcd = None
    for rows in itertools.combinations(range(a.rows), size):
        for drop in range(g):
            cols = [c for c in range(g) if c != drop]
            m = sympy.Matrix([[mats[r][c].as_expr() for c in cols] for r in rows])
            det = sympy.Poly(sympy.expand(m.det(method="berkowitz")), _T, domain="ZZ")
            if det.is_zero:
                continue
            gcd = det if gcd is None else sympy.gcd(gcd, det)
    if gcd is None:
        raise DegenerateMatrix("all (g-1)-minors vanish")
    gcd = normalize_poly(gcd)
    if a.num_vars == 1:
        return DiagonalResult(gcd, gcd)
    if ab is None:
        degrees = [1]
    else:
        degrees = [abs(sum(v)) for v in ab.images if sum(v)]
    c = 0
    for k in degrees:
        c = sympy.igcd(c, k)
    if c == 0:
        raise DegenerateMatrix("diagonal map is trivial on every generator")
    divisor = sympy.Poly(_T**c - 1, _T, domain="ZZ")
    quo, rem = sympy.div(gcd, divisor, domain="ZZ")
    if not rem.is_zero:
        raise DegenerateMatrix(f"minor gcd {gcd.as_expr()} is not divisible by {divisor.as_expr()}")
    return DiagonalResult(gcd, normalize_poly(quo), divisor)


def linking_number(a: LaurentMatrix, ab: AbelianizationMap | None = None) -> int:
    """|Delta(1,1)| for a 2-component link."""
    if a.num_vars != 2:
        raise InputError("linking number needs d = 2")
    res = diagonal_specialization(a, ab)
    return abs(int(res.delta.eval(1)))


def poly_to_list(poly: sympy.Poly) -> list[int]:
    return [int(c) for c in poly.all_coeffs()[::-1]] if not poly.is_zero else []


# -- braid closures ------------------------------------------------------------

def braid_closure(braid_word, strands: int):
    """Presentation, strand components and meridian map of a braid closure.

    Uses the Artin action on the free group F_n: sigma_i sends x_i to
    x_i x_{i+1} x_i^-1 and x_{i+1} to x_i; the closure's group is
    <x_1..x_n | x_j = beta(x_j)>.  The last relator is a consequence of the
    others and is dropped, giving a deficiency-one presentation.
    """
    if strands < 1:
        raise InputError("strands must be positive")
    images: list[Word] = [(j,) for j in range(1, strands + 1)]
    perm = list(range(strands))  # position -> strand label at the top
    for s in braid_word:
        i = abs(int(s))
        if not 1 <= i < strands:
            raise InputError(f"braid generator {s} out of range for {strands} strands")
        a, b = images[i - 1], images[i]
        if s > 0:
            images[i - 1], images[i] = free_reduce(a + b + tuple(-x for x in reversed(a))), a
        else:
            images[i - 1], images[i] = b, free_reduce(tuple(-x for x in reversed(b)) + a + b)
        perm[i - 1], perm[i] = perm[i], perm[i - 1]
    relators = [free_reduce(tuple(-x for x in reversed(images[j])) + (j + 1,))
                for j in range(strands)]
    relators = [r for r in relators[:-1] if r]
    # components: cycles of the strand permutation
    comp = [-1] * strands
    label = 0
    for start in range(strands):
        if comp[start] >= 0:
            continue
        j = start
        while comp[j] < 0:
            comp[j] = label
            j = perm[j]
        label += 1
    meridians = [[1 if comp[j] == c else 0 for c in range(label)] for j in range(strands)]
    pres = GroupPresentation([f"x{j + 1}" for j in range(strands)], relators)
    return pres, AbelianizationMap(meridians), comp


def braid_linking_number(braid_word, strands: int) -> int:
    """|half the signed crossings between components 0 and 1| of the closure."""
    pos = list(range(strands))  # position -> strand label
    _, _, comp = braid_closure(braid_word, strands)
    total = 0
    for s in braid_word:
        i = abs(s)
        a, b = pos[i - 1], pos[i]
        if {comp[a], comp[b]} == {0, 1}:
            total += 1 if s > 0 else -1
        pos[i - 1], pos[i] = b, a
    return abs(total) // 2


# -- tower comparison ------------------------------------------------------------

@dataclass
class PredictionReport:
    prime: int
    levels: int
    predicted_fp: int
    predicted_q: int
    tower_fp: dict = field(default_factory=dict)
    tower_q: dict = field(default_factory=dict)
    delta_diagonal: list | None = None
    linking_number: int | None = None
    passed: bool = False

    def to_document(self) -> dict:
        return {
            "prime": self.prime, "levels": self.levels,
            "predicted": {"fp": self.predicted_fp, "q": self.predicted_q},
            "tower": {"fp": self.tower_fp, "q": self.tower_q},
            "delta_diagonal": self.delta_diagonal, "linking_number": self.linking_number,
            "verdict": "PASS" if self.passed else "FAIL",
        }


def predict_vs_tower(pres: GroupPresentation, ab: AbelianizationMap, p: int, levels: int,
                     rep=None, seed: int = DEFAULT_SEED, trials: int = DEFAULT_TRIALS,
                     cache=None) -> PredictionReport:
    """Compare Alexander-matrix predictions of b_1 limits with an actual tower."""
    from . import chain, tower
    from .fpgroup import abelian_rep

    ab.validate(pres)
    expected = abelian_rep(ab.images, p, levels)
    if rep is None:
        rep = expected
    elif rep.n != expected.n or any(
            (a.astype(object) % p**levels != b % p**levels).any()
            for a, b in zip(rep.images, expected.images)):
        raise InputError("representation is not the commuting unipotent image of the abelianization")

    pred_fp = modp_l2_betti_1(pres, ab, p, trials=trials, seed=seed)
    pred_q = rational_l2_betti_1(pres, ab, trials=trials, seed=seed)
    report = PredictionReport(p, levels, pred_fp, pred_q)
    a = alexander_matrix(pres, ab)
    if ab.rank == 2:
        try:
            res = diagonal_specialization(a, ab)
            report.delta_diagonal = poly_to_list(res.delta)
            report.linking_number = abs(int(res.delta.eval(1)))
        except DegenerateMatrix:
            pass

    cx = chain.presentation_complex(pres)
    table = tower.run_tower(pres, rep, cx, levels, fields=("q", "fp"), seed=seed, cache=cache)
    col_fp = table.column(1, "fp")
    col_q = table.column(1, "q")
    est_fp = tower.estimate_limit(col_fp, "fp")
    est_q = tower.estimate_limit(col_q, "q")
    report.tower_fp = est_fp.to_document()
    report.tower_q = est_q.to_document()
    fp_ok = est_fp.lower <= pred_fp <= est_fp.upper and est_fp.point == pred_fp
    q_ok = pred_q <= est_fp.upper and est_q.point == pred_q and pred_q <= pred_fp
    report.passed = bool(fp_ok and q_ok)
    return report
