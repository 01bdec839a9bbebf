"""Run towers of covers and analyse the resulting Betti columns.

Limits are reported as brackets plus a point value; the point value is an
integer only when the last normalized Betti number is within its own last
forward difference of that integer, otherwise it is the last normalized
value itself.  Nothing is extrapolated past the computed levels.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import chain
from .cache import Cache, content_hash
from .errors import BudgetError, IdentityViolated, InputError, InsufficientLevels, \
    MonotonicityViolated
from .fpgroup import DEFAULT_ELEMENT_CAP, GroupPresentation, PadicRep, enumerate_quotient, estimate_dim

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXPONENT_SLACK = 0.15
CSV_COLUMNS = ("k", "i", "index", "b_Q", "b_Fp", "coker_Q", "coker_Fp")
FIELDS = ("q", "fp")


@dataclass
class BettiRow:
    k: int
    level: int
    index: int
    b_q: int | None = None
    b_fp: int | None = None
    coker_q: int | None = None
    coker_fp: int | None = None

    def as_list(self) -> list:
        return [self.k, self.level, self.index, self.b_q, self.b_fp, self.coker_q, self.coker_fp]

    @classmethod
    def from_list(cls, vals) -> "BettiRow":
        return cls(*vals)


@dataclass
class BettiTable:
    prime: int
    dims: list
    rows: list = field(default_factory=list)
    input_hash: str = ""
    failed_level: int | None = None
    error: str | None = None

    def levels(self) -> list[int]:
        return sorted({r.level for r in self.rows})

    def column(self, k: int, field_: str) -> list[tuple[int, int, int]]:
        """(level, index, b_k) over the requested field, by level."""
        attr = "b_q" if field_ == "q" else "b_fp"
        out = [(r.level, r.index, getattr(r, attr)) for r in self.rows if r.k == k]
        return sorted(x for x in out if x[2] is not None)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in sorted(self.rows, key=lambda r: (r.k, r.level)):
            writer.writerow(["" if v is None else v for v in r.as_list()])
        return buf.getvalue()


def _level_key(pres: GroupPresentation, rep: PadicRep, cx: chain.EquivariantComplex,
               level: int, fields, seed: int) -> str:
    q = rep.prime**level
    doc = {
        "schema": SCHEMA_VERSION,
        "relators": [list(r) for r in pres.relators],
        "generators": list(pres.generators),
        "p": rep.prime, "n": rep.n, "level": level,
        "images_mod": [[[int(x) % q for x in row] for row in m.tolist()] for m in rep.images],
        "complex": cx.to_document(),
        "fields": sorted(fields), "seed": seed,
    }
    return content_hash(doc)


def _compute_level(pres, rep, cx, level, fields, seed, element_cap) -> list[BettiRow]:
    q = enumerate_quotient(pres, rep, level, element_cap=element_cap)
    ind = chain.induce(cx, q)
    p = rep.prime
    by_field = {}
    for f in fields:
        rows = chain.betti(ind, f, p, seed=seed)
        chain.cokernel_identity_check(ind, rows)
        if sum((-1) ** r.k * r.betti for r in rows) != ind.index * chain.euler_characteristic(cx):
            raise IdentityViolated(f"Euler characteristic is not multiplicative at level {level}")
        by_field[f] = rows
    components = chain.orbit_count(q)
    out = []
    for k in range(len(cx.dims)):
        row = BettiRow(k, level, q.index)
        if "q" in by_field:
            row.b_q, row.coker_q = by_field["q"][k].betti, by_field["q"][k].coker
        if "fp" in by_field:
            row.b_fp, row.coker_fp = by_field["fp"][k].betti, by_field["fp"][k].coker
        if k == 0:
            for b in (row.b_q, row.b_fp):
                if b is not None and b != components:
                    raise IdentityViolated(f"b_0 = {b} but the cover has {components} components")
        if row.b_q is not None and row.b_fp is not None and row.b_fp < row.b_q:
            raise IdentityViolated(f"b_{k}(F_p) < b_{k}(Q) at level {level}")
        out.append(row)
    return out


def run_tower(pres: GroupPresentation, rep: PadicRep, cx: chain.EquivariantComplex, levels: int,
              fields=FIELDS, seed: int = 0xB3771, cache: Cache | None = None,
              element_cap: int = DEFAULT_ELEMENT_CAP, start_level: int = 1) -> BettiTable:
    """Betti numbers of the covers at levels start_level..levels.

    A budget failure stops the run and returns the rows computed so far,
    with ``failed_level`` set.
    """
    fields = tuple(f for f in FIELDS if f in fields)
    if not fields:
        raise InputError("at least one of the fields q, fp is required")
    if levels < start_level:
        raise InputError("levels must be >= start level")
    if levels > rep.max_level:
        raise InputError(f"levels {levels} exceeds representation max_level {rep.max_level}")
    rep.validate(pres, levels)
    table = BettiTable(rep.prime, list(cx.dims))
    table.input_hash = content_hash({
        "levels": [_level_key(pres, rep, cx, i, fields, seed) for i in range(start_level, levels + 1)]})
    for i in range(start_level, levels + 1):
        key = _level_key(pres, rep, cx, i, fields, seed)
        cached = cache.get(key) if cache is not None else None
        if cached is not None:
            rows = [BettiRow.from_list(v) for v in cached["rows"]]
        else:
            try:
                rows = _compute_level(pres, rep, cx, i, fields, seed, element_cap)
            except BudgetError as exc:
                table.failed_level, table.error = i, str(exc)
                log.warning("level %d aborted: %s", i, exc)
                break
            if cache is not None:
                cache.put(key, {"rows": [r.as_list() for r in rows]})
        table.rows.extend(rows)
    return table


# -- analysis ------------------------------------------------------------------

@dataclass
class LimitEstimate:
    mode: str
    point: Fraction
    lower: Fraction | None
    upper: Fraction | None
    values: list
    differences: list
    snapped: bool

    def to_document(self) -> dict:
        def s(x):
            return None if x is None else str(x)
        return {"mode": self.mode, "point": s(self.point), "lower": s(self.lower),
                "upper": s(self.upper), "values": [s(v) for v in self.values],
                "differences": [s(v) for v in self.differences],
                "point_rule": "integer-snap" if self.snapped else "last-value"}


def estimate_limit(column, mode: str) -> LimitEstimate:
    """Limit of b/index from a column of (level, index, b) or (index, b)."""
    if mode not in FIELDS:
        raise InputError(f"unknown mode {mode!r}")
    pts = [c[-2:] for c in column]
    if len(pts) < 2:
        raise InsufficientLevels("need at least two levels")
    values = [Fraction(b, idx) for idx, b in pts]
    diffs = [b - a for a, b in zip(values, values[1:])]
    last = values[-1]
    lower, upper = (Fraction(0), last) if mode == "fp" else (None, None)
    n = Fraction(round(last))
    snapped = abs(last - n) <= abs(diffs[-1]) and (upper is None or n <= upper) and n >= 0
    return LimitEstimate(mode, n if snapped else last, lower, upper, values, diffs, snapped)


@dataclass
class ExponentFit:
    slope: float | None
    bound: float
    residuals: list
    verdict: str

    def to_document(self) -> dict:
        return {"slope": None if self.slope is None else round(self.slope, 9),
                "bound": round(self.bound, 9), "slack": EXPONENT_SLACK,
                "residuals": [str(e) for e in self.residuals], "verdict": self.verdict}


def fit_error_exponent(column, beta, d_hat) -> ExponentFit:
    """Least-squares slope of log|b - beta index| against log index.

    CONSISTENT when the slope is at most 1 - 1/d + 0.15; identically zero
    residuals are TRIVIALLY-CONSISTENT; fewer than three nonzero residuals
    leave the slope unreported (UNDETERMINED).
    """
    pts = [c[-2:] for c in column]
    if len(pts) < 3:
        raise InsufficientLevels("need at least three levels")
    beta = Fraction(beta)
    residuals = [abs(b - beta * idx) for idx, b in pts]
    bound = 1 - 1 / float(d_hat) + EXPONENT_SLACK
    nz = [(idx, e) for (idx, _), e in zip(pts, residuals) if e]
    if not nz:
        return ExponentFit(None, bound, residuals, "TRIVIALLY-CONSISTENT")
    if len(nz) < 3:
        return ExponentFit(None, bound, residuals, "UNDETERMINED")
    x = np.log([float(i) for i, _ in nz])
    y = np.log([float(e) for _, e in nz])
    slope = float(np.polyfit(x, y, 1)[0])
    slope = 0.0 if abs(slope) < 1e-12 else slope
    return ExponentFit(slope, bound, residuals, "CONSISTENT" if slope <= bound + 1e-12 else "INCONSISTENT")


@dataclass
class MonotonicityVerdict:
    base_level: int
    values: list
    passed: bool

    def to_document(self) -> dict:
        return {"base_level": self.base_level, "values": [str(v) for v in self.values],
                "verdict": "PASS" if self.passed else "FAIL"}


def check_monotonicity(column, p: int, base_level: int = 1, strict: bool = True) -> MonotonicityVerdict:
    """b(X_i; F_p) / [Gamma_b : Gamma_i] must not increase for i >= b."""
    pts = [c for c in column if c[0] >= base_level]
    if not pts or pts[0][0] != base_level:
        raise InsufficientLevels(f"base level {base_level} not in the column")
    base_index = pts[0][1]
    values = []
    for level, idx, b in pts:
        rel = Fraction(idx, base_index)
        if rel.denominator != 1 or not _is_power(rel.numerator, p):
            raise InputError(f"relative index {rel} at level {level} is not a power of {p}")
        values.append(Fraction(b) / rel)
    passed = all(b <= a for a, b in zip(values, values[1:]))
    if strict and not passed:
        raise MonotonicityViolated(f"normalized F_p Betti numbers increase: {[str(v) for v in values]}")
    return MonotonicityVerdict(base_level, values, passed)


def _is_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


@dataclass
class TowerReport:
    table: BettiTable
    d_hat: object
    d_steps: list
    d_user: int | None
    degrees: dict
    passed: bool

    def to_document(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "input_hash": self.table.input_hash,
            "prime": self.table.prime,
            "dims": self.table.dims,
            "levels": self.table.levels(),
            "failed_level": self.table.failed_level,
            "error": self.table.error,
            "d_hat": _num(self.d_hat),
            "d_steps": [[a, b, _num(e)] for a, b, e in self.d_steps],
            "d_user": self.d_user,
            "rows": [r.as_list() for r in sorted(self.table.rows, key=lambda r: (r.k, r.level))],
            "degrees": {str(k): v for k, v in sorted(self.degrees.items())},
            "verdict": "PASS" if self.passed else "FAIL",
        }


def _num(x):
    if isinstance(x, float):
        return round(x, 9)
    return x


def analyze(table: BettiTable, d_user: int | None = None, base_level: int = 1) -> TowerReport:
    """Limit brackets, error-exponent fits and monotonicity for every degree."""
    p = table.prime
    indices = sorted({(r.level, r.index) for r in table.rows})
    try:
        est = estimate_dim(indices, p)
        d_hat, steps = est.estimate, est.steps
    except InsufficientLevels:
        d_hat, steps = None, []
    d_for_fit = d_user if d_user is not None else d_hat
    degrees = {}
    passed = table.failed_level is None
    for k in range(len(table.dims)):
        info = {}
        limits = {}
        for f in FIELDS:
            col = table.column(k, f)
            if len(col) < 2:
                continue
            lim = estimate_limit(col, f)
            limits[f] = lim
            entry = {"limit": lim.to_document()}
            if len(col) >= 3 and d_for_fit:
                fit = fit_error_exponent(col, lim.point, d_for_fit)
                entry["exponent"] = fit.to_document()
                passed = passed and fit.verdict != "INCONSISTENT"
            if f == "fp" and any(c[0] == base_level for c in col):
                mono = check_monotonicity(col, p, base_level, strict=False)
                entry["monotonicity"] = mono.to_document()
                passed = passed and mono.passed
            info[f] = entry
        if "q" in limits and "fp" in limits:
            ordered = limits["fp"].point >= limits["q"].point
            info["fp_limit_ge_q_limit"] = ordered
            passed = passed and ordered
        degrees[k] = info
    return TowerReport(table, d_hat, steps, d_user, degrees, passed)
