import csv
import io
from fractions import Fraction

import pytest

from coverbetti import chain, tower
from coverbetti.cache import Cache
from coverbetti.errors import InputError, InsufficientLevels, MonotonicityViolated
from coverbetti.fpgroup import GroupPresentation, abelian_rep

TORUS = GroupPresentation(["a", "b"], [[1, 2, -1, -2]])
WEDGE = GroupPresentation(["a", "b"], [])


def torus_table(p=2, levels=3, **kw):
    rep = abelian_rep([[1, 0], [0, 1]], p, levels)
    return tower.run_tower(TORUS, rep, chain.presentation_complex(TORUS), levels, **kw)


def test_csv_layout():
    table = torus_table(levels=2)
    rows = list(csv.reader(io.StringIO(table.to_csv())))
    assert tuple(rows[0]) == tower.CSV_COLUMNS
    assert rows[1] == ["0", "1", "4", "1", "1", "0", "0"]
    assert len(rows) == 1 + 3 * 2


def test_fields_subset_leaves_blank_columns():
    table = torus_table(levels=1, fields=("fp",))
    row = table.to_csv().splitlines()[1].split(",")
    assert row[3] == "" and row[4] == "1"


def test_cache_round_trip(tmp_path):
    cache = Cache(tmp_path / "c")
    first = torus_table(levels=2, cache=cache)
    assert len(cache.entries()) == 2
    second = torus_table(levels=2, cache=cache)
    assert first.to_csv() == second.to_csv()
    assert first.input_hash == second.input_hash
    # a different seed is a different key
    torus_table(levels=2, cache=cache, seed=7)
    assert len(cache.entries()) == 4


def test_budget_failure_returns_partial_table():
    rep = abelian_rep([[1, 0], [0, 1]], 2, 4)
    table = tower.run_tower(WEDGE, rep, chain.presentation_complex(WEDGE), 4, element_cap=20)
    assert table.failed_level == 3
    assert table.levels() == [1, 2]
    doc = tower.analyze(table).to_document()
    assert doc["verdict"] == "FAIL" and doc["failed_level"] == 3


def test_estimate_limit_modes():
    col = [(1, 2, 1), (2, 4, 1), (3, 8, 1)]
    fp = tower.estimate_limit(col, "fp")
    assert fp.point == 0 and fp.upper == Fraction(1, 8) and fp.lower == 0 and fp.snapped
    q = tower.estimate_limit(col, "q")
    assert q.upper is None and q.point == 0
    # far from any integer relative to the last step: report the last value
    slow = tower.estimate_limit([(1, 4, 3), (2, 16, 10)], "fp")
    assert not slow.snapped and slow.point == Fraction(10, 16)
    with pytest.raises(InsufficientLevels):
        tower.estimate_limit(col[:1], "fp")
    with pytest.raises(InputError):
        tower.estimate_limit(col, "z")


def test_fit_error_exponent_verdicts():
    # residual grows like index^(1/2): fine for d = 2, too fast for d = 1
    col = [(i, 4**i, 2**i) for i in (1, 2, 3, 4)]
    assert tower.fit_error_exponent(col, 0, 2).verdict == "CONSISTENT"
    fit = tower.fit_error_exponent(col, 0, 1)
    assert fit.verdict == "INCONSISTENT" and abs(fit.slope - 0.5) < 1e-9
    exact = [(i, 2**i, 2**i) for i in (1, 2, 3)]
    assert tower.fit_error_exponent(exact, 1, 1).verdict == "TRIVIALLY-CONSISTENT"
    few = [(1, 2, 2), (2, 4, 4), (3, 8, 9)]
    assert tower.fit_error_exponent(few, 1, 1).verdict == "UNDETERMINED"


def test_monotonicity():
    ok = tower.check_monotonicity([(1, 4, 5), (2, 16, 17), (3, 64, 65)], 2)
    assert ok.passed and ok.values == [5, Fraction(17, 4), Fraction(65, 16)]
    with pytest.raises(MonotonicityViolated):
        tower.check_monotonicity([(1, 2, 1), (2, 4, 3)], 2)
    assert not tower.check_monotonicity([(1, 2, 1), (2, 4, 3)], 2, strict=False).passed
    with pytest.raises(InputError):
        tower.check_monotonicity([(1, 2, 1), (2, 6, 1)], 2)
    rel = tower.check_monotonicity([(1, 2, 1), (2, 4, 1), (3, 8, 1)], 2, base_level=2)
    assert rel.values == [1, Fraction(1, 2)]


def test_analyze_torus():
    report = tower.analyze(torus_table(p=3, levels=2))
    doc = report.to_document()
    assert doc["schema_version"] == tower.SCHEMA_VERSION
    assert doc["d_hat"] == 2 and doc["verdict"] == "PASS"
    assert doc["degrees"]["1"]["fp"]["limit"]["point"] == "0"
    assert doc["degrees"]["1"]["fp_limit_ge_q_limit"] is True
