import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from coverbetti.errors import BudgetExceeded, FieldTooSmall
from coverbetti.exactla import (LaurentMatrix, PrimeFieldMatrix, bareiss_rank, dump_triples,
                                inverse_mod_p, load_triples, rank_fp, rank_fp_sparse,
                                rank_laurent, rank_laurent_univariate_exact, rank_q, snf)
from coverbetti.exactla import rational
from coverbetti.exactla.laurent import (ExtensionField, _is_irreducible, irreducible_poly,
                                        required_extension_degree)
from coverbetti.exactla.snf import homology_from_snf

from oracles import naive_rank, snf_by_minors

small_matrices = st.integers(1, 8).flatmap(lambda r: st.integers(1, 8).flatmap(
    lambda c: st.lists(st.lists(st.integers(-20, 20), min_size=c, max_size=c),
                       min_size=r, max_size=r)))


@settings(max_examples=150, deadline=None)
@given(small_matrices, st.sampled_from([2, 3, 5, 7, 65537, 2**31 - 1]))
def test_rank_fp_matches_naive(m, p):
    assert rank_fp(m, p) == naive_rank(m, p)


@settings(max_examples=150, deadline=None)
@given(small_matrices)
def test_rank_q_matches_naive(m):
    assert rank_q(m) == naive_rank(m)
    assert bareiss_rank(m) == naive_rank(m)


def test_rank_fp_prime_field_matrix():
    m = PrimeFieldMatrix(3, [[1, 2], [2, 4]])
    assert rank_fp(m) == 1
    with pytest.raises(ValueError):
        rank_fp([[1]])


def test_rank_gf2_wide_rows():
    rng = random.Random(1)
    m = [[rng.randint(0, 1) for _ in range(300)] for _ in range(40)]
    m.append([a ^ b for a, b in zip(m[0], m[1])])
    assert rank_fp(m, 2) == naive_rank(m, 2) == 40


def test_rank_q_modular_path():
    # large enough to leave the Bareiss path; rank 17 by construction
    rng = random.Random(2)
    a = np.array([[rng.randint(-50, 50) for _ in range(17)] for _ in range(60)], dtype=object)
    b = np.array([[rng.randint(-50, 50) for _ in range(55)] for _ in range(17)], dtype=object)
    m = (a @ b).tolist()
    assert len(m) * len(m[0]) > rational.BAREISS_MAX_ENTRIES
    assert rank_q(m) == 17 == naive_rank(m)


def test_rank_q_sees_through_small_primes():
    # 2 * 3 * 5 * 7 kills the determinant modulo every small prime
    m = [[210, 0], [0, 1]]
    assert rank_q(m) == 2
    assert rank_fp(m, 7) == 1


def test_rank_q_entry_budget():
    with pytest.raises(BudgetExceeded):
        rank_q([[2**70]])


def test_random_primes_deterministic():
    ps = rational.random_primes(5, 3)
    assert ps == rational.random_primes(5, 3)
    assert all(sympy.isprime(q) and q < 2**31 for q in ps)
    assert len(set(ps)) == 3


def test_rank_fp_sparse():
    # the first two rows have determinant -3
    rows = [{0: 1, 3: 2}, {3: 1, 0: 2}, {1: 1}]
    assert rank_fp_sparse(rows, 5) == 3
    assert rank_fp_sparse(rows, 3) == 2
    assert rank_fp_sparse([], 7) == 0


def test_inverse_mod_p():
    a = np.array([[2, 1], [1, 1]])
    inv = inverse_mod_p(a, 7)
    assert ((a @ inv) % 7 == np.eye(2, dtype=int)).all()
    with pytest.raises(ValueError):
        inverse_mod_p(np.array([[1, 1], [1, 1]]), 7)


def test_triples_round_trip():
    m = np.array([[0, 3, 0], [1, 0, -2]])
    text = dump_triples(m)
    assert text.splitlines()[0] == "2 3"
    assert (load_triples(text) == m).all()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda r: st.integers(1, 4).flatmap(
    lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c),
                       min_size=r, max_size=r))))
def test_snf_matches_determinantal_divisors(m):
    assert snf(m) == snf_by_minors(m)


def test_snf_examples():
    assert snf([[2, 0], [0, 3]]) == (1, 6)
    assert snf([[0, 0], [0, 0]]) == ()
    assert snf([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == (2, 6, 12)
    # H_1 of the Klein bottle: Z + Z/2
    assert homology_from_snf(2, 0, snf([[2, 0]])) == (1, (2,))


def _lm(num_vars, rows):
    return LaurentMatrix(num_vars, len(rows), len(rows[0]), rows)


def test_required_extension_degree():
    assert required_extension_degree(2, 3, 4) == 6
    assert 2**6 > 48 >= 2**5


def test_rank_laurent_small_field_rejected():
    m = _lm(1, [[{(1,): 1, (0,): -1}]])
    with pytest.raises(FieldTooSmall):
        rank_laurent(m, 2, ext_degree=1)


def test_rank_laurent_examples():
    t_minus_1 = {(1,): 1, (0,): -1}
    one = {(0,): 1}
    # [[t-1, 1], [(t-1)^2, t-1]] has determinant 0
    sq = {(2,): 1, (1,): -2, (0,): 1}
    m = _lm(1, [[t_minus_1, one], [sq, t_minus_1]])
    for p in (2, 3, 5):
        assert rank_laurent(m, p) == 1 == rank_laurent_univariate_exact(m, p)
    # t^3 - 1 is divisible by t - 1; over F_3 it is (t - 1)^3
    n = _lm(1, [[t_minus_1, {(3,): 1, (0,): -1}], [one, {(2,): 1, (1,): 1, (0,): 1}]])
    assert rank_laurent_univariate_exact(n, 3) == 1
    assert rank_laurent(n, 3) == 1
    assert rank_laurent(_lm(2, [[{}, {}]]), 3) == 0


def test_rank_laurent_multivariate():
    x, y = {(1, 0): 1}, {(0, 1): 1}
    xy = {(1, 1): 1}
    m = _lm(2, [[x, y], [xy, {(0, 2): 1}]])  # second row is y times the first
    assert rank_laurent(m, 2) == 1
    m2 = _lm(2, [[x, y], [y, x]])  # det = x^2 - y^2
    assert rank_laurent(m2, 3) == 2
    assert rank_laurent(m2, 2) == 2  # (x + y)^2 over F_2 is still nonzero


def test_rank_laurent_negative_exponents():
    m = _lm(1, [[{(-1,): 1, (0,): -1}, {(0,): 1}], [{(-2,): 1, (-1,): -1}, {(-1,): 1}]])
    assert rank_laurent(m, 5) == 1 == rank_laurent_univariate_exact(m, 5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.dictionaries(st.tuples(st.integers(-2, 3)), st.integers(-3, 3),
                                         max_size=3), min_size=3, max_size=3),
                min_size=1, max_size=3),
       st.sampled_from([2, 3, 5]), st.integers(0, 10**6))
def test_rank_laurent_monotone_and_one_sided(rows, p, seed):
    m = _lm(1, rows)
    exact = rank_laurent_univariate_exact(m, p)
    ranks = [rank_laurent(m, p, trials=t, seed=seed) for t in (1, 2, 3)]
    assert ranks == sorted(ranks)
    assert ranks[-1] <= exact
    assert rank_laurent(m, p, trials=6, seed=seed) == exact


def test_irreducible_poly_exhaustive_against_sympy():
    import itertools
    x = sympy.Symbol("x")
    for p in (2, 3):
        for e in range(1, 6):
            for co in itertools.product(range(p), repeat=e):
                f = list(co) + [1]
                want = sympy.Poly(f[::-1], x, modulus=p).is_irreducible
                assert _is_irreducible(f, p) == want, (p, f)
    for p, e in ((5, 3), (7, 4), (2, 12)):
        f = irreducible_poly(p, e)
        assert len(f) == e + 1 and sympy.Poly(f[::-1], x, modulus=p).is_irreducible


def test_extension_field_arithmetic():
    field = ExtensionField(3, 4)
    rng = random.Random(0)
    a = field.random_nonzero(rng)
    # the multiplicative group has order 3^4 - 1
    assert (field.power(a, 80) == np.eye(4, dtype=np.int64)).all()
    assert (field.power(a, -1) @ a % 3 == np.eye(4, dtype=np.int64)).all()
