"""Rank over Q of integer matrices.

Small matrices go through fraction-free (Bareiss) elimination on Python
ints.  Larger ones are reduced modulo random 31-bit primes: rank mod P never
exceeds the rational rank, so the maximum over primes is a lower bound
that equals the rational rank unless every prime tried divides all maximal
nonvanishing minors.  The answer is accepted once two distinct primes
agree on the maximum and a Bareiss rank of a random square sample agrees
with its modular rank.
"""

from __future__ import annotations

import random

import numpy as np
from sympy import nextprime

from ..errors import BudgetExceeded
from .fp import rank_fp

BAREISS_MAX_ENTRIES = 40 * 40
MAX_ENTRY_BITS = 60
SAMPLE_SIZE = 24
MAX_PRIMES = 8


def bareiss_rank(rows) -> int:
    """Fraction-free elimination; exact for any integer matrix."""
    m = [[int(x) for x in row] for row in rows]
    if not m or not m[0]:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = 1
    for c in range(ncols):
        piv = next((r for r in range(rank, nrows) if m[r][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pr = m[rank]
        for r in range(rank + 1, nrows):
            row = m[r]
            f = row[c]
            for j in range(c + 1, ncols):
                row[j] = (pr[c] * row[j] - f * pr[j]) // prev
            row[c] = 0
        prev = pr[c]
        rank += 1
        if rank == nrows:
            break
    return rank


def random_primes(seed: int, count: int, bits: int = 31) -> list[int]:
    rng = random.Random(seed)
    out: list[int] = []
    while len(out) < count:
        q = nextprime(rng.randrange(2 ** (bits - 1), 2**bits - 2**20))
        if q < 2**bits and q not in out:
            out.append(int(q))
    return out


def rank_q(matrix, seed: int = 0xB3771, max_entry_bits: int = MAX_ENTRY_BITS) -> int:
    """Exact rank over Q of an integer matrix."""
    a = np.asarray(matrix, dtype=object)
    if a.ndim != 2 or a.size == 0:
        return 0
    biggest = max(abs(int(x)) for x in a.flat)
    if biggest.bit_length() > max_entry_bits:
        raise BudgetExceeded(
            f"entry of {biggest.bit_length()} bits exceeds budget of {max_entry_bits}")
    if a.shape[0] * a.shape[1] <= BAREISS_MAX_ENTRIES:
        return bareiss_rank(a.tolist())

    primes = random_primes(seed, MAX_PRIMES)
    rng = random.Random(seed ^ 0x5A5A)
    ints = a.astype(np.int64) if biggest < 2**62 else None
    ranks: list[int] = []
    for q in primes:
        reduced = np.array([[int(x) % q for x in row] for row in a], dtype=np.int64) \
            if ints is None else np.mod(ints, q)
        ranks.append(rank_fp(reduced, q))
        best = max(ranks)
        if ranks.count(best) >= 2 and _sample_agrees(a, q, rng):
            return best
    return max(ranks)


def _sample_agrees(a: np.ndarray, q: int, rng: random.Random) -> bool:
    k = min(SAMPLE_SIZE, *a.shape)
    rows = sorted(rng.sample(range(a.shape[0]), k))
    cols = sorted(rng.sample(range(a.shape[1]), k))
    sub = a[np.ix_(rows, cols)]
    exact = bareiss_rank(sub.tolist())
    modular = rank_fp(np.array([[int(x) % q for x in row] for row in sub], dtype=np.int64), q)
    return exact == modular
