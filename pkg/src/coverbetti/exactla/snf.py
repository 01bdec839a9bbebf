"""Smith normal form invariant factors for small integer matrices."""

from __future__ import annotations

from math import gcd

import numpy as np

from ..errors import BudgetExceeded

SNF_MAX_ENTRIES = 200 * 200


def snf(matrix, max_entries: int = SNF_MAX_ENTRIES) -> tuple[int, ...]:
    """Nonzero invariant factors d_1 | d_2 | ... of an integer matrix."""
    a = [[int(x) for x in row] for row in np.asarray(matrix, dtype=object).tolist()]
    if not a or not a[0]:
        return ()
    nrows, ncols = len(a), len(a[0])
    if nrows * ncols > max_entries:
        raise BudgetExceeded(f"{nrows}x{ncols} matrix exceeds SNF budget")

    diag: list[int] = []
    t = 0
    while t < min(nrows, ncols):
        # smallest nonzero entry of the trailing block as pivot
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]

        done = False
        while not done:
            done = True
            piv = a[t][t]
            for i in range(t + 1, nrows):
                q = a[i][t] // piv
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    a[t], a[i] = a[i], a[t]
                    done = False
                    break
            if not done:
                continue
            piv = a[t][t]
            for j in range(t + 1, ncols):
                q = a[t][j] // piv
                if q:
                    for row in a:
                        row[j] -= q * row[t]
                if a[t][j]:
                    for row in a:
                        row[t], row[j] = row[j], row[t]
                    done = False
                    break
            if done:
                # pivot must divide the whole trailing block
                bad = next(((i, j) for i in range(t + 1, nrows) for j in range(t + 1, ncols)
                            if a[i][j] % a[t][t]), None)
                if bad is not None:
                    a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                    done = False
        diag.append(abs(a[t][t]))
        t += 1

    # normalize divisibility (already holds, but cheap to enforce)
    for k in range(len(diag)):
        for l in range(k + 1, len(diag)):
            g = gcd(diag[k], diag[l])
            if g != diag[k]:
                diag[k], diag[l] = g, diag[k] * diag[l] // g
    return tuple(diag)


def homology_from_snf(rank_chain: int, d_out_rank: int, d_in_factors: tuple[int, ...]):
    """Free rank and torsion of ker(d_out)/im(d_in).

    ``rank_chain`` is the rank of the chain group, ``d_out_rank`` the rank of
    the outgoing boundary, ``d_in_factors`` the invariant factors of the
    incoming boundary.
    """
    free = rank_chain - d_out_rank - len(d_in_factors)
    torsion = tuple(d for d in d_in_factors if d > 1)
    return free, torsion
