"""Pure-Python integer kernels.

Reference implementation of the routines in ``_kernels.pyx``; used when the
compiled extension is unavailable or ``HIROTA_KDV_PURE`` is set.  All inputs
are lists of lists of Python ``int``.
"""


def bareiss_echelon(rows):
    """Fraction-free row echelon form.

    Returns ``(echelon, pivots)``.  Every intermediate entry is a minor of the
    input, so the integer divisions are exact.
    """
    a = [list(r) for r in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    prev = 1
    r = 0
    pivots = []
    for c in range(n):
        if r == m:
            break
        p = r
        while p < m and a[p][c] == 0:
            p += 1
        if p == m:
            continue
        if p != r:
            a[r], a[p] = a[p], a[r]
        row_r = a[r]
        piv = row_r[c]
        for i in range(r + 1, m):
            row_i = a[i]
            aic = row_i[c]
            if aic == 0:
                if piv != prev:
                    for j in range(c + 1, n):
                        row_i[j] = piv * row_i[j] // prev
            else:
                for j in range(c + 1, n):
                    row_i[j] = (piv * row_i[j] - aic * row_r[j]) // prev
                row_i[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return a, pivots


def bareiss_rank(rows):
    return len(bareiss_echelon(rows)[1])


def jacobi_violations(P, G):
    """Triples i<j<k where the cyclic Jacobi sum does not vanish.

    ``P[i][j]`` is the bracket matrix and ``G[i][j][l]`` the partial of
    ``P[i][j]`` with respect to coordinate ``l``, both scaled to integers.
    """
    n = len(P)
    bad = []
    for i in range(n):
        Pi = P[i]
        for j in range(i + 1, n):
            Pj = P[j]
            Gij = G[i][j]
            for k in range(j + 1, n):
                Pk = P[k]
                Gjk = G[j][k]
                Gki = G[k][i]
                s = 0
                for l in range(n):
                    s += Pi[l] * Gjk[l] + Pj[l] * Gki[l] + Pk[l] * Gij[l]
                if s != 0:
                    bad.append((i, j, k))
    return bad


def sandwich(A, P, B):
    """Integer product ``A @ P @ B.T``."""
    n = len(P)
    AP = []
    for row in A:
        AP.append([sum(row[l] * P[l][c] for l in range(n) if row[l]) for c in range(n)])
    return [[sum(x * y for x, y in zip(ap, b)) for b in B] for ap in AP]
