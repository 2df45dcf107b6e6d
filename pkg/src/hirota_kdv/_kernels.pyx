# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled integer kernels; same contracts as ``_pykernels``."""


def bareiss_echelon(rows):
    cdef list a = [list(row) for row in rows]
    cdef Py_ssize_t m = len(a)
    cdef Py_ssize_t n = len(a[0]) if m else 0
    cdef Py_ssize_t r = 0, c, p, i, j
    cdef list pivots = []
    cdef list row_r, row_i
    cdef object prev = 1, piv, aic
    for c in range(n):
        if r == m:
            break
        p = r
        while p < m and (<list>a[p])[c] == 0:
            p += 1
        if p == m:
            continue
        if p != r:
            a[r], a[p] = a[p], a[r]
        row_r = <list>a[r]
        piv = row_r[c]
        for i in range(r + 1, m):
            row_i = <list>a[i]
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
    cdef Py_ssize_t n = len(P)
    cdef Py_ssize_t i, j, k, l
    cdef list bad = []
    cdef list Pi, Pj, Pk, Gij, Gjk, Gki
    cdef object s
    for i in range(n):
        Pi = <list>P[i]
        for j in range(i + 1, n):
            Pj = <list>P[j]
            Gij = <list>G[i][j]
            for k in range(j + 1, n):
                Pk = <list>P[k]
                Gjk = <list>G[j][k]
                Gki = <list>G[k][i]
                s = 0
                for l in range(n):
                    s += Pi[l] * Gjk[l] + Pj[l] * Gki[l] + Pk[l] * Gij[l]
                if s != 0:
                    bad.append((i, j, k))
    return bad


def sandwich(A, P, B):
    cdef Py_ssize_t n = len(P)
    cdef Py_ssize_t l, c
    cdef list AP = [], out = [], row, ap, b, acc
    cdef object x, s
    for row in A:
        acc = [0] * n
        for l in range(n):
            x = row[l]
            if x:
                pl = <list>P[l]
                for c in range(n):
                    acc[c] += x * pl[c]
        AP.append(acc)
    for ap in AP:
        line = []
        for b in B:
            s = 0
            for c in range(n):
                s += ap[c] * b[c]
            line.append(s)
        out.append(line)
    return out
