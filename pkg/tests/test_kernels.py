from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hirota_kdv import kernels

int_matrix = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=1, max_size=6)
)


def fraction_rank(rows):
    """Textbook Gaussian elimination over Q; independent of the kernels."""
    a = [[Fraction(x) for x in r] for r in rows]
    rank, cols = 0, len(a[0]) if a else 0
    for c in range(cols):
        p = next((i for i in range(rank, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[rank], a[p] = a[p], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][c] != 0:
                f = a[i][c] / a[rank][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def naive_sandwich(A, P, B):
    n, m = len(A), len(B)
    k = len(P)
    return [
        [sum(A[i][p] * P[p][q] * B[j][q] for p in range(k) for q in range(k)) for j in range(m)]
        for i in range(n)
    ]


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


@given(int_matrix)
def test_rank_matches_fraction_oracle(backend, rows):
    assert backend.bareiss_rank(rows) == fraction_rank(rows)


@given(int_matrix)
def test_echelon_pivots_strictly_increase(backend, rows):
    ech, pivots = backend.bareiss_echelon(rows)
    assert pivots == sorted(set(pivots))
    for r, c in enumerate(pivots):
        assert ech[r][c] != 0
        assert all(ech[i][c] == 0 for i in range(r + 1, len(ech)))


def test_echelon_does_not_mutate_input(backend):
    rows = [[2, 4], [1, 3]]
    backend.bareiss_echelon(rows)
    assert rows == [[2, 4], [1, 3]]


def test_rank_of_identity_and_zero(backend):
    assert backend.bareiss_rank([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 3
    assert backend.bareiss_rank([[0, 0], [0, 0]]) == 0


@given(
    st.integers(1, 4).flatmap(
        lambda k: st.tuples(
            st.lists(st.lists(st.integers(-5, 5), min_size=k, max_size=k), min_size=1, max_size=4),
            st.lists(st.lists(st.integers(-5, 5), min_size=k, max_size=k), min_size=k, max_size=k),
            st.lists(st.lists(st.integers(-5, 5), min_size=k, max_size=k), min_size=1, max_size=4),
        )
    )
)
def test_sandwich_matches_naive(backend, args):
    A, P, B = args
    assert backend.sandwich(A, P, B) == naive_sandwich(A, P, B)


def _linear_bracket(n, structure):
    """Lie-Poisson bracket {x_i, x_j} = sum_k c_ij^k x_k at x, with its constant partials."""
    P = [[0] * n for _ in range(n)]
    G = [[[0] * n for _ in range(n)] for _ in range(n)]
    for (i, j), terms in structure.items():
        for k, c in terms:
            G[i][j][k] += c
            G[j][i][k] -= c
    return P, G


def test_jacobi_on_so3_is_clean(backend):
    # so(3): {x0,x1}=x2, {x1,x2}=x0, {x2,x0}=x1
    P, G = _linear_bracket(3, {(0, 1): [(2, 1)], (1, 2): [(0, 1)], (2, 0): [(1, 1)]})
    x = [2, -3, 5]
    for i in range(3):
        for j in range(3):
            P[i][j] = sum(G[i][j][k] * x[k] for k in range(3))
    assert backend.jacobi_violations(P, G) == []


def test_jacobi_detects_broken_structure_constants(backend):
    # {x0,x1}=x2, {x1,x2}=x0, {x2,x0}=x0: cyclic sum is -x2
    P, G = _linear_bracket(3, {(0, 1): [(2, 1)], (1, 2): [(0, 1)], (2, 0): [(0, 1)]})
    x = [1, 2, 3]
    for i in range(3):
        for j in range(3):
            P[i][j] = sum(G[i][j][k] * x[k] for k in range(3))
    assert backend.jacobi_violations(P, G) == [(0, 1, 2)]


@pytest.mark.parametrize("n", [2, 5])
def test_backends_agree_on_random_input(n):
    import random

    from tests.conftest import BACKENDS

    rng = random.Random(n)
    rows = [[rng.randint(-9, 9) for _ in range(n + 1)] for _ in range(n)]
    ranks = {m.bareiss_rank(rows) for m in BACKENDS}
    assert len(ranks) == 1
