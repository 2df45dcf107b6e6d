from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hirota_kdv.errors import Inconsistent, SingularPoint
from hirota_kdv.exact import (
    Dual,
    RationalSampler,
    UniPoly,
    as_q,
    eval_with_partials,
    format_q,
    integer_kernel,
    jacobian,
    matmul,
    rank_exact,
    rref,
    solve_exact,
)

nonzero_q = st.fractions(min_value=-50, max_value=50, max_denominator=20).filter(lambda x: x != 0)
small_q = st.fractions(min_value=-50, max_value=50, max_denominator=20)
q_matrix = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(small_q, min_size=n, max_size=n), min_size=1, max_size=5)
)


def test_as_q_parses_strings_and_ints():
    assert as_q("3/4") == Q(3, 4)
    assert as_q(7) == Q(7)
    assert format_q(Q(-6, 4)) == "-3/2"
    assert format_q(Q(5)) == "5"


def test_dual_product_rule():
    x = Dual.variable(Q(2), 0, 2)
    y = Dual.variable(Q(3), 1, 2)
    z = x * x * y
    assert z.value == 12
    assert z.partials == (Q(12), Q(4))


def test_dual_quotient_and_power():
    x = Dual.variable(Q(2), 0, 1)
    assert (1 / x).partials == (Q(-1, 4),)
    assert (x ** -2).partials == (Q(-1, 4),)
    assert (x ** 3).partials == (Q(12),)


def test_dual_division_by_zero_jet():
    with pytest.raises(SingularPoint):
        Dual.variable(0, 0, 1).__rtruediv__(1)


@given(nonzero_q, nonzero_q)
def test_dual_matches_difference_identity(a, b):
    # d/da of a/b + a*b is 1/b + b
    f = lambda v: v[0] / v[1] + v[0] * v[1]  # noqa: E731
    d = eval_with_partials(f, [a, b])
    assert d.value == a / b + a * b
    assert d.partials[0] == 1 / b + b
    assert d.partials[1] == -a / (b * b) + a


def test_eval_with_partials_wraps_zero_division():
    with pytest.raises(SingularPoint):
        eval_with_partials(lambda v: 1 / (v[0] - v[1]), [Q(1), Q(1)])


def test_jacobian_of_linear_map():
    vals, J = jacobian(lambda v: [v[0] + 2 * v[1], 3 * v[0]], [Q(1), Q(1)])
    assert vals == [3, 3]
    assert J == [[1, 2], [3, 0]]


def test_jacobian_lifts_constants():
    _, J = jacobian(lambda v: [v[0], 5], [Q(1), Q(2)])
    assert J == [[1, 0], [0, 0]]


@given(
    st.lists(small_q, max_size=5),
    st.lists(small_q, max_size=5),
    small_q,
)
def test_unipoly_ring_homomorphism(p, q, x):
    P, R = UniPoly(p), UniPoly(q)
    assert (P * R)(x) == P(x) * R(x)
    assert (P + R)(x) == P(x) + R(x)
    assert (P - R)(x) == P(x) - R(x)
    assert P.compose_neg()(x) == P(-x)


def test_unipoly_degree_and_trim():
    p = UniPoly([1, 2, 0, 0])
    assert p.degree == 1
    assert UniPoly().is_zero()
    lam = UniPoly.x()
    assert (lam * lam - 1).coeffs == UniPoly([-1, 0, 1]).coeffs
    q, r = UniPoly([5, 1, 1]).divmod_x()
    assert r == 5 and q == UniPoly([1, 1])


@given(q_matrix)
def test_rank_invariant_under_transpose(m):
    assert rank_exact(m) == rank_exact([list(r) for r in zip(*m)])


@given(q_matrix)
def test_kernel_vectors_are_annihilated(m):
    ker = integer_kernel(m)
    assert len(ker) == len(m[0]) - rank_exact(m)
    for v in ker:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in m)
        assert next(x for x in v if x) > 0


@given(q_matrix)
def test_rref_is_idempotent(m):
    rows, pivots = rref(m)
    again, pivots2 = rref(rows) if rows else ([], [])
    assert pivots == pivots2 and again == rows


@given(st.lists(st.lists(small_q, min_size=3, max_size=3), min_size=3, max_size=3), st.lists(small_q, min_size=3, max_size=3))
def test_solve_exact_roundtrip(a, x):
    b = [r[0] for r in matmul(a, [[v] for v in x])]
    sol = solve_exact(a, b)
    assert [r[0] for r in matmul(a, [[v] for v in sol])] == b


def test_solve_exact_inconsistent():
    with pytest.raises(Inconsistent):
        solve_exact([[1, 1], [1, 1]], [1, 2])


def test_sampler_is_seeded_and_nonzero():
    a = RationalSampler(3).point(10)
    assert a == RationalSampler(3).point(10)
    assert all(x != 0 for x in a)


def test_sampler_regular_point_gives_up():
    rng = RationalSampler(0, max_retries=3)
    with pytest.raises(SingularPoint):
        rng.regular_point(1, lambda v: 1 / 0)
