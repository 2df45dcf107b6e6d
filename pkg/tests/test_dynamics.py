from fractions import Fraction as Q
from math import gcd

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hirota_kdv.dynamics import (
    Orbit,
    ReductionSpec,
    State,
    consistency_check,
    emit_wave,
    eta_index_map,
    eta_permute,
    from_g,
    g_step,
    g_step_back,
    kdv_step,
    kdv_step_back,
    orbit_from_json,
    orbit_json,
    periodic_coefficients,
    project,
    tau_step,
    tau_step_back,
    to_g,
    u_step,
    u_step_back,
    v_range,
    variant_for,
    w_residual,
    w_step,
    w_step_back,
)
from hirota_kdv.errors import BadParams, BadParity, PeriodicityViolation, SingularStep

nonzero_q = st.fractions(min_value=-9, max_value=9, max_denominator=9).filter(lambda x: x != 0)
ODD = [(2, 1), (4, 1), (4, 3), (5, 2), (7, 4), (8, 5)]
EVEN = [(3, 1), (5, 3), (7, 1), (7, 5)]


def states(n):
    return st.lists(nonzero_q, min_size=n, max_size=n)


def _roundtrip(step, back, state):
    try:
        fwd = step(state)
        return back(fwd) == state
    except SingularStep:
        return True


@pytest.mark.parametrize("N,M", ODD + EVEN)
@given(data=st.data())
def test_kdv_step_inverts(N, M, data):
    spec = ReductionSpec(N, M, data.draw(nonzero_q))
    s = State("v", data.draw(states(N + M)), data.draw(st.integers(-5, 5)))
    assert _roundtrip(lambda x: kdv_step(spec, x), lambda x: kdv_step_back(spec, x), s)


@pytest.mark.parametrize("N,M", ODD + EVEN)
@pytest.mark.parametrize("family", [1, 2])
@given(data=st.data())
def test_tau_step_inverts(N, M, family, data):
    D = 2 * N + M if family == 1 else 2 * M + N
    spec = ReductionSpec(N, M, data.draw(nonzero_q), data.draw(states(M)), data.draw(states(N)))
    s = State("tau", data.draw(states(D)), data.draw(st.integers(-5, 5)))
    assert _roundtrip(lambda x: tau_step(spec, family, x), lambda x: tau_step_back(spec, family, x), s)


@pytest.mark.parametrize("N,M", ODD + EVEN)
@pytest.mark.parametrize("family", [1, 2])
@given(data=st.data())
def test_u_step_inverts(N, M, family, data):
    spec = ReductionSpec(N, M, data.draw(nonzero_q), data.draw(states(M)), data.draw(states(N)))
    n = N + M - 1 if spec.odd else N + M - 2
    variant = variant_for(spec, family)
    s = State("u" if family == 1 else "uprime", data.draw(states(n)), data.draw(st.integers(-5, 5)))
    assert _roundtrip(lambda x: u_step(spec, variant, x), lambda x: u_step_back(spec, variant, x), s)


@pytest.mark.parametrize("N,M", EVEN)
@given(data=st.data())
def test_w_step_inverts_and_satisfies(N, M, data):
    spec = ReductionSpec(N, M, data.draw(nonzero_q))
    s = State("w", data.draw(states(N + M - 1)))
    try:
        nxt = w_step(spec, s)
    except SingularStep:
        return
    assert w_residual(spec, list(s.values) + [nxt.values[-1]]) == 0
    assert _roundtrip(lambda x: w_step(spec, x), lambda x: w_step_back(spec, x), s)


@pytest.mark.parametrize("N,M", ODD)
@given(data=st.data())
def test_g_map_inverts_and_conjugates(N, M, data):
    spec = ReductionSpec(N, M, data.draw(nonzero_q))
    v = State("v", data.draw(states(N + M)))
    try:
        g = to_g(spec, v)
        assert from_g(spec, g) == v
        # the g-map is the KdV map seen through v -> g
        assert g_step(spec, g).values == to_g(spec, kdv_step(spec, v)).values
        assert g_step_back(spec, g_step(spec, g)) == g
    except SingularStep:
        pass


@pytest.mark.parametrize("N,M", ODD + EVEN)
def test_consistency(N, M):
    rep = consistency_check(ReductionSpec(N, M, Q(2, 3)), steps=8, seed=1)
    assert rep.passed, rep.failures


def test_periodic_coefficients_reject_aperiodic():
    spec = ReductionSpec(4, 3)
    with pytest.raises(PeriodicityViolation):
        periodic_coefficients(spec, [Q(k + 1) for k in range(12)], "1o")


def test_periodic_coefficients_recover_beta():
    spec = ReductionSpec(5, 2, Q(3), (Q(2), Q(-1)))
    s = State("u", [Q(k + 2, 3) for k in range(6)])
    orbit = list(s.values)
    for _ in range(8):
        s = u_step(spec, "1o", s)
        orbit.append(s.values[-1])
    assert periodic_coefficients(spec, orbit, "1o") == (Q(2), Q(-1))


def test_singular_step_reports_index():
    spec = ReductionSpec(4, 3)
    with pytest.raises(SingularStep) as exc:
        kdv_step(spec, State("v", [1, 1, 1, 0, 1, 1, 1], 10))
    assert exc.value.index == 17


def test_parity_guards():
    with pytest.raises(BadParity):
        w_step(ReductionSpec(4, 3), State("w", [1] * 6))
    with pytest.raises(BadParity):
        u_step(ReductionSpec(5, 3), "1o", State("u", [1] * 6))
    with pytest.raises(BadParity):
        project(ReductionSpec(4, 3), State("v", [1] * 7), "w")


def test_state_size_checked():
    with pytest.raises(BadParams):
        kdv_step(ReductionSpec(4, 3), State("v", [1] * 6))
    with pytest.raises(BadParams):
        State("z", [1])


def test_tau_projection_matches_u_projection():
    # tau -> u -> v agrees with tau -> v for a family-1 orbit with beta = 1
    spec = ReductionSpec(5, 2, Q(1, 2))
    tau = State("tau", [Q(k + 2, k + 1) for k in range(12)])
    u = project(spec, tau, "u", family=1)
    assert project(spec, u, "v").values == project(spec, tau, "v", family=1).values


def test_figure_seed_is_fixed_by_one_step():
    spec = ReductionSpec(4, 3, -1)
    s = State("v", [1, 1, 1, 1, 1, 1, 3])
    assert kdv_step(spec, s).values[-1] == 1


def test_orbit_json_roundtrip():
    spec = ReductionSpec(5, 2, Q(-3, 4))
    orb = Orbit(spec, State("v", [Q(k + 1, 2) for k in range(7)]), lambda s: kdv_step(spec, s), history=4)
    orb.advance(6)
    spec2, states_ = orbit_from_json(orb.to_json())
    assert spec2 == spec
    assert [s.values for s in states_] == [s.values for s in orb.history]
    assert orbit_json(spec, []) .startswith("{")


def test_wave_grid_satisfies_lattice_equation():
    spec = ReductionSpec(4, 3, -1)
    grid = emit_wave(spec, [1, 1, 1, 1, 1, 1, 3], 6, 6, offset=20)
    assert grid.interior_ok()
    v = v_range(spec, [1, 1, 1, 1, 1, 1, 3], -10, 40)
    assert grid.values[2, 1] == v[2 * 3 - 1 * 4 + 20]
    csv = grid.to_csv(decimal=3).splitlines()
    assert csv[0] == "k,l,value" and len(csv) == 50


def test_eta_index_map_is_permutation():
    for N in range(2, 12):
        for M in range(1, N):
            if gcd(N, M) == 1:
                assert sorted(eta_index_map(N, M)) == list(range(N + M))


def test_eta_permute_reorders():
    spec = ReductionSpec(4, 3)
    g = State("g", list(range(1, 8)))
    h = eta_permute(spec, g)
    assert h.kind == "h" and sorted(h.values) == sorted(g.values)
