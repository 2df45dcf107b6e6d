"""The thirteen acceptance criteria, one test each.

Every test records a one-line verdict; the lines are printed in the terminal
summary under pytest, or directly when this file is run as a script.
"""

from __future__ import annotations

import sys
from fractions import Fraction as Q
from math import gcd

import pytest

from hirota_kdv import lax, poisson
from hirota_kdv.dynamics import ReductionSpec, State, emit_wave, u_step, v_range, variant_for
from hirota_kdv.exact import RationalSampler, jacobian, matmul, rank_exact, transpose
from hirota_kdv.quiver import build_exchange, palindromic_basis, reduced_dimension, reduced_exchange

from tests.test_poisson import A_16_9, A_17_9_ODD, A_17_11_ODD
from tests.test_quiver import BASIS_T2, BEX_T1, BEX_T2, BHAT_T2

RESULTS: dict[int, tuple[bool, str]] = {}
SAMPLES = 5
PAIRS_6 = [(3, 2), (4, 3), (5, 2), (5, 4), (7, 2), (7, 4), (8, 3)]


def pairs(max_sum, parity=None):
    out = [(N, M) for N in range(2, max_sum) for M in range(1, N) if N + M <= max_sum and gcd(N, M) == 1]
    if parity == "odd":
        out = [p for p in out if sum(p) % 2]
    return out


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(line(n))


def line(n: int) -> str:
    ok, detail = RESULTS[n]
    return f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def _u_map(spec, family):
    variant = variant_for(spec, family)
    kind = "u" if family == 1 else "uprime"
    return lambda x: list(u_step(spec, variant, State(kind, x, 0)).values)


def test_criterion_01_exchange_matrices():
    b2, b1 = build_exchange("t2", 4, 3).as_lists(), build_exchange("t1", 4, 3).as_lists()
    ok = b2 == BEX_T2 and b1 == BEX_T1 and rank_exact(b2) == 6 and rank_exact(b1) == 6
    record(1, ok, "printed (4,3) exchange matrices reproduced, both of rank 6")
    assert ok


def test_criterion_02_rank_sweep():
    bad = [(f, N, M) for N, M in pairs(20) for f in ("t1", "t2")
           if rank_exact(build_exchange(f, N, M).as_lists()) != reduced_dimension(N, M)]
    record(2, not bad, f"rank over {2 * len(pairs(20))} exchange matrices with N+M <= 20" + (f"; bad {bad}" if bad else ""))
    assert not bad


def test_criterion_03_basis_and_reduced_matrix():
    B = build_exchange("t2", 4, 3)
    basis = palindromic_basis(B)
    Bh = reduced_exchange(B, basis)
    W = basis.matrix()
    ok = (list(basis.vectors) == BASIS_T2 and Bh.as_lists() == BHAT_T2
          and matmul(matmul(W, Bh.as_lists()), transpose(W)) == [[Q(x) for x in r] for r in B.rows])
    record(3, ok, "printed basis and reduced matrix, W Bh W^T = B")
    assert ok


def test_criterion_04_u_coefficients():
    routes = {}
    for N, M in pairs(20):
        a = poisson.solve_u_coefficients(N, M)  # raises unless the nullspace is 1-dimensional
        routes[a.route] = routes.get(a.route, 0) + 1
    a16, a179, a1711 = (poisson.solve_u_coefficients(*p) for p in ((16, 9), (17, 9), (17, 11)))
    ok = (a16.values == A_16_9 and a179.odd_part() == A_17_9_ODD and a1711.odd_part() == A_17_11_ODD
          and not any(a179.even_part()) and not any(a1711.even_part()))
    record(4, ok, f"nullspace dimension 1 for {len(pairs(20))} pairs {routes}; printed vectors match")
    assert ok


def test_criterion_05_coefficient_consistency():
    bad = []
    for N, M in pairs(15, "odd"):
        c, d = poisson.cd_from_a(N, M, poisson.solve_u_coefficients(N, M))
        kc = poisson.kdv_coefficients(N, M)
        if not (poisson.proportionality(c, kc) and poisson.proportionality(d, kc)
                and poisson.coefficient_relations_hold(N, M, c) and poisson.coefficient_relations_hold(N, M, d)):
            bad.append((N, M))
    record(5, not bad, f"lifted coefficients for {len(pairs(15, 'odd'))} odd pairs" + (f"; bad {bad}" if bad else ""))
    assert not bad


def _flip_controls(spec):
    step = poisson.kdv_map(spec)
    escaped = []
    for k in range(1, spec.K):
        for make in (poisson.kdv1, poisson.kdv2):
            c = list(poisson.kdv_coefficients(spec.N, spec.M))
            c[k] = -c[k]
            b = make(spec, c)
            if poisson.jacobi_check(b, 2, 0).passed and poisson.poisson_map_check(step, b, b, 2, 0).passed:
                escaped.append((make.__name__, k))
    return escaped


def test_criterion_06_jacobi_and_pencil():
    rng = RationalSampler(6)
    bad, escaped = [], []
    for N, M in PAIRS_6:
        spec = ReductionSpec(N, M, rng.scalar())
        b1, b2 = poisson.kdv1(spec), poisson.kdv2(spec)
        certs = [poisson.jacobi_check(b1, SAMPLES, 0), poisson.jacobi_check(b2, SAMPLES, 0)]
        certs += [poisson.pencil_check(b1, b2, rng.scalar(), rng.scalar(), SAMPLES, s) for s in range(3)]
        bad += [(N, M, c.check) for c in certs if not c.passed]
        escaped += [(N, M, e) for e in _flip_controls(spec)]
    ok = not bad and not escaped
    record(6, ok, f"Jacobi and 3 pencils at {SAMPLES} points for {len(PAIRS_6)} pairs; every flipped sign rejected"
           + (f"; bad {bad} escaped {escaped}" if not ok else ""))
    assert ok


def _criterion_7_parts():
    fails = []
    for N, M in PAIRS_6:
        spec = ReductionSpec(N, M, Q(-2, 3))
        step = poisson.kdv_map(spec)
        a = poisson.solve_u_coefficients(N, M)
        c, d = poisson.cd_from_a(N, M, a)
        ub = poisson.u_log(N, M, a)
        certs = [poisson.poisson_map_check(step, b, b, SAMPLES, 0)
                 for b in (poisson.kdv1(spec), poisson.kdv2(spec), poisson.kdv3(spec))]
        certs += [poisson.poisson_map_check(_u_map(spec, f), ub, ub, SAMPLES, 0) for f in (1, 2)]
        certs.append(poisson.poisson_map_check(poisson.projection(spec, "u", "v"), ub, poisson.kdv1(spec, c), SAMPLES, 0))
        certs.append(poisson.poisson_map_check(poisson.projection(spec, "uprime", "v"), ub, poisson.kdv2(spec, d),
                                               SAMPLES, 0))
        fails += [(N, M, c.family) for c in certs if not c.passed]
    return fails


def _pi_v(target):
    spec = ReductionSpec(5, 3, Q(-2, 3))
    return poisson.poisson_map_check(poisson.projection(spec, "v", "w"), poisson.kdv3(spec), target, SAMPLES, 0)


def test_criterion_07_poisson_maps():
    fails = _criterion_7_parts()
    W3 = poisson.w53(3, Q(-2, 3))
    as_written = _pi_v(W3).passed
    negated = _pi_v(poisson.scaled(W3, -1)).passed
    detail = (f"kdv_step, u_step, u->v, u'->v at {SAMPLES} points for {len(PAIRS_6)} pairs"
              f"{'' if not fails else f' (bad {fails})'}; (5,3) pi_v KDV3 -> W1-W2 "
              f"{'holds' if as_written else 'fails'}, -> W2-W1 {'holds' if negated else 'fails'}")
    record(7, not fails and as_written, detail)
    assert not fails
    assert negated


@pytest.mark.xfail(strict=True, reason="displayed third v-bracket pushes forward to W2 - W1, not W1 - W2; see ledger")
def test_criterion_07_pi_v_as_written():
    assert _pi_v(poisson.w53(3, Q(-2, 3))).passed


def test_criterion_08_rank_and_casimirs():
    bad = []
    for N, M in PAIRS_6:
        spec = ReductionSpec(N, M, Q(3, 5))
        x = RationalSampler(N).point(spec.K)
        for b in (poisson.kdv1(spec), poisson.kdv2(spec)):
            if poisson.bracket_rank(b, x) != spec.K - 1:
                bad.append((N, M, b.family))
    a = Q(-3, 4)
    spec = ReductionSpec(5, 3, a)
    W1, W2 = poisson.w53(1, a), poisson.w53(2, a)
    w = RationalSampler(8).point(7)
    I = lax.w_integrals(spec)(w)
    extra = {
        "W1 rank 6": poisson.bracket_rank(W1, w) == 6,
        "W2 rank 6": poisson.bracket_rank(W2, w) == 6,
        "C1 Casimir of W1": poisson.casimir_check(lambda x: lax.casimir_one(a, x), W1, SAMPLES, 0).passed,
        "C2 Casimir of W2": poisson.casimir_check(lambda x: lax.casimir_two(a, x), W2, SAMPLES, 0).passed,
        "C2 = -I0": lax.casimir_two(a, w) == -I[0],
        "C1 identity": lax.casimir_one(a, w) == I[0] + a * I[1] + a**2 * I[2] + a**3 * I[3] + 2 * a**4,
    }
    ok = not bad and all(extra.values())
    record(8, ok, "KDV1/KDV2 rank N+M-1; (5,3) W-ranks, C1, C2 and the C1 identity"
           + ("" if ok else f"; bad {bad} {[k for k, v in extra.items() if not v]}"))
    assert ok


def test_criterion_09_spectral_invariance():
    bad = [p for p in pairs(13) if not lax.spectral_invariance_check(ReductionSpec(*p, Q(-5, 3)), 10, 2, 9).passed]
    spec = ReductionSpec(5, 3, Q(-5, 3))
    v = RationalSampler(9).point(8)
    _, J = jacobian(lax.integrals(spec), v)
    lead = lax.monodromy_v(spec, v).trace().coeff(4) == 2
    ok = not bad and lead and len(J) == 4 and rank_exact(J) == 4
    record(9, ok, f"trace and det conserved over 10 steps for {len(pairs(13))} pairs; (5,3) leading 2, rank 4"
           + (f"; bad {bad}" if bad else ""))
    assert ok


def test_criterion_10_lax_identities():
    bad = []
    for p in [(4, 3), (5, 2), (5, 3), (7, 3)]:
        spec = ReductionSpec(*p, Q(7, 4))
        for cert in (lax.zero_curvature_check(spec, SAMPLES, 0), lax.lax_equation_check(spec, SAMPLES, 0)):
            if not cert.passed:
                bad.append((p, cert.check))
    record(10, not bad, f"zero curvature and monodromy Lax equation at {SAMPLES} states" + (f"; bad {bad}" if bad else ""))
    assert not bad


def test_criterion_11_dressing():
    bad = [p for p in [(5, 3), (5, 2), (7, 4), (4, 1)]
           if not lax.dressing_match_check(ReductionSpec(*p, Q(-4, 3)), SAMPLES, 0).passed]
    rng = RationalSampler(11)
    for K in (3, 5, 7):
        h, b, lam = rng.point(K), rng.point(K), rng.scalar()
        if lax.trace_formula_eval(h, [x - lam for x in b]) != lax.dressing_monodromy(h, b).trace()(lam):
            bad.append(("trace formula", K))
    record(11, not bad, "monodromy equals dressing monodromy at -lambda; trace formula K = 3, 5, 7"
           + (f"; bad {bad}" if bad else ""))
    assert not bad


def test_criterion_12_involution_and_liouville():
    bad = []
    for N, M in pairs(13, "odd"):
        spec = ReductionSpec(N, M, Q(2, 7))
        for b in (poisson.kdv1(spec), poisson.kdv2(spec), poisson.kdv3(spec)):
            if not lax.trace_involution_check(spec, b, 2, 12).passed:
                bad.append((N, M, b.family))
        if not lax.liouville_account(spec, 12).meets_threshold:
            bad.append((N, M, "liouville"))
    a = Q(2, 7)
    f = lax.w_integrals(ReductionSpec(5, 3, a))
    for which in (1, 2):
        if not poisson.involution_check(f, poisson.w53(which, a), SAMPLES, 0).passed:
            bad.append((5, 3, f"W{which}"))
    record(12, not bad, f"trace integrals in involution under three brackets and Liouville count for "
           f"{len(pairs(13, 'odd'))} odd pairs; (5,3) w-integrals under W1, W2" + (f"; bad {bad}" if bad else ""))
    assert not bad


def test_criterion_13_wave():
    spec = ReductionSpec(4, 3, -1)
    init = [1, 1, 1, 1, 1, 1, 3]
    grid = emit_wave(spec, init, 30, 30, offset=1000)
    hi = 1000 + 30 * spec.M
    v = v_range(spec, init, 0, hi)
    tr0 = lax.trace_coefficients(spec, [v[m] for m in range(7)])
    const = all(lax.trace_coefficients(spec, [v[m + j] for j in range(7)]) == tr0 for m in range(0, hi - 6))
    ok = hi >= 300 and grid.interior_ok() and const
    record(13, ok, f"{hi} orbit steps, 31x31 grid satisfies the lattice equation, trace integrals constant")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
