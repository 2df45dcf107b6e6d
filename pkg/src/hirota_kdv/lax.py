"""2x2 Lax matrices, monodromy, the dressing-chain correspondence and spectral integrals."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .dynamics import (
    ReductionSpec,
    State,
    dressing_shifts,
    eta_permute,
    kdv_next,
    kdv_step,
    residues,
    v_to_g,
)
from .errors import BadParams, BadParity
from .exact import Dual, RationalSampler, UniPoly, as_q, format_q, jacobian, rank_exact
from .poisson import (
    BracketSpec,
    Certificate,
    bracket_matrix,
    cd_from_a,
    involution_check,
    kdv2,
    kdv3,
    solve_u_coefficients,
)

LAMBDA = UniPoly.x()


def _poly(x) -> UniPoly:
    return x if isinstance(x, UniPoly) else UniPoly([x])


@dataclass
class PolyMat2:
    """2x2 matrix with polynomial entries in the spectral parameter."""

    a: UniPoly
    b: UniPoly
    c: UniPoly
    d: UniPoly

    @classmethod
    def of(cls, a, b, c, d) -> "PolyMat2":
        return cls(_poly(a), _poly(b), _poly(c), _poly(d))

    @classmethod
    def identity(cls) -> "PolyMat2":
        return cls.of(1, 0, 0, 1)

    def __mul__(self, o: "PolyMat2") -> "PolyMat2":
        return PolyMat2(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def __eq__(self, o) -> bool:
        return isinstance(o, PolyMat2) and self.entries() == o.entries()

    __hash__ = None  # type: ignore[assignment]

    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def trace(self) -> UniPoly:
        return self.a + self.d

    def det(self) -> UniPoly:
        return self.a * self.d - self.b * self.c

    def compose_neg(self) -> "PolyMat2":
        return PolyMat2(*(e.compose_neg() for e in self.entries()))

    def at(self, lam) -> list[list]:
        return [[self.a(lam), self.b(lam)], [self.c(lam), self.d(lam)]]


def product(mats: Sequence[PolyMat2]) -> PolyMat2:
    """Left-to-right product."""
    out = PolyMat2.identity()
    for m in mats:
        out = out * m
    return out


def lax_l(alpha, v, w) -> PolyMat2:
    return PolyMat2.of(v - alpha / w, LAMBDA, 1, 0)


def lax_m(alpha, v) -> PolyMat2:
    return PolyMat2.of(v, LAMBDA, 1, alpha / v)


def lax_tilde(g, upper: UniPoly) -> PolyMat2:
    """``[[g, upper], [1, 0]]``."""
    return PolyMat2.of(g, upper, 1, 0)


def _chain(N: int, M: int, i: int, r: list[int]) -> list[int]:
    """``r_i + N - M, r_i + N - 2M, .., r_{i+1}``."""
    return list(range(r[i] + N - M, r[i + 1] - 1, -M))


def monodromy_factors(spec: ReductionSpec, v: Sequence, m: int = 0) -> list[PolyMat2]:
    N, M, a = spec.N, spec.M, spec.alpha
    r = residues(N, M)
    out = []
    for i in range(M):
        out.append(lax_m(a, v[m + r[i] + N]))
        out += [lax_l(a, v[m + j], v[m + j + M]) for j in _chain(N, M, i, r)]
    return out


def monodromy_v(spec: ReductionSpec, v: Sequence, m: int = 0) -> PolyMat2:
    """Monodromy of the v-variables starting at phase ``m``; needs ``v[m .. m+N+M-1]``."""
    if len(v) < m + spec.K:
        raise BadParams(f"monodromy needs {m + spec.K} values, got {len(v)}")
    return product(monodromy_factors(spec, v, m))


def transfer_v(spec: ReductionSpec, v: Sequence, m: int = 0) -> PolyMat2:
    """``M_{m+N} L_{m+N-M} .. L_{m+r_1}``, the first block of the monodromy."""
    N, M, a = spec.N, spec.M, spec.alpha
    r = residues(N, M)
    mats = [lax_m(a, v[m + N])] + [lax_l(a, v[m + j], v[m + j + M]) for j in _chain(N, M, 0, r)]
    return product(mats)


def monodromy_g(spec: ReductionSpec, g: Sequence) -> PolyMat2:
    N, M, a = spec.N, spec.M, spec.alpha
    r = residues(N, M)
    shifted = LAMBDA - a
    mats = []
    for i in range(M):
        mats.append(lax_tilde(g[r[i] + N], shifted))
        mats += [lax_tilde(g[j], LAMBDA) for j in _chain(N, M, i, r)]
    return product(mats)


def dressing_monodromy(h: Sequence, b: Sequence) -> PolyMat2:
    """``K(lambda) = Lt(h_K, zeta_K) .. Lt(h_1, zeta_1)`` with ``zeta_i = b_i - lambda``."""
    if len(h) != len(b):
        raise BadParams("h and b must have the same length")
    mats = [lax_tilde(hi, UniPoly([bi]) - LAMBDA) for hi, bi in zip(h, b)]
    return product(mats[::-1])


def trace_formula_eval(h: Sequence, zeta: Sequence):
    """Trace of the dressing monodromy from the cyclic pair-contraction formula.

    Expanding the product of ``1 + zeta_{i+1} d^2/dh_i dh_{i+1}`` over the
    cyclic monomial sums over sets of disjoint cyclically adjacent pairs;
    each chosen pair ``(i, i+1)`` replaces ``h_i h_{i+1}`` by ``zeta_{i+1}``.
    """
    K = len(h)
    if len(zeta) != K or K < 2:
        raise BadParams("need matching h and zeta of length at least 2")

    def path(lo, hi):
        # matchings on the path h_lo .. h_hi (0-based, inclusive)
        nxt, cur = 1, h[hi] if hi >= lo else 1
        if hi < lo:
            return 1
        for i in range(hi - 1, lo - 1, -1):
            nxt, cur = cur, h[i] * cur + zeta[i + 1] * nxt
        return cur

    if K == 2:
        return h[0] * h[1] + zeta[1] + zeta[0]
    return path(0, K - 1) + zeta[0] * path(1, K - 2)


def trace_formula_bruteforce(h: Sequence, zeta: Sequence):
    """Same expansion by enumerating subsets of the K cyclic pairs."""
    K = len(h)
    total = 0
    for mask in range(1 << K):
        pairs = [i for i in range(K) if mask >> i & 1]
        used = [False] * K
        ok = True
        for i in pairs:
            j = (i + 1) % K
            if used[i] or used[j]:
                ok = False
                break
            used[i] = used[j] = True
        if not ok:
            continue
        term = 1
        for i in pairs:
            term = term * zeta[(i + 1) % K]
        for i in range(K):
            if not used[i]:
                term = term * h[i]
        total = total + term
    return total


# -- identities ------------------------------------------------------------------------


def _orbit(spec: ReductionSpec, v: Sequence, extra: int) -> list:
    vals = list(v)
    for _ in range(extra):
        vals.append(kdv_next(spec, vals[-spec.K:]))
    return vals


def _random_states(spec: ReductionSpec, samples: int, seed: int, probe: Callable[[list], object]) -> list[list[Fraction]]:
    rng = RationalSampler(seed)
    return [rng.regular_point(spec.K, probe) for _ in range(samples)]


def _cert(check: str, spec: ReductionSpec, seed: int, pts: list, witness, anchor: str) -> Certificate:
    notes = ["outside the two-bracket theorem hypotheses (M = 1)"] if spec.M == 1 else []
    return Certificate(check, "LAX", spec.N, spec.M, seed, len(pts), "fail" if witness else "pass", witness, anchor, notes)


def _wit(x) -> list[str]:
    return [format_q(as_q(t)) for t in x]


def zero_curvature_check(spec: ReductionSpec, samples: int = 5, seed: int = 0) -> Certificate:
    """``L(v_m, v_{m+M}) M(v_{m+N}) == M(v_{m+N+M}) L(v_{m+N}, v_{m+N+M})`` along an orbit."""
    N, M, K, a = spec.N, spec.M, spec.K, spec.alpha
    steps = K

    pts = _random_states(spec, samples, seed, lambda x: _orbit(spec, x, steps))
    witness = None
    for x in pts:
        v = _orbit(spec, x, steps)
        for m in range(steps):
            lhs = lax_l(a, v[m], v[m + M]) * lax_m(a, v[m + N])
            rhs = lax_m(a, v[m + N + M]) * lax_l(a, v[m + N], v[m + N + M])
            if lhs != rhs:
                witness = {"point": _wit(x), "m": m}
                break
        if witness:
            break
    return _cert("zero_curvature", spec, seed, pts, witness, "reduced zero-curvature representation")


def lax_equation_check(spec: ReductionSpec, samples: int = 5, seed: int = 0, shift: int | None = None) -> Certificate:
    """``Mon_m T_m == T_m Mon_{m+s}`` with ``T_m`` the first transfer block.

    The default shift ``s`` is ``N mod M``; this is 1 exactly when
    ``N = 1 mod M``.  Other shifts can be passed to test alternative forms.
    """
    if spec.M == 1:
        raise BadParams("the discrete Lax equation is stated for M > 1")
    s = spec.N % spec.M if shift is None else shift
    steps = 3
    pts = _random_states(spec, samples, seed, lambda x: _orbit(spec, x, steps + s))
    witness = None
    for x in pts:
        v = _orbit(spec, x, steps + s)
        for m in range(steps):
            T = transfer_v(spec, v, m)
            if monodromy_v(spec, v, m) * T != T * monodromy_v(spec, v, m + s):
                witness = {"point": _wit(x), "m": m}
                break
        if witness:
            break
    cert = _cert("lax_equation", spec, seed, pts, witness, "discrete Lax equation for the monodromy")
    cert.notes.append(f"shift {s}")
    return cert


def dressing_data(spec: ReductionSpec, v: Sequence) -> tuple[list, list]:
    """Dressing variables ``h`` and parameters ``b`` for a v-state."""
    g = State("g", v_to_g(spec, list(v)), 0)
    return list(eta_permute(spec, g).values), dressing_shifts(spec)


def dressing_match_check(spec: ReductionSpec, samples: int = 5, seed: int = 0) -> Certificate:
    """``Mon(lambda)`` in v and in g equals ``K(-lambda)`` of the dressing chain."""
    pts = _random_states(spec, samples, seed, lambda x: v_to_g(spec, x))
    witness = None
    for x in pts:
        mv = monodromy_v(spec, x)
        g = v_to_g(spec, x)
        h, b = dressing_data(spec, x)
        if mv != monodromy_g(spec, g):
            witness = {"point": _wit(x), "stage": "g"}
        elif mv != dressing_monodromy(h, b).compose_neg():
            witness = {"point": _wit(x), "stage": "dressing"}
        if witness:
            break
    return _cert("dressing_match", spec, seed, pts, witness, "monodromy equals dressing monodromy at -lambda")


# -- structure and integrals -------------------------------------------------------------


def genus(spec: ReductionSpec) -> int:
    if not spec.odd:
        raise BadParity("the hyperelliptic genus formula is for N+M odd")
    return (spec.K - 1) // 2


def trace_degree(spec: ReductionSpec) -> int:
    return spec.K // 2


def structure_conditions(spec: ReductionSpec, v: Sequence) -> dict[str, bool]:
    """Degree and monic conditions on the entries ``[[P, Q], [R, S]]`` (odd case)."""
    gb = genus(spec)
    mon = monodromy_v(spec, v)
    P, Q, R, S = mon.entries()
    qs, q0 = Q.divmod_x()
    ss, s0 = S.divmod_x()
    return {
        "deg P": P.degree == gb,
        "Q divisible by lambda": q0 == 0,
        "Q* monic of degree g": qs.degree == gb and qs.leading() == 1,
        "R monic of degree g": R.degree == gb and R.leading() == 1,
        "S divisible by lambda": s0 == 0,
        "deg S*": ss.degree == gb - 1,
    }


def structure_check(spec: ReductionSpec, samples: int = 5, seed: int = 0) -> Certificate:
    pts = _random_states(spec, samples, seed, lambda x: monodromy_v(spec, x))
    witness = None
    for x in pts:
        bad = [k for k, ok in structure_conditions(spec, x).items() if not ok]
        if bad:
            witness = {"point": _wit(x), "conditions": bad}
            break
    return _cert("structure", spec, seed, pts, witness, "degree structure of the monodromy entries")


def trace_coefficients(spec: ReductionSpec, v: Sequence) -> list:
    """Coefficients of ``tr Mon(lambda)``, lowest first, padded to the trace degree."""
    t = monodromy_v(spec, v).trace()
    return [t.coeff(k) for k in range(trace_degree(spec) + 1)]


def det_coefficients(spec: ReductionSpec, v: Sequence) -> list:
    d = monodromy_v(spec, v).det()
    return [d.coeff(k) for k in range(spec.K + 1)]


def integrals(spec: ReductionSpec) -> Callable[[list], list]:
    """Jet program of the nonconstant trace coefficients.

    In the odd case the leading coefficient (a Casimir) is kept; in the even
    case it is the constant 2 and is dropped.
    """
    top = trace_degree(spec)
    keep = top + 1 if spec.odd else top
    return lambda v: trace_coefficients(spec, v)[:keep]


def liouville_threshold(spec: ReductionSpec) -> int:
    return (spec.K - 1) // 2 + 1


@dataclass
class LiouvilleAccount:
    N: int
    M: int
    integrals: int
    independent: int
    threshold: int
    outside_main_hypotheses: bool

    @property
    def meets_threshold(self) -> bool:
        return self.independent >= self.threshold


def liouville_account(spec: ReductionSpec, seed: int = 0) -> LiouvilleAccount:
    if not spec.odd:
        raise BadParity("the Liouville count here is for N+M odd")
    f = integrals(spec)
    x = RationalSampler(seed).regular_point(spec.K, f)
    _, rows = jacobian(f, x)
    return LiouvilleAccount(spec.N, spec.M, len(rows), rank_exact(rows), liouville_threshold(spec), spec.M == 1)


def spectral_invariance_check(spec: ReductionSpec, steps: int = 10, samples: int = 1, seed: int = 0) -> Certificate:
    """All trace and determinant coefficients are constant along kdv_step."""
    pts = _random_states(spec, samples, seed, lambda x: _orbit(spec, x, steps))
    witness = None
    for x in pts:
        s = State("v", x)
        tr0, det0 = trace_coefficients(spec, x), det_coefficients(spec, x)
        for k in range(steps):
            s = kdv_step(spec, s)
            if trace_coefficients(spec, s.values) != tr0 or det_coefficients(spec, s.values) != det0:
                witness = {"point": _wit(x), "step": k + 1}
                break
        if witness:
            break
    return _cert("spectral_invariance", spec, seed, pts, witness, "preserved spectral curve")


def lifted_kdv2(spec: ReductionSpec) -> BracketSpec:
    """The second bracket with the coefficients lifted from the U-bracket."""
    _, d = cd_from_a(spec.N, spec.M, solve_u_coefficients(spec.N, spec.M))
    return kdv2(spec, d)


def kernel_relation_check(
    spec: ReductionSpec, second: BracketSpec | None = None, samples: int = 3, seed: int = 0
) -> Certificate:
    """``(P2 + (lambda/alpha) P3) d tr Mon(lambda) = 0`` at sampled points and spectral values."""
    second = second or kdv2(spec)
    third = kdv3(spec)
    rng = RationalSampler(seed + 1)
    pts = _random_states(spec, samples, seed, lambda x: bracket_matrix(second, x))
    witness = None
    for x in pts:
        P2 = bracket_matrix(second, x).entries
        P3 = bracket_matrix(third, x).entries
        for _ in range(2):
            lam = rng.scalar()
            _, rows = jacobian(lambda z: [monodromy_v(spec, z).trace()(lam)], x)
            grad = rows[0]
            w = lam / spec.alpha
            for i in range(spec.K):
                val = sum(((P2[i][j] + w * P3[i][j]) * grad[j] for j in range(spec.K)), Fraction(0))
                if val != 0:
                    witness = {"point": _wit(x), "lambda": format_q(lam), "row": i}
                    break
            if witness:
                break
        if witness:
            break
    cert = _cert("kernel_relation", spec, seed, pts, witness, "trace gradient in the pencil kernel")
    cert.family = f"{second.family}+lambda/alpha*KDV3"
    return cert


def trace_involution_check(spec: ReductionSpec, bracket: BracketSpec, samples: int = 3, seed: int = 0) -> Certificate:
    return involution_check(integrals(spec), bracket, samples, seed, name="trace integrals")


# -- quadratic algebra of the monodromy entries ---------------------------------------------


def _entry_programs(spec: ReductionSpec):
    gb = genus(spec)
    degs = {"P": gb, "Q*": gb, "R": gb, "S*": gb - 1}

    def prog(v):
        P, Q, R, S = monodromy_v(spec, v).entries()
        qs, _ = Q.divmod_x()
        ss, _ = S.divmod_x()
        polys = {"P": P, "Q*": qs, "R": R, "S*": ss}
        return [polys[k].coeff(i) for k in degs for i in range(degs[k] + 1)]

    return degs, prog


def _bivariate(x: dict, y: dict) -> dict:
    out: dict = {}
    for (i, j), c in x.items():
        out[(i, j)] = out.get((i, j), 0) + c
    for (i, j), c in y.items():
        out[(i, j)] = out.get((i, j), 0) + c
    return {k: c for k, c in out.items() if c != 0}


def _outer(p: Sequence, q: Sequence, sign=1) -> dict:
    return {(i, j): sign * a * b for i, a in enumerate(p) for j, b in enumerate(q) if a * b != 0}


def _times_diff(f: dict) -> dict:
    """``(lambda - nu) f(lambda, nu)``."""
    out: dict = {}
    for (i, j), c in f.items():
        out[(i + 1, j)] = out.get((i + 1, j), 0) + c
        out[(i, j + 1)] = out.get((i, j + 1), 0) - c
    return {k: c for k, c in out.items() if c != 0}


def _times_lambda(f: dict) -> dict:
    return {(i + 1, j): c for (i, j), c in f.items()}


def _times_nu(f: dict) -> dict:
    return {(i, j + 1): c for (i, j), c in f.items()}


def _antisym(x: Sequence, y: Sequence, sign=1) -> dict:
    """``sign * (x(lambda) y(nu) - x(nu) y(lambda))``."""
    return _bivariate(_outer(x, y, sign), _outer(y, x, -sign))


def quadratic_relations(spec: ReductionSpec, x: Sequence, bracket: BracketSpec | None = None) -> dict[str, bool]:
    """Each quadratic relation among ``P, Q*, R, S*`` at one sampled point.

    Keys name the bracketed pair, with ``/nu`` or ``/lambda`` marking a
    divided entry. Every relation is compared after multiplying through by
    ``lambda - nu`` and the divided variable.
    """
    bracket = bracket or kdv2(spec)
    degs, prog = _entry_programs(spec)
    vals, rows = jacobian(prog, x)
    Pm = bracket_matrix(bracket, x).entries
    n = spec.K
    names, offsets, k = list(degs), {}, 0
    for name in names:
        offsets[name] = (k, k + degs[name] + 1)
        k += degs[name] + 1

    def coeffs(name):
        lo, hi = offsets[name]
        return vals[lo:hi]

    def grads(name):
        lo, hi = offsets[name]
        return rows[lo:hi]

    def br(A, B) -> dict:
        gA, gB = grads(A), grads(B)
        out = {}
        for i, ga in enumerate(gA):
            pa = [sum((ga[l] * Pm[l][j] for l in range(n)), Fraction(0)) for j in range(n)]
            for j, gb in enumerate(gB):
                val = sum((pa[t] * gb[t] for t in range(n)), Fraction(0))
                if val != 0:
                    out[(i, j)] = val
        return out

    P, Qs, R, Ss = coeffs("P"), coeffs("Q*"), coeffs("R"), coeffs("S*")
    S = [Fraction(0)] + list(Ss)
    return {
        "R,S*": _times_diff(br("R", "S*")) == _antisym(R, S),
        "Q*,P/nu": _times_diff(br("Q*", "P")) == _times_nu(_antisym(Qs, P)),
        "Q*,S*": _times_diff(br("Q*", "S*")) == _antisym(Qs, S, -1),
        "R,P/nu": _times_diff(br("R", "P")) == _times_nu(_antisym(R, P, -1)),
        "Q*,R": _times_diff(br("Q*", "R")) == _antisym(S, P),
        "P/lambda,S*": _times_diff(br("P", "S*")) == _times_lambda(_antisym(Qs, R, -1)),
        "P,P": not br("P", "P"),
        "Q*,Q*": not br("Q*", "Q*"),
        "R,R": not br("R", "R"),
        "S*,S*": not br("S*", "S*"),
    }


def quadratic_algebra_check(
    spec: ReductionSpec, samples: int = 3, seed: int = 0, bracket: BracketSpec | None = None
) -> Certificate:
    """All ten relations as polynomial identities in ``(lambda, nu)`` at sampled states."""
    bracket = bracket or kdv2(spec)
    _, prog = _entry_programs(spec)
    pts = _random_states(spec, samples, seed, lambda z: (prog(z), bracket_matrix(bracket, z)))
    witness = None
    for x in pts:
        bad = [k for k, ok in quadratic_relations(spec, x, bracket).items() if not ok]
        if bad:
            witness = {"point": _wit(x), "relations": bad}
            break
    cert = _cert("quadratic_algebra", spec, seed, pts, witness, "quadratic algebra of the monodromy entries")
    cert.family = bracket.family
    return cert


# -- JSON ---------------------------------------------------------------------------------


def _poly_strings(p: UniPoly) -> list[str]:
    return [format_q(as_q(c)) for c in p.coeffs]


def monodromy_json(spec: ReductionSpec, v: Sequence) -> str:
    mon = monodromy_v(spec, v)
    return json.dumps(
        {
            "trace": _poly_strings(mon.trace()),
            "det": _poly_strings(mon.det()),
            "P": _poly_strings(mon.a),
            "Q": _poly_strings(mon.b),
            "R": _poly_strings(mon.c),
            "S": _poly_strings(mon.d),
        }
    )


# -- the (5,3) w-space integrals -------------------------------------------------------


def section_v(w: Sequence) -> list:
    """A v-preimage of w under ``w_j = v_j v_{j+1}`` with ``v_0 = 1``."""
    v = [Fraction(1) if not isinstance(w[0], Dual) else Dual.constant(1, len(w[0].partials))]
    for wj in w:
        v.append(wj / v[-1])
    return v


def w_integrals(spec: ReductionSpec) -> Callable[[list], list]:
    """``I~_k(w)``: trace coefficients below the leading 2, through the v-section."""
    if spec.odd:
        raise BadParity("w-space integrals are for N+M even")
    f = integrals(spec)
    return lambda w: f(section_v(w))


def casimir_one(alpha, w: Sequence):
    return (
        (alpha * w[1] * w[3] + w[0] * w[2] * w[4])
        * (alpha * w[2] * w[4] + w[1] * w[3] * w[5])
        * (alpha * w[3] * w[5] + w[2] * w[4] * w[6])
        / (w[1] * w[2] * w[3] * w[4] * w[5])
    )


def casimir_two(alpha, w: Sequence):
    out = 1 / w[3]
    for i in range(5):
        out = out * (alpha - w[i] * w[i + 2] / w[i + 1])
    return out
