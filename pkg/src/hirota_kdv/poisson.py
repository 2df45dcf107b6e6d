"""Poisson brackets of the U-systems and the KdV reduction, and exact checks.

Brackets are described by a :class:`BracketSpec`, whose ``entry(i, j, x)``
returns ``{x_i, x_j}`` for ``i < j`` using only field operations, so the same
code evaluates on rationals and on :class:`~hirota_kdv.exact.Dual` jets.

Checks (Jacobi, Poisson map, Casimir, involution) are exact equalities at
seeded random rational points and return a :class:`Certificate`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import kernels
from .dynamics import ReductionSpec, State, kdv_next, project, u_next, variant_for
from .errors import BadParams, BadParity, DimensionFailure, SingularPoint
from .exact import (
    Dual,
    RationalSampler,
    as_q,
    format_q,
    integer_kernel,
    jacobian,
    matmul,
    rank_exact,
    value_of,
)
from .quiver import check_params

# -- U-system coefficients -------------------------------------------------------


@dataclass(frozen=True)
class UCoefficients:
    """``a_1 .. a_n`` of the log-canonical U-bracket, extended by ``a_0 = 0``, ``a_{-k} = -a_k``."""

    N: int
    M: int
    values: tuple
    route: str = "relations"

    @property
    def parity(self) -> str:
        return "odd" if (self.N + self.M) % 2 else "even"

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k: int):
        if k == 0:
            return Fraction(0)
        if k < 0:
            return -self[-k]
        if k > len(self.values):
            raise IndexError(f"a_{k} is outside 1..{len(self.values)}")
        return self.values[k - 1]

    def odd_part(self) -> tuple:
        return tuple(self.values[k - 1] for k in range(1, len(self.values) + 1, 2))

    def even_part(self) -> tuple:
        return tuple(self.values[k - 1] for k in range(2, len(self.values) + 1, 2))


def _window(n: int, lo: int, hi: int) -> list[int]:
    row = [0] * n
    for i in range(lo, hi + 1):
        row[i - 1] += 1
    return row


def _relation(n: int, terms) -> list[int]:
    """Row of ``sum s * a_k`` with ``a_0 = 0`` and ``a_{-k} = -a_k``."""
    row = [0] * n
    for k, s in terms:
        if k == 0:
            continue
        if k < 0:
            k, s = -k, -s
        if k > n:
            raise IndexError(f"relation refers to a_{k}, outside 1..{n}")
        row[k - 1] += s
    return row


def u_constraint_rows(N: int, M: int) -> list[list[int]]:
    """Homogeneous linear constraints on the U-bracket coefficients."""
    check_params(N, M)
    K = N + M
    if K % 2:
        n = K - 2
        rows = [_window(n, j, K - j) for j in range(2, (K - 1) // 2 + 1)]
        rows += [_window(n, j, N - M + j - 1) for j in range(1, M)]
        rows += [_window(n, j, N - M - j) for j in range(1, (N - M - 1) // 2 + 1)]
        return rows
    n = K - 3
    rows = [_relation(n, [(k, 1), (K - k, 1)]) for k in range(3, K // 2 + 1)]
    rows += [_relation(n, [(k, 1), (N - M + k, -1)]) for k in range(0, M - 2)]
    rows += [_relation(n, [(k, 1), (2 * M + k, -1)]) for k in range(1, (N - M) // 2)]
    rows.append(_relation(n, [((N - M) // 2, 1)]))
    rows += [_relation(n, [(k, 1)]) for k in range(2, n + 1, 2)]
    return [r for r in rows if any(r)]


def u_unknowns(N: int, M: int) -> int:
    """Number of coefficients ``a_1 .. a_n`` for the U-system of (N, M)."""
    K = N + M
    return K - 2 if K % 2 else K - 3


def preservation_rows(N: int, M: int, samples: int = 4, seed: int = 0) -> list[list[Fraction]]:
    """Constraints on ``a`` from requiring the U-map to preserve the bracket.

    Built directly from the first U-system with generic periodic coefficients:
    ``DF P(x) DF^T = P(F(x))`` is linear in ``a`` at every sample point.
    """
    check_params(N, M)
    rng = RationalSampler(seed)
    spec = ReductionSpec(N, M, rng.scalar(), tuple(rng.point(M)), tuple(rng.point(N)))
    variant = variant_for(spec, 1)
    n = u_unknowns(N, M)
    dim = n + 1

    def step(u):
        return list(u[1:]) + [u_next(spec, variant, u, 0)]

    rows = []
    for x in [rng.regular_point(dim, step) for _ in range(samples)]:
        y, J = jacobian(step, x)
        for p in range(dim):
            for q in range(p + 1, dim):
                row = [Fraction(0)] * n
                for i in range(dim):
                    for j in range(dim):
                        if i != j:
                            t, sgn = (j - i, 1) if j > i else (i - j, -1)
                            row[t - 1] += sgn * J[p][i] * J[q][j] * x[i] * x[j]
                row[q - p - 1] -= y[p] * y[q]
                rows.append(row)
    return rows


def _normalised(N: int, M: int, kern, route: str) -> UCoefficients:
    if len(kern) != 1:
        raise DimensionFailure(f"constraint nullspace for ({N}, {M}) has dimension {len(kern)}")
    vec = kern[0]
    lead = next(x for x in vec if x)
    return UCoefficients(N, M, tuple(Fraction(x, lead) for x in vec), route)


def _nullspace(rows, n: int) -> list[list[int]]:
    # no equations at all leaves every coefficient free
    return integer_kernel(rows) if rows else [[int(i == j) for i in range(n)] for j in range(n)]


def solve_u_coefficients(N: int, M: int) -> UCoefficients:
    """The unique (up to scale) solution, lowest nonzero entry normalised to +1.

    Uses the simplified index relations.  For N+M even and M = 1 those
    relations are inconsistent with the map itself (relation III ties a_1 to a
    vanishing coefficient), so the constraints are rebuilt from
    :func:`preservation_rows` and the result carries ``route="preservation"``.
    """
    n = u_unknowns(N, M)
    kern = _nullspace(u_constraint_rows(N, M), n)
    if len(kern) == 0 and M == 1 and (N + M) % 2 == 0:
        return _normalised(N, M, _nullspace(preservation_rows(N, M), n), "preservation")
    return _normalised(N, M, kern, "relations")


def kdv_coefficients(N: int, M: int) -> tuple:
    """``(c_0, c_1, .., c_{N+M-1})`` with ``c_k = (-1)^{k M^{-1} mod (N+M)}`` and ``c_0 = 0``."""
    check_params(N, M)
    K = N + M
    if K % 2 == 0:
        raise BadParity("the KdV-bracket coefficients need N+M odd")
    inv = pow(M, -1, K)
    return (Fraction(0),) + tuple(Fraction((-1) ** ((k * inv) % K)) for k in range(1, K))


def cd_from_a(N: int, M: int, a: UCoefficients) -> tuple[tuple, tuple]:
    """Coefficients of the lifted v-brackets from the U-bracket coefficients.

    Both returned tuples are indexed from 0 (entry 0 is 0).
    """
    K = N + M
    if K % 2 == 0:
        raise BadParity("lifting to v-brackets needs N+M odd")

    def block(width, lo, hi):
        return sum((a[j - i] for i in range(width) for j in range(lo, hi + 1)), Fraction(0))

    c = [Fraction(0)] * K
    d = [Fraction(0)] * K
    for m in range(1, K):
        c[m] = block(M, m, m + M - 1) if m <= N - 1 else -block(M, m - N, m - 1)
        d[m] = block(N, m, m + N - 1) if m <= M - 1 else -block(N, m - M, m - 1)
    return tuple(c), tuple(d)


def _signed(coeffs: Sequence, k: int):
    if k == 0:
        return None
    return coeffs[k] if k > 0 else -coeffs[-k]


def coefficient_relations_hold(N: int, M: int, coeffs: Sequence) -> bool:
    """``c_m = -c_{N+M-m} = -c_{m-N} = -c_{m-M}``, ignoring terms with index 0."""
    K = N + M
    for m in range(1, K):
        cm = coeffs[m]
        for k in (K - m, m - N, m - M):
            other = _signed(coeffs, k)
            if other is not None and cm != -other:
                return False
    return True


def proportionality(x: Sequence, y: Sequence) -> Fraction | None:
    """``kappa`` with ``x = kappa * y`` entrywise, or None."""
    kappa = None
    for a, b in zip(x, y, strict=True):
        if b == 0:
            if a != 0:
                return None
            continue
        r = Fraction(a) / b
        if kappa is None:
            kappa = r
        elif r != kappa:
            return None
    return kappa


def toeplitz(a: UCoefficients) -> list[list[Fraction]]:
    """``A_ij = a_{j-i}`` on the u-coordinates."""
    n = len(a) + 1
    return [[a[j - i] for j in range(n)] for i in range(n)]


def toeplitz_inverse_scale(a: UCoefficients, reduced_rows: Sequence[Sequence[int]]) -> Fraction | None:
    """``kappa`` with ``A Bh = kappa I``, or None if the product is not scalar."""
    A = toeplitz(a)
    if len(A) != len(reduced_rows):
        raise BadParams(f"Toeplitz matrix has size {len(A)}, reduced matrix {len(reduced_rows)}")
    prod = matmul(A, [list(r) for r in reduced_rows])
    kappa = prod[0][0]
    n = len(prod)
    if kappa == 0 or any(prod[i][j] != (kappa if i == j else 0) for i in range(n) for j in range(n)):
        return None
    return kappa


def index_tableau(N: int, M: int) -> str:
    """Diagnostic table pairing ``k = 2 M r mod (N+M)`` with ``k' = 2 M (N+M-r)``.

    Vertical annotations mark the shift relations ``a_k = a_{k+N-M}`` (II) for
    ``k`` in ``[1, M-2]`` and ``a_k = a_{k+2M}`` (III) for ``k`` in ``[0, N-M-2]``.
    """
    K = N + M
    if K % 2 == 0:
        raise BadParity("the tableau printer covers the odd case")
    rows = [(r, (2 * M * r) % K, K - r, (2 * M * (K - r)) % K) for r in range(1, (K - 1) // 2 + 1)]

    def mark(k, below):
        if below - k == N - M and 1 <= k <= M - 2:
            return "II"
        if k - below == N - M and 1 <= below <= M - 2:
            return "II^-1"
        if below - k == 2 * M and 0 <= k <= N - M - 2:
            return "III"
        if k - below == 2 * M and 0 <= below <= N - M - 2:
            return "III^-1"
        return ""

    def label(k):
        return f"({k})" if k == K - 1 else str(k)

    lines = [f"{'':>6} {'r':>3} {'k':>5} || {'r':>3} {'k':>5} {'':<6}"]
    for idx, (r1, k1, r2, k2) in enumerate(rows):
        left = right = ""
        if idx + 1 < len(rows):
            left = mark(k1, rows[idx + 1][1])
            right = mark(k2, rows[idx + 1][3])
        lines.append(f"{left:>6} {r1:>3} {label(k1):>5} || {r2:>3} {label(k2):>5} {right:<6}")
    return "\n".join(lines)


# -- bracket families --------------------------------------------------------------

FAMILIES = ("U_LOG", "KDV1", "KDV2", "KDV3", "G3", "DRESSING", "W1_53", "W2_53", "W3_53", "PENCIL")


@dataclass(frozen=True)
class BracketSpec:
    """A bracket family on ``dim`` coordinates.

    ``coeffs`` holds the index-difference coefficients (entry 0 unused) for
    U_LOG, KDV1 and KDV2; ``parts`` holds ``(weight, BracketSpec)`` pairs for
    PENCIL.
    """

    family: str
    N: int
    M: int
    alpha: Fraction = Fraction(1)
    coeffs: tuple | None = None
    parts: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise BadParams(f"unknown bracket family {self.family!r}")
        object.__setattr__(self, "alpha", as_q(self.alpha))

    @property
    def dim(self) -> int:
        K = self.N + self.M
        if self.family == "U_LOG":
            return K - 1 if K % 2 else K - 2
        if self.family in ("W1_53", "W2_53", "W3_53"):
            return 7
        if self.family == "PENCIL":
            return self.parts[0][1].dim
        return K

    @property
    def outside_main_hypotheses(self) -> bool:
        """True for M = 1, where the two-bracket theorem is not claimed."""
        return self.M == 1 and self.family in ("KDV1", "KDV2", "KDV3")

    def entry(self, i: int, j: int, x: Sequence):
        """``{x_i, x_j}`` for ``i < j``."""
        t = j - i
        N, M, a, f = self.N, self.M, self.alpha, self.family
        if f == "U_LOG":
            return self.coeffs[t] * x[i] * x[j]
        if f == "KDV1":
            c = self.coeffs
            out = c[t] * x[i] * x[j]
            return out + c[N] * a if t == N else out
        if f == "KDV2":
            d = self.coeffs
            out = d[t] * x[i] * x[j]
            return out + d[M] * _kdv_tail(a, t, M, i, x) if t % M == 0 else out
        if f == "KDV3":
            out = 0
            if t % M == 0:
                out = _kdv_tail(a, t, M, i, x)
            if t == N:
                out = out + a
            return out
        if f == "G3":
            return (-a if t == M else 0) + (a if t == N else 0)
        if f == "DRESSING":
            K = N + M
            return (-1 if t == 1 else 0) + (1 if t == K - 1 else 0)
        if f == "W1_53":
            return _w53(1, t, x, i, a)
        if f == "W2_53":
            return _w53(2, t, x, i, a)
        if f == "W3_53":
            return _w53(1, t, x, i, a) - _w53(2, t, x, i, a)
        total = 0
        for weight, part in self.parts:
            total = total + weight * part.entry(i, j, x)
        return total

    def to_dict(self) -> dict:
        d = {"family": self.family, "N": self.N, "M": self.M, "alpha": format_q(self.alpha)}
        if self.coeffs is not None:
            d["coeffs"] = [format_q(c) for c in self.coeffs]
        if self.parts:
            d["parts"] = [[format_q(w), p.to_dict()] for w, p in self.parts]
        return d


def _kdv_tail(alpha, t, M, i, x):
    """``(-alpha)^k / prod_{l=1}^{k-1} x_{i+lM}^2`` for ``t = kM``."""
    k = t // M
    den = 1
    for l in range(1, k):
        den = den * x[i + l * M] * x[i + l * M]
    return (-alpha) ** k / den


def _w53(which: int, t: int, w: Sequence, i: int, a):
    if which == 1:
        if t == 1:
            return w[i] * w[i + 1]
        if t == 2:
            return 2 * w[i] * w[i + 2]
        if t == 3:
            return 2 * w[i] * w[i + 3]
        if t == 4:
            return -a * w[i + 1] * w[i + 3] / w[i + 2]
        if t == 5:
            return -2 * w[i] * w[i + 5] - a * (
                w[i] * w[i + 2] * w[i + 4] / (w[i + 1] * w[i + 3])
                + w[i + 1] * w[i + 3] * w[i + 5] / (w[i + 2] * w[i + 4])
            )
        return -2 * w[i] * w[i + 6] - a * w[i] * w[i + 2] * w[i + 4] * w[i + 6] / (w[i + 1] * w[i + 3] * w[i + 5])
    if t == 1:
        return w[i] * w[i + 1]
    if t == 2:
        return -a * w[i + 1] + 2 * w[i] * w[i + 2]
    if t == 3:
        return 2 * w[i] * w[i + 3] - a * (w[i] * w[i + 2] / w[i + 1] + w[i + 1] * w[i + 3] / w[i + 2])
    if t == 4:
        return -a * w[i] * w[i + 2] * w[i + 4] / (w[i + 1] * w[i + 3])
    if t == 5:
        return -2 * w[i] * w[i + 5] + a * a * w[i + 1] * w[i + 4] / (w[i + 2] * w[i + 3])
    return -2 * w[i] * w[i + 6] + a * a * (
        w[i] * w[i + 2] * w[i + 5] / (w[i + 1] * w[i + 3] * w[i + 4])
        + w[i + 1] * w[i + 4] * w[i + 6] / (w[i + 2] * w[i + 3] * w[i + 5])
    )


def _spec_params(spec) -> tuple[int, int, Fraction]:
    if isinstance(spec, ReductionSpec):
        return spec.N, spec.M, spec.alpha
    N, M, alpha = spec
    return N, M, as_q(alpha)


def u_log(N: int, M: int, a: UCoefficients | None = None) -> BracketSpec:
    a = a or solve_u_coefficients(N, M)
    return BracketSpec("U_LOG", N, M, Fraction(0), (Fraction(0),) + tuple(a.values))


def kdv1(spec, c: Sequence | None = None) -> BracketSpec:
    N, M, alpha = _spec_params(spec)
    return BracketSpec("KDV1", N, M, alpha, tuple(c) if c is not None else kdv_coefficients(N, M))


def kdv2(spec, d: Sequence | None = None) -> BracketSpec:
    N, M, alpha = _spec_params(spec)
    return BracketSpec("KDV2", N, M, alpha, tuple(d) if d is not None else kdv_coefficients(N, M))


def kdv3(spec) -> BracketSpec:
    N, M, alpha = _spec_params(spec)
    return BracketSpec("KDV3", N, M, alpha)


def g3(spec) -> BracketSpec:
    N, M, alpha = _spec_params(spec)
    return BracketSpec("G3", N, M, alpha)


def dressing(spec) -> BracketSpec:
    N, M, alpha = _spec_params(spec)
    return BracketSpec("DRESSING", N, M, alpha)


def w53(which: int, alpha) -> BracketSpec:
    return BracketSpec({1: "W1_53", 2: "W2_53", 3: "W3_53"}[which], 5, 3, as_q(alpha))


def pencil(s1: BracketSpec, s2: BracketSpec, l1, l2) -> BracketSpec:
    if s1.dim != s2.dim:
        raise BadParams("pencil members act on different dimensions")
    return BracketSpec("PENCIL", s1.N, s1.M, s1.alpha, None, ((as_q(l1), s1), (as_q(l2), s2)))


def scaled(s: BracketSpec, weight) -> BracketSpec:
    return BracketSpec("PENCIL", s.N, s.M, s.alpha, None, ((as_q(weight), s),))


# -- evaluation ------------------------------------------------------------------------


@dataclass(frozen=True)
class BracketMatrixAt:
    point: tuple
    entries: list

    def rank(self) -> int:
        return rank_exact(self.entries)


def bracket_matrix(spec: BracketSpec, point: Sequence) -> BracketMatrixAt:
    n = spec.dim
    if len(point) != n:
        raise BadParams(f"{spec.family} acts on {n} coordinates, got {len(point)}")
    x = [as_q(p) if not isinstance(p, Dual) else p for p in point]
    P = [[Fraction(0)] * n for _ in range(n)]
    try:
        for i in range(n):
            for j in range(i + 1, n):
                e = spec.entry(i, j, x)
                P[i][j] = e
                P[j][i] = -e
    except ZeroDivisionError as exc:
        raise SingularPoint(f"{spec.family} singular at the point") from exc
    return BracketMatrixAt(tuple(x), P)


def bracket_rank(spec: BracketSpec, point: Sequence) -> int:
    return bracket_matrix(spec, point).rank()


def _bracket_jets(spec: BracketSpec, point: Sequence):
    """Values ``P`` and partials ``G[j][k][l] = d P_jk / d x_l``."""
    n = spec.dim
    seeds = [Dual.variable(p, i, n) for i, p in enumerate(point)]
    zero = (Fraction(0),) * n
    P = [[Fraction(0)] * n for _ in range(n)]
    G = [[zero] * n for _ in range(n)]
    try:
        for i in range(n):
            for j in range(i + 1, n):
                e = spec.entry(i, j, seeds)
                if isinstance(e, Dual):
                    v, g = e.value, e.partials
                else:
                    v, g = as_q(e), zero
                P[i][j], P[j][i] = v, -v
                G[i][j] = g
                G[j][i] = tuple(-y for y in g)
    except ZeroDivisionError as exc:
        raise SingularPoint(f"{spec.family} singular at the point") from exc
    return P, G


def _lcm_den(xs) -> int:
    den = 1
    for x in xs:
        d = Fraction(x).denominator
        den = den * d // math.gcd(den, d)
    return den


def _scale_int(rows, den):
    return [[int(Fraction(x) * den) for x in r] for r in rows]


def jacobi_violations_at(spec: BracketSpec, point: Sequence) -> list[tuple[int, int, int]]:
    P, G = _bracket_jets(spec, point)
    n = len(P)
    d1 = _lcm_den(x for r in P for x in r)
    d2 = _lcm_den(x for r in G for g in r for x in g)
    Pi = _scale_int(P, d1)
    Gi = [[[int(Fraction(x) * d2) for x in g] for g in r] for r in G]
    del n
    return kernels.jacobi_violations(Pi, Gi)


@dataclass
class Certificate:
    check: str
    family: str
    N: int
    M: int
    seed: int
    points: int
    result: str
    witness: object = None
    anchor: str = ""
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.result == "pass"

    def to_dict(self) -> dict:
        d = {
            "check": self.check,
            "family": self.family,
            "N": self.N,
            "M": self.M,
            "seed": self.seed,
            "points": self.points,
            "result": self.result,
            "witness": self.witness,
        }
        if self.anchor:
            d["anchor"] = self.anchor
        if self.notes:
            d["notes"] = list(self.notes)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


ANCHORS = {
    "U_LOG": "u-system log-canonical bracket",
    "KDV1": "kdv reduction first bracket",
    "KDV2": "kdv reduction second bracket",
    "KDV3": "kdv reduction difference bracket",
    "G3": "g-coordinate constant bracket",
    "DRESSING": "dressing chain bracket",
    "W1_53": "(5,3) w-space first bracket",
    "W2_53": "(5,3) w-space second bracket",
    "W3_53": "(5,3) w-space difference bracket",
    "PENCIL": "bracket pencil compatibility",
}


def _family_label(spec: BracketSpec) -> str:
    if spec.family == "PENCIL":
        return "PENCIL(" + ",".join(p.family for _, p in spec.parts) + ")"
    return spec.family


def _notes(spec: BracketSpec) -> list[str]:
    return ["outside the two-bracket theorem hypotheses (M = 1)"] if spec.outside_main_hypotheses else []


def _sample_points(spec_dim: int, probe: Callable, samples: int, seed: int) -> list[list[Fraction]]:
    rng = RationalSampler(seed)
    return [rng.regular_point(spec_dim, probe) for _ in range(samples)]


def jacobi_check(spec: BracketSpec, samples: int = 5, seed: int = 0) -> Certificate:
    pts = _sample_points(spec.dim, lambda x: bracket_matrix(spec, x), samples, seed)
    witness = None
    for x in pts:
        bad = jacobi_violations_at(spec, x)
        if bad:
            witness = {"point": [format_q(v) for v in x], "triple": list(bad[0])}
            break
    return Certificate(
        "jacobi", _family_label(spec), spec.N, spec.M, seed, len(pts), "fail" if witness else "pass", witness,
        ANCHORS.get(spec.family, ""), _notes(spec),
    )


def pencil_check(s1: BracketSpec, s2: BracketSpec, l1, l2, samples: int = 5, seed: int = 0) -> Certificate:
    cert = jacobi_check(pencil(s1, s2, l1, l2), samples, seed)
    cert.check = "pencil"
    cert.notes = cert.notes + [f"weights {format_q(as_q(l1))}, {format_q(as_q(l2))}"]
    cert.anchor = ANCHORS["PENCIL"]
    return cert

def poisson_map_check(
    fmap: Callable[[list], Sequence],
    src: BracketSpec,
    dst: BracketSpec,
    samples: int = 5,
    seed: int = 0,
    name: str = "map",
) -> Certificate:
    """``DF P_src DF^T == P_dst(F)`` exactly at sampled points."""

    def probe(x):
        ys = fmap(list(x))
        bracket_matrix(src, x)
        bracket_matrix(dst, [value_of(y) for y in ys])

    pts = _sample_points(src.dim, probe, samples, seed)
    witness = None
    for x in pts:
        ys, J = jacobian(fmap, x)
        if len(ys) != dst.dim:
            raise BadParams(f"map lands in dimension {len(ys)}, target bracket needs {dst.dim}")
        lhs = pushforward_matrix(J, bracket_matrix(src, x).entries)
        rhs = bracket_matrix(dst, ys).entries
        if lhs != rhs:
            bad = next((i, j) for i in range(len(ys)) for j in range(len(ys)) if lhs[i][j] != rhs[i][j])
            witness = {"point": [format_q(v) for v in x], "pair": list(bad)}
            break
    label = f"{_family_label(src)}->{_family_label(dst)}"
    cert = Certificate("poisson_map", label, src.N, src.M, seed, len(pts), "fail" if witness else "pass", witness,
                       f"{name} preserves {ANCHORS.get(src.family, src.family)}", _notes(src))
    return cert


def pushforward_matrix(J: Sequence[Sequence], P: Sequence[Sequence]) -> list[list[Fraction]]:
    """``J P J^T`` via the integer sandwich kernel."""
    dj = _lcm_den(x for r in J for x in r)
    dp = _lcm_den(x for r in P for x in r)
    S = kernels.sandwich(_scale_int(J, dj), _scale_int(P, dp), _scale_int(J, dj))
    den = dj * dj * dp
    return [[Fraction(x, den) for x in r] for r in S]


def _gradients(functions, x) -> tuple[list, list[list]]:
    if callable(functions):
        return jacobian(functions, x)
    return jacobian(lambda z: [f(z) for f in functions], x)


def _pairing(gf, P, gg) -> Fraction:
    return sum((gf[i] * P[i][j] * gg[j] for i in range(len(gf)) for j in range(len(gg)) if gf[i] and gg[j]), Fraction(0))


def casimir_check(function, spec: BracketSpec, samples: int = 5, seed: int = 0, name: str = "function") -> Certificate:
    """``{C, x_i} = 0`` for all i."""

    def probe(x):
        function(list(x))
        bracket_matrix(spec, x)

    pts = _sample_points(spec.dim, probe, samples, seed)
    witness = None
    for x in pts:
        _, rows = jacobian(lambda z: [function(z)], x)
        grad = rows[0]
        P = bracket_matrix(spec, x).entries
        for i in range(spec.dim):
            if sum((grad[l] * P[l][i] for l in range(spec.dim)), Fraction(0)) != 0:
                witness = {"point": [format_q(v) for v in x], "coordinate": i}
                break
        if witness:
            break
    return Certificate("casimir", _family_label(spec), spec.N, spec.M, seed, len(pts), "fail" if witness else "pass",
                       witness, f"{name} is a Casimir of {ANCHORS.get(spec.family, spec.family)}", _notes(spec))


def involution_check(functions, spec: BracketSpec, samples: int = 5, seed: int = 0, name: str = "functions") -> Certificate:
    """``{f_p, f_q} = 0`` for all pairs; ``functions`` is a vector program or list of scalar programs."""

    def probe(x):
        _gradients(functions, list(x))
        bracket_matrix(spec, x)

    pts = _sample_points(spec.dim, probe, samples, seed)
    witness = None
    for x in pts:
        _, grads = _gradients(functions, x)
        P = bracket_matrix(spec, x).entries
        for p in range(len(grads)):
            for q in range(p + 1, len(grads)):
                if _pairing(grads[p], P, grads[q]) != 0:
                    witness = {"point": [format_q(v) for v in x], "pair": [p, q]}
                    break
            if witness:
                break
        if witness:
            break
    return Certificate("involution", _family_label(spec), spec.N, spec.M, seed, len(pts), "fail" if witness else "pass",
                       witness, f"{name} commute under {ANCHORS.get(spec.family, spec.family)}", _notes(spec))


def independence_check(functions, point: Sequence) -> int:
    """Rank of the Jacobian of the functions at the point."""
    _, rows = _gradients(functions, list(point))
    return rank_exact(rows)


def bracket_of(f, g, spec: BracketSpec, point: Sequence) -> Fraction:
    """``{f, g}`` at a point by the exact chain rule."""
    _, grads = jacobian(lambda z: [f(z), g(z)], list(point))
    P = bracket_matrix(spec, point).entries
    return _pairing(grads[0], P, grads[1])


# -- maps as jet programs --------------------------------------------------------------


def kdv_map(spec: ReductionSpec) -> Callable[[list], list]:
    return lambda v: list(v[1:]) + [kdv_next(spec, v)]


def projection(spec: ReductionSpec, src: str, target: str) -> Callable[[list], list]:
    return lambda x: list(project(spec, State(src, x, 0), target).values)


def lifted_recurrence_check(spec: ReductionSpec, family: int = 1, samples: int = 3, seed: int = 0) -> Certificate:
    """``{v_0, v_m}`` through the u-variables against the recursive closed form.

    The chain-rule values are computed from the U-bracket by pushing forward
    through ``u -> v``; the closed form is the recursion in m using the
    coefficients lifted from the U-bracket.
    """
    N, M, K, alpha = spec.N, spec.M, spec.K, spec.alpha
    if not spec.odd:
        raise BadParity("the lifted recursion needs N+M odd")
    a = solve_u_coefficients(N, M)
    c, d = cd_from_a(N, M, a)
    src = u_log(N, M, a)
    kind = "u" if family == 1 else "uprime"
    fmap = projection(spec, kind, "v")
    shift = N if family == 1 else M
    coef = c if family == 1 else d
    sign = 1 if family == 1 else -1

    def closed(v, m, memo):
        if m in memo:
            return memo[m]
        if m < shift:
            val = coef[m] * v[0] * v[m]
        else:
            val = coef[m] * v[0] * v[m] + sign * (coef[m] * alpha * v[0] / v[m - shift]
                                                  + alpha / (v[m - shift] ** 2) * closed(v, m - shift, memo))
        memo[m] = val
        return val

    pts = _sample_points(src.dim, lambda x: fmap(list(x)), samples, seed)
    witness = None
    for x in pts:
        ys, J = jacobian(fmap, x)
        lhs = pushforward_matrix(J, bracket_matrix(src, x).entries)
        memo: dict = {}
        for m in range(1, K):
            if lhs[0][m] != closed(ys, m, memo):
                witness = {"point": [format_q(v) for v in x], "m": m}
                break
        if witness:
            break
    return Certificate("lifted_recurrence", f"U_LOG->{'KDV1' if family == 1 else 'KDV2'}", N, M, seed, len(pts),
                       "fail" if witness else "pass", witness, "lifted bracket recursion")


def pushforward_samples(fmap: Callable[[list], Sequence], src: BracketSpec, points: Sequence[Sequence]) -> list:
    """Experimental: pushed-forward bracket matrices ``(F(x), J P J^T)`` at given points.

    Intended as raw data for fitting closed-form ansatzes for brackets
    on w-space beyond (5, 3); nothing here asserts such a closed form exists.
    """
    out = []
    for x in points:
        ys, J = jacobian(fmap, list(x))
        out.append((ys, pushforward_matrix(J, bracket_matrix(src, x).entries)))
    return out


__all__ = [
    "UCoefficients",
    "u_constraint_rows",
    "solve_u_coefficients",
    "u_unknowns",
    "preservation_rows",
    "kdv_coefficients",
    "cd_from_a",
    "coefficient_relations_hold",
    "proportionality",
    "toeplitz",
    "toeplitz_inverse_scale",
    "index_tableau",
    "BracketSpec",
    "BracketMatrixAt",
    "Certificate",
    "u_log",
    "kdv1",
    "kdv2",
    "kdv3",
    "g3",
    "dressing",
    "w53",
    "pencil",
    "scaled",
    "bracket_matrix",
    "bracket_rank",
    "jacobi_check",
    "pencil_check",
    "poisson_map_check",
    "pushforward_matrix",
    "casimir_check",
    "involution_check",
    "independence_check",
    "bracket_of",
    "kdv_map",
    "projection",
    "lifted_recurrence_check",
    "pushforward_samples",
]
