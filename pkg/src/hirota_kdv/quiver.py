"""Period-1 mutation-periodic exchange matrices and their reductions.

Matrices are stored 0-based as tuples of integer rows.  Two families:

* ``"t1"``: size ``2N+M``, the recurrence
  ``tau[m+2N+M] tau[m] = a tau[m+2N] tau[m+M] + b tau[m+N+M] tau[m+N]``;
* ``"t2"``: size ``2M+N``, the recurrence
  ``tau[m+2M+N] tau[m] = a tau[m+2M] tau[m+N] + b tau[m+N+M] tau[m+M]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BadParams, Inconsistent, SpanFailure
from .exact import matmul, rank_exact, solve_exact, transpose

FAMILIES = ("t1", "t2")


def check_params(N: int, M: int) -> None:
    if not (isinstance(N, int) and isinstance(M, int)) or M < 1 or N <= M:
        raise BadParams(f"need N > M >= 1, got N={N}, M={M}")
    if math.gcd(N, M) != 1:
        raise BadParams(f"N={N} and M={M} are not coprime")


def _family(family: str) -> str:
    f = str(family).lower()
    if f not in FAMILIES:
        raise BadParams(f"unknown family {family!r}; use 't1' or 't2'")
    return f


@dataclass(frozen=True)
class ExchangeMatrix:
    family: str
    N: int
    M: int
    rows: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.rows)

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def to_json(self) -> str:
        return json.dumps({"family": self.family, "N": self.N, "M": self.M, "rows": self.as_lists()})

    @classmethod
    def from_json(cls, text: str) -> "ExchangeMatrix":
        d = json.loads(text)
        return cls(d["family"], d["N"], d["M"], tuple(tuple(r) for r in d["rows"]))


@dataclass(frozen=True)
class PalindromicBasis:
    vectors: tuple[tuple[int, ...], ...]

    @property
    def shift_origin(self) -> tuple[int, ...]:
        return self.vectors[0]

    def matrix(self) -> list[list[int]]:
        """The matrix W whose columns are the basis vectors."""
        return transpose([list(v) for v in self.vectors])


@dataclass(frozen=True)
class ReducedExchange:
    rows: tuple[tuple[int, ...], ...]

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def to_json(self, family: str, N: int, M: int) -> str:
        return json.dumps({"family": family, "N": N, "M": M, "rows": self.as_lists()})


def first_row(family: str, N: int, M: int) -> list[int]:
    family = _family(family)
    if family == "t2":
        size = 2 * M + N
        plus, minus = (M, N + M), (2 * M, N)
    else:
        size = 2 * N + M
        plus, minus = (M, 2 * N), (N, N + M)
    row = [0] * size
    for c in plus:
        row[c] += 1
    for c in minus:
        row[c] -= 1
    return row


def _pos(x: int) -> int:
    return x if x > 0 else 0


def build_exchange(family: str, N: int, M: int) -> ExchangeMatrix:
    """Exchange matrix from its first row and the period-1 row recursion."""
    check_params(N, M)
    family = _family(family)
    r1 = first_row(family, N, M)
    D = len(r1)
    B = [[0] * D for _ in range(D)]
    B[0] = list(r1)
    for i in range(D - 1):
        b = r1[i + 1]
        B[i + 1][0] = -b
        for k in range(D - 1):
            c = r1[k + 1]
            B[i + 1][k + 1] = B[i][k] + b * _pos(-c) - c * _pos(-b)
    for i in range(D):
        for k in range(D):
            if B[i][k] != -B[k][i]:
                raise Inconsistent(f"recursion produced a non-skew matrix at ({i}, {k})")
    return ExchangeMatrix(family, N, M, tuple(tuple(r) for r in B))


def mutate(B, j: int) -> list[list[int]]:
    """Matrix mutation at the 0-based vertex ``j``."""
    rows = B.as_lists() if isinstance(B, ExchangeMatrix) else [list(r) for r in B]
    D = len(rows)
    if not 0 <= j < D:
        raise IndexError(f"vertex {j} out of range for size {D}")
    out = [[0] * D for _ in range(D)]
    for i in range(D):
        bij = rows[i][j]
        for k in range(D):
            if i == j or k == j:
                out[i][k] = -rows[i][k]
            else:
                bjk = rows[j][k]
                out[i][k] = rows[i][k] + (abs(bij) * bjk + bij * abs(bjk)) // 2
    return out


def cyclic_relabel(B) -> list[list[int]]:
    """``rho B rho^T`` for the relabelling 1 -> D, k -> k-1."""
    rows = B.as_lists() if isinstance(B, ExchangeMatrix) else [list(r) for r in B]
    D = len(rows)
    return [[rows[(i - 1) % D][(k - 1) % D] for k in range(D)] for i in range(D)]


def period_one_check(B) -> bool:
    return mutate(B, 0) == cyclic_relabel(B)


def shift(vec, t: int = 1) -> list[int]:
    """Shift entries ``t`` places towards higher indices; fails if support is lost."""
    D = len(vec)
    if t < 0 or any(vec[D - t + i] for i in range(t)):
        raise SpanFailure(f"shift by {t} pushes support out of range")
    return [0] * t + list(vec[: D - t])


def seed_vector(family: str, N: int, M: int) -> list[int]:
    family = _family(family)
    D = 2 * N + M if family == "t1" else 2 * M + N
    p = N if family == "t1" else M
    w = [0] * D
    plus, minus = ((0, p + 1), (1, p)) if (N + M) % 2 else ((0, p + 2), (2, p))
    # entries may coincide when M = 1; they add
    for c in plus:
        w[c] += 1
    for c in minus:
        w[c] -= 1
    return w


def reduced_dimension(N: int, M: int) -> int:
    return N + M - 1 if (N + M) % 2 else N + M - 2


def palindromic_basis(B: ExchangeMatrix) -> PalindromicBasis:
    """Shift-generated basis of im B starting from the seed vector."""
    N, M = B.N, B.M
    w1 = seed_vector(B.family, N, M)
    vecs = [w1]
    for _ in range(reduced_dimension(N, M) - 1):
        vecs.append(shift(vecs[-1]))
    rows = B.as_lists()
    rb = rank_exact(rows)
    rw = rank_exact(vecs)
    if rw != len(vecs) or rw != rb or rank_exact(vecs + rows) != rw:
        raise SpanFailure(f"shifted seed vectors do not span im B for {B.family} ({N}, {M})")
    return PalindromicBasis(tuple(tuple(v) for v in vecs))


def reduced_exchange(B: ExchangeMatrix, basis: PalindromicBasis) -> ReducedExchange:
    """The skew integer matrix Bh with ``W Bh W^T = B``."""
    W = basis.matrix()
    Wt = transpose(W)
    gram = matmul(Wt, W)
    n = len(gram)
    # left inverse L = (W^T W)^{-1} W^T, column by column
    cols = [solve_exact(gram, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
    gram_inv = transpose(cols)
    L = matmul(gram_inv, Wt)
    Bh = matmul(matmul(L, B.as_lists()), transpose(L))
    if matmul(matmul(W, Bh), Wt) != [[Fraction(x) for x in r] for r in B.rows]:
        raise Inconsistent("no matrix Bh with W Bh W^T = B")
    if any(x.denominator != 1 for r in Bh for x in r):
        raise Inconsistent("reduced matrix is not integral")
    ints = tuple(tuple(int(x) for x in r) for r in Bh)
    if rank_exact(ints) != n:
        raise Inconsistent("reduced matrix is degenerate")
    return ReducedExchange(ints)


def expand_rows(B: ExchangeMatrix, basis: PalindromicBasis) -> list[list[Fraction]]:
    """Coordinates of each row of B in the basis."""
    W = basis.matrix()
    return [solve_exact(W, list(r)) for r in B.rows]


def _combo(indices_with_signs, n: int) -> list[int]:
    c = [0] * n
    for j, s in indices_with_signs:
        c[j - 1] += s
    return c


def _reflect(c: list[int]) -> list[int]:
    """Reverse the entries of ``c`` between its first and last nonzero positions."""
    nz = [i for i, x in enumerate(c) if x]
    if not nz:
        return list(c)
    lo, hi = nz[0], nz[-1]
    return c[:lo] + c[lo : hi + 1][::-1] + c[hi + 1 :]


def predicted_row_coordinates(family: str, N: int, M: int) -> list[list[int]]:
    """Basis coordinates of every row of B, assembled from the combination
    vectors v, v', v'' and their shifts (rows are 1-based in the formulas)."""
    family = _family(family)
    n = reduced_dimension(N, M)
    odd = (N + M) % 2 == 1
    D = 2 * N + M if family == "t1" else 2 * M + N

    def sh(c, t):
        if t < 0 or any(c[n - t + i] for i in range(t)):
            raise SpanFailure("coordinate shift leaves the basis")
        return [0] * t + c[: n - t]

    npm = N - M
    if odd:
        v = _combo([(j, 1) for j in range(1, npm + 1)], n)
        if family == "t1":
            vp = _combo([(j, 1) for j in range(1, M + 1)] + [(npm + j, -1) for j in range(1, M + 1)], n)
            vpp = _combo([(j, 1) for j in range(1, 2 * M + 1)], n)
        else:
            lo = min(M, npm)
            lo2 = min(2 * M, N)
            # only used when N != 2M
            vp = _combo([(j, 1) for j in range(1, lo + 1)] + [(lo2 + j, -1) for j in range(1, lo + 1) if lo2 + j <= n], n)
            vpp = _combo([(j, 1) for j in range(1, 2 * M + 1)] + [(M + j, 1) for j in range(1, npm + 1)], n)
    else:
        half = npm // 2
        v = _combo([(2 * j - 1, 1) for j in range(1, half + 1)], n)
        if family == "t1":
            vp = _combo([(2 * j - 1, 1) for j in range(1, half + 1)] + [(M + 2 * j - 1, -1) for j in range(1, half + 1)], n)
            vpp = _combo([(2 * j - 1, 1) for j in range(1, M + 1)], n)
        else:
            if N > 2 * M:
                vp = _combo([(2 * j - 1, 1) for j in range(1, M + 1)] + [(M + 2 * j - 1, -1) for j in range(1, M + 1)], n)
            else:
                vp = _combo([(2 * j - 1, 1) for j in range(1, half + 1)] + [(N + 2 * j - 1, -1) for j in range(1, half + 1)], n)
            vpp = _combo([(2 * j - 1, 1) for j in range(1, M + 1)] + [(M + 2 * j - 1, 1) for j in range(1, half + 1)], n)

    rows: list[list[int] | None] = [None] * (D + 1)

    def put(r, c):
        if rows[r] is not None and rows[r] != c:
            raise SpanFailure(f"row {r} assigned twice with different values")
        rows[r] = c

    neg = lambda c: [-x for x in c]  # noqa: E731
    if family == "t1":
        for k in range(1, M + 1):
            put(k, sh(v, M + k - 1))
            put(2 * N + k, neg(sh(v, k - 1)))
            put(N + k, sh(vp, k - 1))
        for k in range(1, npm + 1):
            put(M + k, neg(sh(vpp, k - 1)))
            put(N + M + k, sh(vpp, k - 1))
    else:
        for k in range(1, M + 1):
            put(k, sh(v, M + k - 1))
            put(N + M + k, neg(sh(v, k - 1)))
        for k in range(1, abs(N - 2 * M) + 1):
            put(min(2 * M, N) + k, sh(vp, k - 1))
        mirrored = _reflect(vpp)
        for k in range(1, min(M, npm) + 1):
            put(M + k, neg(sh(vpp, k - 1)))
            put(max(2 * M, N) + k, sh(mirrored, k - 1))
    missing = [r for r in range(1, D + 1) if rows[r] is None]
    if missing:
        raise SpanFailure(f"rows {missing} not covered by the row formulas")
    return [rows[r] for r in range(1, D + 1)]  # type: ignore[misc]


def row_structure_check(B: ExchangeMatrix) -> bool:
    """True iff every row of B has the predicted expansion in the palindromic basis."""
    try:
        predicted = predicted_row_coordinates(B.family, B.N, B.M)
        actual = expand_rows(B, palindromic_basis(B))
    except (SpanFailure, Inconsistent):
        return False
    return all([Fraction(x) for x in p] == a for p, a in zip(predicted, actual))
