"""Exact scalars, first-order jets, univariate polynomials and rational linear algebra.

Everything here works over :class:`fractions.Fraction`.  Maps and brackets in
the rest of the package are written as plain Python callables using only
``+ - * /``, so evaluating them on :class:`Dual` inputs yields values together
with exact first partial derivatives.
"""

from __future__ import annotations

import math
import random
import sys
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import kernels
from .errors import Inconsistent, SingularPoint

Q = Fraction

# long orbits produce rationals with more digits than the default str() cap
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

__all__ = [
    "Q",
    "as_q",
    "format_q",
    "value_of",
    "is_zero_value",
    "Dual",
    "eval_with_partials",
    "jacobian",
    "UniPoly",
    "rank_exact",
    "integer_kernel",
    "rref",
    "solve_exact",
    "matmul",
    "transpose",
    "to_integer_rows",
    "RationalSampler",
]


def as_q(x) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def format_q(x) -> str:
    x = as_q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def value_of(x):
    """Scalar part of a jet, or the value itself."""
    return x.value if isinstance(x, Dual) else x


def is_zero_value(x) -> bool:
    return value_of(x) == 0


class Dual:
    """Value plus the exact gradient with respect to all active variables."""

    __slots__ = ("value", "partials")

    def __init__(self, value, partials: Sequence):
        self.value = value
        self.partials = tuple(partials)

    @classmethod
    def variable(cls, value, index: int, n: int) -> "Dual":
        p = [Fraction(0)] * n
        p[index] = Fraction(1)
        return cls(as_q(value), p)

    @classmethod
    def constant(cls, value, n: int) -> "Dual":
        return cls(as_q(value), (Fraction(0),) * n)

    def __repr__(self):
        return f"Dual({self.value}, {list(self.partials)})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, [a + b for a, b in zip(self.partials, other.partials)])
        return Dual(self.value + other, self.partials)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.value, [-a for a in self.partials])

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, [a - b for a, b in zip(self.partials, other.partials)])
        return Dual(self.value - other, self.partials)

    def __rsub__(self, other):
        return Dual(other - self.value, [-a for a in self.partials])

    def __mul__(self, other):
        if isinstance(other, Dual):
            u, v = self.value, other.value
            return Dual(u * v, [u * b + v * a for a, b in zip(self.partials, other.partials)])
        if other == 0:
            return Dual(self.value * other, (Fraction(0),) * len(self.partials))
        return Dual(self.value * other, [a * other for a in self.partials])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            v = other.value
            if v == 0:
                raise SingularPoint("division by a jet with zero value")
            q = self.value / v
            return Dual(q, [(a - q * b) / v for a, b in zip(self.partials, other.partials)])
        if other == 0:
            raise SingularPoint("division by zero")
        return Dual(self.value / other, [a / other for a in self.partials])

    def __rtruediv__(self, other):
        v = self.value
        if v == 0:
            raise SingularPoint("division by a jet with zero value")
        q = other / v
        return Dual(q, [-q * a / v for a in self.partials])

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return 1 / (self ** (-k))
        result = Dual.constant(1, len(self.partials))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        # equality of first-order jets; a scalar is a jet with zero gradient
        if isinstance(other, Dual):
            return self.value == other.value and self.partials == other.partials
        return self.value == other and all(p == 0 for p in self.partials)

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None  # type: ignore[assignment]


def _seed(point: Sequence) -> list[Dual]:
    n = len(point)
    return [Dual.variable(x, i, n) for i, x in enumerate(point)]


def _lift(y, n: int) -> Dual:
    return y if isinstance(y, Dual) else Dual.constant(y, n)


def eval_with_partials(program: Callable[[list], object], point: Sequence) -> Dual:
    """Evaluate a scalar program at ``point`` with all first partials.

    Raises :class:`SingularPoint` when a denominator vanishes.
    """
    try:
        y = program(_seed(point))
    except ZeroDivisionError as exc:
        raise SingularPoint(str(exc)) from exc
    return _lift(y, len(point))


def jacobian(program: Callable[[list], Sequence], point: Sequence) -> tuple[list, list[list]]:
    """Values and Jacobian rows of a vector-valued program."""
    n = len(point)
    try:
        ys = program(_seed(point))
    except ZeroDivisionError as exc:
        raise SingularPoint(str(exc)) from exc
    ys = [_lift(y, n) for y in ys]
    return [y.value for y in ys], [list(y.partials) for y in ys]


class UniPoly:
    """Polynomial in one variable, coefficients lowest degree first.

    Coefficients may be any ring elements (Fractions or :class:`Dual` jets);
    trailing zeros are trimmed.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def constant(cls, c) -> "UniPoly":
        return cls([c])

    @classmethod
    def x(cls) -> "UniPoly":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    def coeff(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def leading(self):
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        return f"UniPoly({list(self.coeffs)})"

    def __eq__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        return self.coeffs == other.coeffs

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, y in enumerate(b):
            out[i] = out[i] + y
        return UniPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        return self + (-other)

    def __rsub__(self, other):
        return UniPoly([other]) - self

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            return UniPoly([c * other for c in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return UniPoly()
        out = [None] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                t = x * y
                k = i + j
                out[k] = t if out[k] is None else out[k] + t
        return UniPoly(out)

    __rmul__ = __mul__

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def map(self, f: Callable) -> "UniPoly":
        return UniPoly([f(c) for c in self.coeffs])

    def divmod_x(self) -> tuple["UniPoly", object]:
        """Split off the constant term: ``self = x * q + r``."""
        if not self.coeffs:
            return UniPoly(), 0
        return UniPoly(self.coeffs[1:]), self.coeffs[0]

    def compose_neg(self) -> "UniPoly":
        """``p(-x)``."""
        return UniPoly([c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs)])


# -- rational linear algebra -------------------------------------------------


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in zip(*a)] if a else []


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def to_integer_rows(m: Sequence[Sequence]) -> list[list[int]]:
    """Scale each row by the lcm of its denominators (rank-preserving)."""
    out = []
    for row in m:
        qs = [as_q(x) for x in row]
        den = 1
        for x in qs:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([int(x * den) for x in qs])
    return out


def rank_exact(m: Sequence[Sequence]) -> int:
    """Rank over the rationals by fraction-free elimination."""
    if not m or not m[0]:
        return 0
    return kernels.bareiss_rank(to_integer_rows(m))


def rref(m: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q, seeded by a fraction-free pass."""
    if not m or not m[0]:
        return [], []
    ech, pivots = kernels.bareiss_echelon(to_integer_rows(m))
    rows = [[Fraction(x) for x in ech[i]] for i in range(len(pivots))]
    for r, c in enumerate(pivots):
        p = rows[r][c]
        rows[r] = [x / p for x in rows[r]]
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        for i in range(r):
            f = rows[i][c]
            if f:
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
    return rows, pivots


def _primitive(vec: Sequence[Fraction]) -> list[int]:
    den = 1
    for x in vec:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    ints = [x // g for x in ints] if g else ints
    for x in ints:
        if x:
            if x < 0:
                ints = [-y for y in ints]
            break
    return ints


def integer_kernel(m: Sequence[Sequence]) -> list[list[int]]:
    """Basis of the kernel of an integer matrix, one primitive vector per free column.

    Each vector is normalised so its first nonzero entry is positive.
    """
    if not m:
        return []
    cols = len(m[0])
    rows, pivots = rref(m)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for f in free:
        vec = [Fraction(0)] * cols
        vec[f] = Fraction(1)
        for r, c in enumerate(pivots):
            vec[c] = -rows[r][f]
        basis.append(_primitive(vec))
    return basis


def solve_exact(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Some exact solution of ``a x = b``; raises :class:`Inconsistent` if none."""
    aug = [list(row) + [as_q(rhs)] for row, rhs in zip(a, b)]
    cols = len(a[0])
    rows, pivots = rref(aug)
    if pivots and pivots[-1] == cols:
        raise Inconsistent("linear system has no solution")
    x = [Fraction(0)] * cols
    for r, c in enumerate(pivots):
        x[c] = rows[r][cols]
    return x


# -- sampling ----------------------------------------------------------------


class RationalSampler:
    """Seeded generator of small nonzero rationals.

    Numerators are drawn from [-9, 9] without 0, denominators from [1, 9].
    """

    def __init__(self, seed: int = 0, max_retries: int = 50):
        self.seed = seed
        self.max_retries = max_retries
        self._rng = random.Random(seed)

    def scalar(self) -> Fraction:
        num = self._rng.choice([k for k in range(-9, 10) if k])
        return Fraction(num, self._rng.randint(1, 9))

    def point(self, n: int) -> list[Fraction]:
        return [self.scalar() for _ in range(n)]

    def regular_point(self, n: int, probe: Callable[[list], object] | None = None) -> list[Fraction]:
        """A point at which ``probe`` evaluates without hitting a zero denominator."""
        for _ in range(self.max_retries):
            x = self.point(n)
            if probe is None:
                return x
            try:
                probe(x)
            except ZeroDivisionError:
                continue
            return x
        raise SingularPoint(f"no regular point found after {self.max_retries} draws")
