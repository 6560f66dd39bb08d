"""
Exact polynomial and piecewise-polynomial calculus on intervals [0, length].

Every smooth function on an edge is represented by a PiecewisePolynomial whose
pieces are evaluated in the global coordinate of the edge. Smoothness is the
finite order K: at each interior breakpoint the neighbouring pieces agree in
value and in the first K derivatives.

Example:
    >>> f = PiecewisePolynomial.polynomial(Polynomial((0, 0, 1)), 2, order=3)
    >>> f.evaluate(Fraction(3, 2))
    Fraction(9, 4)
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from math import factorial
from typing import Iterable, List, Sequence, Tuple, Union

from src.utils.errors import DomainError, NonDifferentiableError, PreconditionError

Scalar = Union[int, Fraction, str]


def as_fraction(value: Scalar) -> Fraction:
    """
    Convert an exact scalar to a Fraction.

    Args:
        value: int, Fraction or a "p/q" string.

    Returns:
        The value as a Fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise PreconditionError(f"exact rational expected, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise PreconditionError(f"not a rational number: {value!r}") from e


class Polynomial:
    """Univariate polynomial with rational coefficients in ascending degree order."""

    __slots__ = ("_coefficients",)

    def __init__(self, coefficients: Iterable[Scalar] = ()) -> None:
        coeffs = [as_fraction(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self._coefficients: Tuple[Fraction, ...] = tuple(coeffs)

    @classmethod
    def constant(cls, value: Scalar) -> Polynomial:
        return cls((value,))

    @classmethod
    def monomial(cls, degree: int, coefficient: Scalar = 1) -> Polynomial:
        return cls([0] * degree + [coefficient])

    @classmethod
    def identity(cls) -> Polynomial:
        return cls((0, 1))

    @property
    def coefficients(self) -> Tuple[Fraction, ...]:
        return self._coefficients

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self._coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return not self._coefficients

    def __call__(self, x: Scalar) -> Fraction:
        x = as_fraction(x)
        value = Fraction(0)
        for c in reversed(self._coefficients):
            value = value * x + c
        return value

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self._coefficients == other._coefficients
        if isinstance(other, (int, Fraction)):
            return self._coefficients == Polynomial.constant(other)._coefficients
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._coefficients)

    def __repr__(self) -> str:
        if self.is_zero:
            return "Polynomial(0)"
        terms = []
        for k, c in enumerate(self._coefficients):
            if c == 0:
                continue
            terms.append(f"{c}" if k == 0 else f"{c}*x" if k == 1 else f"{c}*x^{k}")
        return f"Polynomial({' + '.join(terms)})"

    @staticmethod
    def _coerce(other: Union[Polynomial, Scalar]) -> Polynomial:
        return other if isinstance(other, Polynomial) else Polynomial.constant(other)

    def __add__(self, other: Union[Polynomial, Scalar]) -> Polynomial:
        other = self._coerce(other)
        size = max(len(self._coefficients), len(other._coefficients))
        a = self._coefficients + (Fraction(0),) * (size - len(self._coefficients))
        b = other._coefficients + (Fraction(0),) * (size - len(other._coefficients))
        return Polynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(-c for c in self._coefficients)

    def __sub__(self, other: Union[Polynomial, Scalar]) -> Polynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Union[Polynomial, Scalar]) -> Polynomial:
        return self._coerce(other) - self

    def __mul__(self, other: Union[Polynomial, Scalar]) -> Polynomial:
        if not isinstance(other, Polynomial):
            c = as_fraction(other)
            return Polynomial(c * a for a in self._coefficients)
        if self.is_zero or other.is_zero:
            return Polynomial()
        out = [Fraction(0)] * (len(self._coefficients) + len(other._coefficients) - 1)
        for i, a in enumerate(self._coefficients):
            if a == 0:
                continue
            for j, b in enumerate(other._coefficients):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> Polynomial:
        if exponent < 0:
            raise PreconditionError("negative polynomial power")
        result = Polynomial.constant(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def derivative(self, times: int = 1) -> Polynomial:
        coeffs = list(self._coefficients)
        for _ in range(times):
            coeffs = [k * c for k, c in enumerate(coeffs)][1:]
        return Polynomial(coeffs)

    def derivative_at(self, x: Scalar, order: int) -> Fraction:
        """Value of the order-th derivative at x."""
        return self.derivative(order)(x) if order else self(x)

    def antiderivative(self) -> Polynomial:
        """Antiderivative vanishing at 0."""
        return Polynomial([0] + [c / (k + 1) for k, c in enumerate(self._coefficients)])

    def compose_affine(self, scale: Scalar, shift: Scalar) -> Polynomial:
        """Return x -> p(scale * x + shift)."""
        inner = Polynomial((shift, scale))
        result = Polynomial()
        for c in reversed(self._coefficients):
            result = result * inner + c
        return result

    def shift(self, s: Scalar) -> Polynomial:
        """Taylor shift x -> p(x + s)."""
        return self.compose_affine(1, s)


class PiecewisePolynomial:
    """
    Function on [0, length] given by polynomial pieces between rational breakpoints.

    Adjacent identical pieces are merged, so two instances compare equal exactly
    when they define the same function on the same interval. The smoothness
    order is carried along but does not take part in equality.
    """

    __slots__ = ("_length", "_breakpoints", "_pieces", "_order")

    def __init__(
        self,
        length: Scalar,
        breakpoints: Sequence[Scalar],
        pieces: Sequence[Polynomial],
        order: int = 3,
    ) -> None:
        length = as_fraction(length)
        points = [as_fraction(b) for b in breakpoints]
        if length <= 0:
            raise PreconditionError(f"interval length must be positive, got {length}")
        if len(points) != len(pieces) + 1 or not pieces:
            raise PreconditionError("need exactly one more breakpoint than pieces")
        if points[0] != 0 or points[-1] != length:
            raise PreconditionError(f"breakpoints must span [0, {length}]")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise PreconditionError("breakpoints must be strictly increasing")
        if order < 0:
            raise PreconditionError("smoothness order must be nonnegative")

        merged_points = [points[0]]
        merged_pieces: List[Polynomial] = []
        for end, piece in zip(points[1:], pieces):
            if merged_pieces and merged_pieces[-1] == piece:
                merged_points[-1] = end
            else:
                merged_pieces.append(piece)
                merged_points.append(end)
        self._length = length
        self._breakpoints: Tuple[Fraction, ...] = tuple(merged_points)
        self._pieces: Tuple[Polynomial, ...] = tuple(merged_pieces)
        self._order = order

    @classmethod
    def polynomial(cls, p: Polynomial, length: Scalar, order: int = 3) -> PiecewisePolynomial:
        return cls(length, (0, length), (p,), order)

    @classmethod
    def constant(cls, value: Scalar, length: Scalar, order: int = 3) -> PiecewisePolynomial:
        return cls.polynomial(Polynomial.constant(value), length, order)

    @classmethod
    def zero(cls, length: Scalar, order: int = 3) -> PiecewisePolynomial:
        return cls.polynomial(Polynomial(), length, order)

    @property
    def length(self) -> Fraction:
        return self._length

    @property
    def breakpoints(self) -> Tuple[Fraction, ...]:
        return self._breakpoints

    @property
    def pieces(self) -> Tuple[Polynomial, ...]:
        return self._pieces

    @property
    def order(self) -> int:
        return self._order

    @property
    def first_piece(self) -> Polynomial:
        return self._pieces[0]

    @property
    def last_piece(self) -> Polynomial:
        return self._pieces[-1]

    @property
    def is_polynomial(self) -> bool:
        return len(self._pieces) == 1

    @property
    def is_zero(self) -> bool:
        return self.is_polynomial and self._pieces[0].is_zero

    @property
    def max_degree(self) -> int:
        return max(p.degree for p in self._pieces)

    def intervals(self) -> List[Tuple[Fraction, Fraction, Polynomial]]:
        return [(a, b, p) for a, b, p in zip(self._breakpoints, self._breakpoints[1:], self._pieces)]

    def with_order(self, order: int) -> PiecewisePolynomial:
        return PiecewisePolynomial(self._length, self._breakpoints, self._pieces, order)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PiecewisePolynomial):
            return NotImplemented
        return (
            self._length == other._length
            and self._breakpoints == other._breakpoints
            and self._pieces == other._pieces
        )

    def __hash__(self) -> int:
        return hash((self._length, self._breakpoints, self._pieces))

    def __repr__(self) -> str:
        parts = ", ".join(f"[{a}, {b}]: {p!r}" for a, b, p in self.intervals())
        return f"PiecewisePolynomial(K={self._order}; {parts})"

    def _piece_index(self, x: Fraction) -> int:
        index = bisect_right(self._breakpoints, x) - 1
        return min(max(index, 0), len(self._pieces) - 1)

    def evaluate(self, x: Scalar) -> Fraction:
        x = as_fraction(x)
        if x < 0 or x > self._length:
            raise DomainError(f"x={x} outside [0, {self._length}]")
        return self._pieces[self._piece_index(x)](x)

    def junction_violations(self) -> List[str]:
        """List breakpoints where neighbouring pieces disagree below order K+1."""
        problems = []
        for k, b in enumerate(self._breakpoints[1:-1], start=1):
            left, right = self._pieces[k - 1], self._pieces[k]
            for n in range(self._order + 1):
                if left.derivative_at(b, n) != right.derivative_at(b, n):
                    problems.append(f"derivative of order {n} jumps at breakpoint {b}")
                    break
        return problems

    def differentiate(self) -> PiecewisePolynomial:
        if self._order == 0:
            raise NonDifferentiableError("cannot differentiate a function of smoothness order 0")
        return PiecewisePolynomial(
            self._length, self._breakpoints, [p.derivative() for p in self._pieces], self._order - 1
        )

    def antiderivative(self) -> PiecewisePolynomial:
        """Return F with F(x) = integral of f over [0, x]; order K+1."""
        pieces = []
        running = Fraction(0)
        for a, b, p in self.intervals():
            primitive = p.antiderivative()
            shifted = primitive + (running - primitive(a))
            pieces.append(shifted)
            running = shifted(b)
        return PiecewisePolynomial(self._length, self._breakpoints, pieces, self._order + 1)

    def integrate_definite(self, a: Scalar, b: Scalar) -> Fraction:
        a, b = as_fraction(a), as_fraction(b)
        if not (0 <= a <= b <= self._length):
            raise DomainError(f"integration bounds [{a}, {b}] not ordered inside [0, {self._length}]")
        total = Fraction(0)
        for lo, hi, p in self.intervals():
            lo, hi = max(lo, a), min(hi, b)
            if lo < hi:
                primitive = p.antiderivative()
                total += primitive(hi) - primitive(lo)
        return total

    def reverse(self) -> PiecewisePolynomial:
        """Return g with g(x) = f(length - x)."""
        points = [self._length - b for b in reversed(self._breakpoints)]
        pieces = [p.compose_affine(-1, self._length) for p in reversed(self._pieces)]
        return PiecewisePolynomial(self._length, points, pieces, self._order)

    def rescale(self, factor: Scalar) -> PiecewisePolynomial:
        """Return g on [0, length/factor] with g(x) = f(factor * x)."""
        factor = as_fraction(factor)
        if factor <= 0:
            raise PreconditionError(f"rescaling factor must be positive, got {factor}")
        return PiecewisePolynomial(
            self._length / factor,
            [b / factor for b in self._breakpoints],
            [p.compose_affine(factor, 0) for p in self._pieces],
            self._order,
        )

    def restrict(self, a: Scalar, b: Scalar) -> PiecewisePolynomial:
        """Return g on [0, b - a] with g(u) = f(a + u)."""
        a, b = as_fraction(a), as_fraction(b)
        if not (0 <= a < b <= self._length):
            raise DomainError(f"cannot restrict to [{a}, {b}] inside [0, {self._length}]")
        points = [Fraction(0)]
        pieces = []
        for lo, hi, p in self.intervals():
            lo, hi = max(lo, a), min(hi, b)
            if lo < hi:
                pieces.append(p.shift(a))
                points.append(hi - a)
        return PiecewisePolynomial(b - a, points, pieces, self._order)

    def _refine_with(self, other: PiecewisePolynomial) -> List[Tuple[Fraction, Fraction, Polynomial, Polynomial]]:
        if self._length != other._length:
            raise PreconditionError(f"domains differ: [0, {self._length}] vs [0, {other._length}]")
        points = sorted(set(self._breakpoints) | set(other._breakpoints))
        cells = []
        for a, b in zip(points, points[1:]):
            mid = (a + b) / 2
            cells.append((a, b, self._pieces[self._piece_index(mid)], other._pieces[other._piece_index(mid)]))
        return cells

    def _combine(self, other: PiecewisePolynomial, op) -> PiecewisePolynomial:
        cells = self._refine_with(other)
        return PiecewisePolynomial(
            self._length,
            [cells[0][0]] + [c[1] for c in cells],
            [op(p, q) for _, _, p, q in cells],
            min(self._order, other._order),
        )

    def __add__(self, other: PiecewisePolynomial) -> PiecewisePolynomial:
        return self._combine(other, lambda p, q: p + q)

    def __sub__(self, other: PiecewisePolynomial) -> PiecewisePolynomial:
        return self._combine(other, lambda p, q: p - q)

    def __neg__(self) -> PiecewisePolynomial:
        return self.scale(-1)

    def __mul__(self, other: Union[PiecewisePolynomial, Scalar]) -> PiecewisePolynomial:
        if isinstance(other, PiecewisePolynomial):
            return self._combine(other, lambda p, q: p * q)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, factor: Scalar) -> PiecewisePolynomial:
        factor = as_fraction(factor)
        return PiecewisePolynomial(self._length, self._breakpoints, [p * factor for p in self._pieces], self._order)


def evaluate(f: PiecewisePolynomial, x: Scalar) -> Fraction:
    return f.evaluate(x)


def differentiate(f: PiecewisePolynomial) -> PiecewisePolynomial:
    return f.differentiate()


def integrate_definite(f: PiecewisePolynomial, a: Scalar, b: Scalar) -> Fraction:
    return f.integrate_definite(a, b)


def reverse(f: PiecewisePolynomial) -> PiecewisePolynomial:
    return f.reverse()


def check_vertex_glue(
    f1: Union[PiecewisePolynomial, Polynomial],
    f2: Union[PiecewisePolynomial, Polynomial],
    c1: Scalar,
    c2: Scalar,
    order: int,
) -> bool:
    """
    Decide whether two edge functions glue smoothly at a shared vertex.

    Both functions are read at their local coordinate 0, i.e. callers reverse
    incoming edges first.

    Args:
        f1: Function on the first outgoing edge.
        f2: Function on the second outgoing edge.
        c1: Scale factor of the first edge (a weight or weight power).
        c2: Scale factor of the second edge.
        order: Smoothness order K.

    Returns:
        True iff c1^n f1^(n)(0) = (-1)^n c2^n f2^(n)(0) for 0 <= n <= min(K, max degree).
    """
    p1 = f1.first_piece if isinstance(f1, PiecewisePolynomial) else f1
    p2 = f2.first_piece if isinstance(f2, PiecewisePolynomial) else f2
    c1, c2 = as_fraction(c1), as_fraction(c2)
    top = min(order, max(p1.degree, p2.degree))
    for n in range(top + 1):
        if c1 ** n * p1.derivative_at(0, n) != (-1) ** n * c2 ** n * p2.derivative_at(0, n):
            return False
    return True


def make_bump(length: Scalar, a: Scalar, b: Scalar, order: int, target_integral: Scalar) -> PiecewisePolynomial:
    """
    Build c*(x-a)^(K+1)*(b-x)^(K+1) on [a, b], zero elsewhere, with a prescribed integral.

    Args:
        length: Edge length.
        a: Left end of the support.
        b: Right end of the support.
        order: Smoothness order K; all derivatives up to K vanish at a and b.
        target_integral: Exact value of the integral over [0, length].

    Returns:
        The bump as a PiecewisePolynomial of order K.
    """
    length, a, b = as_fraction(length), as_fraction(a), as_fraction(b)
    target = as_fraction(target_integral)
    if a >= b:
        raise PreconditionError(f"bump support needs a < b, got a={a}, b={b}")
    if a < 0 or b > length:
        raise DomainError(f"bump support [{a}, {b}] not inside [0, {length}]")
    if target == 0:
        return PiecewisePolynomial.zero(length, order)

    core = Polynomial((-a, 1)) ** (order + 1) * Polynomial((b, -1)) ** (order + 1)
    mass = factorial(order + 1) ** 2 * (b - a) ** (2 * order + 3) / factorial(2 * order + 3)
    bump = core * (target / mass)

    points: List[Fraction] = [Fraction(0)]
    pieces: List[Polynomial] = []
    if a > 0:
        pieces.append(Polynomial())
        points.append(a)
    pieces.append(bump)
    points.append(b)
    if b < length:
        pieces.append(Polynomial())
        points.append(length)
    return PiecewisePolynomial(length, points, pieces, order)
