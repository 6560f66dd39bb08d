"""Conversions between exact univariate polynomials and sympy expressions."""
from fractions import Fraction
from typing import Dict, Sequence

from sympy import Expr, Integer, Piecewise, Poly, Rational, Symbol, expand, sympify

from src.utils.errors import PreconditionError
from src.utils.linalg import to_fraction
from src.utils.polynomial import Polynomial


def rational(value: Fraction) -> Rational:
    return Rational(value.numerator, value.denominator)


def polynomial_to_expr(p: Polynomial, variable: Expr) -> Expr:
    """p(variable) as a sympy expression with exact rational coefficients."""
    expr = Integer(0)
    for k, c in enumerate(p.coefficients):
        if c:
            expr += rational(c) * variable ** k
    return expr


def expr_to_polynomial(expr: Expr, variable: Symbol) -> Polynomial:
    """
    Read a sympy expression as a univariate polynomial.

    Args:
        expr: Expression whose only free symbol is variable.
        variable: The polynomial variable.

    Returns:
        The exact Polynomial.
    """
    expr = expand(sympify(expr))
    stray = expr.free_symbols - {variable}
    if stray:
        raise PreconditionError(f"expression {expr} depends on {sorted(map(str, stray))} besides {variable}")
    coefficients = Poly(expr, variable).all_coeffs()
    return Polynomial(to_fraction(c) for c in reversed(coefficients))


def substitute_affine(expr: Expr, coordinates: Sequence[Symbol], base: Sequence[Fraction],
                      slopes: Sequence[Fraction], variable: Symbol) -> Expr:
    """Restrict a multivariate expression to the line base + variable * slopes."""
    mapping: Dict[Symbol, Expr] = {
        x: rational(b) + rational(s) * variable for x, b, s in zip(coordinates, base, slopes)
    }
    return expand(sympify(expr).xreplace(mapping))


def resolve_branches(expr: Expr, coordinates: Sequence[Symbol], start: Sequence[Fraction],
                     end: Sequence[Fraction]) -> Expr:
    """
    Replace every Piecewise in expr by the branch that holds on the whole segment [start, end].

    Args:
        expr: Expression in the coordinates, possibly piecewise.
        coordinates: The coordinates x1..xn.
        start: One end of the segment.
        end: The other end.

    Returns:
        A Piecewise-free expression equal to expr on the segment.
    """
    expr = sympify(expr)
    if not expr.has(Piecewise):
        return expr
    middle = [(a + b) / 2 for a, b in zip(start, end)]

    def holds(condition, point: Sequence[Fraction]) -> bool:
        return bool(sympify(condition).xreplace({x: rational(p) for x, p in zip(coordinates, point)}))

    def branch(piecewise: Piecewise) -> Expr:
        for value, condition in piecewise.args:
            if holds(condition, middle):
                if not (holds(condition, start) and holds(condition, end)):
                    raise PreconditionError(
                        f"segment from {list(map(str, start))} to {list(map(str, end))} crosses the break of {piecewise}"
                    )
                return value
        raise PreconditionError(f"no branch of {piecewise} covers the segment through {list(map(str, middle))}")

    return expr.replace(lambda node: isinstance(node, Piecewise), branch)


def _check_rational_polynomial(expr: Expr, coordinates: Sequence[Symbol], text: str) -> None:
    if isinstance(expr, Piecewise):
        for value, condition in expr.args:
            _check_rational_polynomial(value, coordinates, text)
            if sympify(condition).free_symbols - set(coordinates):
                raise PreconditionError(f"branch condition {condition} in {text!r} uses unknown symbols")
        return
    if coordinates and expr.is_polynomial(*coordinates):
        coefficients = Poly(expr, *coordinates).coeffs()
    elif expr.is_number:
        coefficients = [expr]
    else:
        coefficients = None
    if coefficients is None or not all(c.is_rational for c in coefficients):
        raise PreconditionError(f"{text!r} is not a polynomial with rational coefficients")


def parse_expr_exact(text: str, coordinates: Sequence[Symbol]) -> Expr:
    """Parse a polynomial, or a Piecewise of polynomials, in the given coordinates with exact rationals."""
    namespace = {str(x): x for x in coordinates}
    expr = sympify(text, locals=namespace, rational=True)
    stray = expr.free_symbols - set(coordinates)
    if stray:
        raise PreconditionError(f"unknown symbols {sorted(map(str, stray))} in {text!r}")
    _check_rational_polynomial(expr, coordinates, text)
    return expr if isinstance(expr, Piecewise) else expand(expr)
