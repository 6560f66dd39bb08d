"""Exact rational linear algebra on top of sympy matrices."""
from fractions import Fraction
from typing import List, Optional, Sequence

from sympy import Matrix, Rational, zeros

RationalMatrix = List[List[Fraction]]


def to_sympy(rows: Sequence[Sequence[Fraction]], n_cols: Optional[int] = None) -> Matrix:
    """
    Build a sympy Matrix from nested rational rows.

    Args:
        rows: Row-major entries.
        n_cols: Column count, needed when rows is empty.

    Returns:
        Exact sympy Matrix.
    """
    if not rows:
        return zeros(0, n_cols or 0)
    return Matrix([[Rational(int(Fraction(x).numerator), int(Fraction(x).denominator)) for x in row] for row in rows])


def to_fraction(value) -> Fraction:
    r = Rational(value)
    return Fraction(int(r.p), int(r.q))


def from_sympy(m: Matrix) -> RationalMatrix:
    return [[to_fraction(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]


def rank(rows: Sequence[Sequence[Fraction]], n_cols: Optional[int] = None) -> int:
    m = to_sympy(rows, n_cols)
    if m.rows == 0 or m.cols == 0:
        return 0
    return m.rank()


def nullspace(rows: Sequence[Sequence[Fraction]], n_cols: int) -> List[List[Fraction]]:
    """
    Basis of {x : A x = 0}, in sympy's reduced-row-echelon order.

    Args:
        rows: Matrix A row by row (may be empty).
        n_cols: Number of unknowns.

    Returns:
        List of basis vectors.
    """
    if n_cols == 0:
        return []
    if not rows:
        return [[Fraction(int(i == j)) for j in range(n_cols)] for i in range(n_cols)]
    return [[to_fraction(v[i]) for i in range(n_cols)] for v in to_sympy(rows).nullspace()]


def solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction], n_cols: int) -> Optional[List[Fraction]]:
    """
    Solve A x = b exactly, setting free unknowns to zero.

    Args:
        rows: Matrix A row by row.
        rhs: Right-hand side b.
        n_cols: Number of unknowns.

    Returns:
        A solution vector, or None when the system is inconsistent.
    """
    if not rows:
        return [Fraction(0)] * n_cols
    augmented = to_sympy([list(r) + [b] for r, b in zip(rows, rhs)])
    reduced, pivots = augmented.rref()
    if n_cols in pivots:
        return None
    x = [Fraction(0)] * n_cols
    for i, col in enumerate(pivots):
        x[col] = to_fraction(reduced[i, n_cols])
    return x


def determinant(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    if not rows:
        return Fraction(1)
    return to_fraction(to_sympy(rows).det())


def matmul(a: RationalMatrix, b: RationalMatrix, n_cols: int) -> RationalMatrix:
    """Product a·b of exact matrices; n_cols is the column count of b (kept for empty factors)."""
    inner = len(b)
    return [[sum((a[i][k] * b[k][j] for k in range(inner)), Fraction(0)) for j in range(n_cols)] for i in range(len(a))]


def identity(n: int) -> RationalMatrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
