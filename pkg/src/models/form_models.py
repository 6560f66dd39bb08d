from typing import Dict, Tuple

from pydantic import BaseModel

from src.models.common import FROZEN, Rational
from src.utils.errors import ReferentialError
from src.utils.polynomial import PiecewisePolynomial

BIDEGREES = ((0, 0), (1, 0), (0, 1), (1, 1))


class GraphForm(BaseModel):
    """A (p,q)-form: one coefficient per unoriented edge on its canonical orientation."""
    model_config = FROZEN

    graph: str
    bidegree: Tuple[int, int]
    coefficients: Dict[str, PiecewisePolynomial]
    vertex_values: Dict[str, Rational] = {}
    order: int = 3

    @property
    def degree(self) -> int:
        return self.bidegree[0] + self.bidegree[1]

    def coefficient(self, edge_id: str) -> PiecewisePolynomial:
        try:
            return self.coefficients[edge_id]
        except KeyError:
            raise ReferentialError(f"form on {self.graph!r} has no coefficient for edge {edge_id!r}") from None

    def same_as(self, other: "GraphForm") -> bool:
        """Equality as forms, ignoring smoothness orders."""
        return (
            self.bidegree == other.bidegree
            and self.coefficients == other.coefficients
            and self.vertex_values == other.vertex_values
        )


class IntegralComparison(BaseModel):
    """Two independently computed integrals that must agree."""
    model_config = FROZEN

    lhs: Rational
    rhs: Rational

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs
