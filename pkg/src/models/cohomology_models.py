from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel

from src.models.common import FROZEN, Rational
from src.models.form_models import GraphForm


def bidegree_key(bidegree: Tuple[int, int]) -> str:
    return f"{bidegree[0]},{bidegree[1]}"


class ComponentDimensions(BaseModel):
    """Dolbeault numbers of one connected component."""
    model_config = FROZEN

    index: int
    genus: int
    boundary_count: int
    has_edges: bool
    h00: int
    h10: int
    h01: int
    h11: int

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.h00, self.h10, self.h01, self.h11)

    def closed_form(self) -> Tuple[int, int, int, int]:
        """The table predicted from genus and boundary size alone."""
        if self.boundary_count:
            return (1, self.genus + self.boundary_count - 1, self.genus, 0)
        return (1, self.genus, self.genus, 1 if self.has_edges else 0)


class DolbeaultTable(BaseModel):
    model_config = FROZEN

    graph: str
    components: List[ComponentDimensions]

    @property
    def total(self) -> Tuple[int, int, int, int]:
        return tuple(sum(c.as_tuple()[i] for c in self.components) for i in range(4))

    @property
    def matches_closed_form(self) -> bool:
        return all(c.as_tuple() == c.closed_form() for c in self.components)

    def dimension(self, bidegree: Tuple[int, int]) -> int:
        return self.total[{(0, 0): 0, (1, 0): 1, (0, 1): 2, (1, 1): 3}[bidegree]]


class FundamentalCycle(BaseModel):
    """Closed walk from a base vertex through one non-forest edge and back along the forest."""
    model_config = FROZEN

    edge: str
    base_vertex: str
    steps: List[Tuple[str, bool]]


class CohomologyBasis(BaseModel):
    """Explicit representatives of H^{p,q}, each list in coordinate order."""
    model_config = FROZEN

    graph: str
    h00: List[GraphForm]
    h10: List[GraphForm]
    h01: List[GraphForm]
    h11: List[GraphForm]
    cycles: List[FundamentalCycle]
    component_of_h11: List[int] = []

    def elements(self, bidegree: Tuple[int, int]) -> List[GraphForm]:
        return {(0, 0): self.h00, (1, 0): self.h10, (0, 1): self.h01, (1, 1): self.h11}[bidegree]


class DbarResult(BaseModel):
    """A d''-preimage, or the obstruction that prevents one."""
    model_config = FROZEN

    bidegree: Tuple[int, int]
    preimage: Optional[GraphForm] = None
    obstruction: List[Rational] = []

    @property
    def exact(self) -> bool:
        return self.preimage is not None


class PoincarePairing(BaseModel):
    model_config = FROZEN

    applicable: bool
    reason: str = ""
    scalars: List[Rational] = []
    scalar_gram: List[List[Rational]] = []
    gram: List[List[Rational]] = []
    determinant: Optional[Rational] = None
    perfect: bool = False


class PullbackMatrices(BaseModel):
    """Matrices of a pullback on each H^{p,q}: rows are source coordinates, columns target basis elements."""
    model_config = FROZEN

    map_name: str
    matrices: Dict[str, List[List[Rational]]]
    shapes: Dict[str, Tuple[int, int]]

    def matrix(self, bidegree: Tuple[int, int]) -> List[List[Fraction]]:
        return self.matrices[bidegree_key(bidegree)]
