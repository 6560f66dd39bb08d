from typing import List, Tuple

from pydantic import BaseModel, field_validator, model_validator

from src.models.cohomology_models import DolbeaultTable
from src.models.common import FROZEN, Rational
from src.models.graph_models import WeightedMetricGraph


class SkeletonComponent(BaseModel):
    """Irreducible component of the special fibre; non-proper components become boundary."""
    model_config = FROZEN

    id: str
    proper: bool = True


class SingularPoint(BaseModel):
    """Node where two distinct components meet."""
    model_config = FROZEN

    id: str
    first: str
    second: str
    residue_degree: int = 1
    modulus_valuation: Rational

    @field_validator("residue_degree")
    @classmethod
    def _positive_degree(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"residue degree must be a positive integer, got {value}")
        return value

    @field_validator("modulus_valuation")
    @classmethod
    def _positive_valuation(cls, value):
        if value <= 0:
            raise ValueError(f"modulus valuation must be positive, got {value}")
        return value


class SkeletonDescription(BaseModel):
    """Combinatorial data of a strictly semistable reduction."""
    model_config = FROZEN

    name: str = "skeleton"
    components: Tuple[SkeletonComponent, ...]
    singular_points: Tuple[SingularPoint, ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "SkeletonDescription":
        if not self.components:
            raise ValueError("a skeleton needs at least one component")
        known = {c.id for c in self.components}
        if len(known) != len(self.components):
            raise ValueError("duplicate component ids")
        if len({p.id for p in self.singular_points}) != len(self.singular_points):
            raise ValueError("duplicate singular point ids")
        for p in self.singular_points:
            for c in (p.first, p.second):
                if c not in known:
                    raise ValueError(f"singular point {p.id!r} lies on unknown component {c!r}")
            if p.first == p.second:
                raise ValueError(f"singular point {p.id!r} joins component {p.first!r} to itself")
        return self


class CurveCohomologyTable(BaseModel):
    """Dolbeault numbers of a curve read off its skeleton."""
    model_config = FROZEN

    skeleton: str
    graph: WeightedMetricGraph
    table: DolbeaultTable
    genus: List[int]
    boundary_count: List[int]
