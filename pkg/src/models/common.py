"""Field types shared by the pydantic models."""
from fractions import Fraction
from typing import Annotated, Any

from pydantic import BeforeValidator, ConfigDict

from src.utils.polynomial import as_fraction


def _to_fraction(value: Any) -> Fraction:
    return as_fraction(value)


Rational = Annotated[Fraction, BeforeValidator(_to_fraction)]

FROZEN = ConfigDict(frozen=True, arbitrary_types_allowed=True)
