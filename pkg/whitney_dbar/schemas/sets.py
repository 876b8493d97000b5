import cmath
import math
from typing import Literal

from pydantic import Field, model_validator

from .base import RecordBaseModel


class SimilarityMap(RecordBaseModel):
    """w(z) = ratio * exp(i * angle) * z + shift"""

    ratio: float = Field(gt=0, lt=1)
    angle: float = 0.0
    shift: complex = 0j

    @property
    def factor(self) -> complex:
        return self.ratio * cmath.exp(1j * self.angle)

    def __call__(self, z: complex) -> complex:
        return self.factor * z + self.shift


class IfsSpec(RecordBaseModel):
    """
    Self-similar iterated function system.

    ``base`` is the point whose images represent the cells, ``diameter`` the
    diameter of the initial compact; it defaults to the diameter of the ball
    of radius max|t_k| / (1 - max rho_k) about 0, which contains the attractor.
    """

    name: str = "custom"
    maps: list[SimilarityMap] = Field(min_length=1, max_length=36)
    base: complex = 0j
    diameter: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _fill_diameter(self) -> "IfsSpec":
        if self.diameter is None:
            object.__setattr__(self, "diameter", 2.0 * self.attractor_radius)
        return self

    @property
    def max_ratio(self) -> float:
        return max(m.ratio for m in self.maps)

    @property
    def attractor_radius(self) -> float:
        return max(abs(m.shift) for m in self.maps) / (1.0 - self.max_ratio)

    @property
    def alphabet(self) -> str:
        return "0123456789abcdefghijklmnopqrstuvwxyz"[: len(self.maps)]

    def cell_diameter(self, level: int) -> float:
        return self.max_ratio**level * self.diameter

    def apply_word(self, word: str, z: complex | None = None) -> complex:
        """Image of ``z`` (default: base) under w_{a1} o w_{a2} o ... o w_{am}."""
        point = self.base if z is None else z
        for letter in reversed(word):
            point = self.maps[self.alphabet.index(letter)](point)
        return point

    def similarity_dimension(self) -> float:
        """Root s of sum rho_k^s = 1 (equal ratios in closed form)."""
        ratios = [m.ratio for m in self.maps]
        if len(set(ratios)) == 1:
            return math.log(len(ratios)) / math.log(1.0 / ratios[0])
        lo, hi = 0.0, 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if sum(r**mid for r in ratios) > 1.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def four_corner_cantor() -> IfsSpec:
    """Four maps of ratio 1/4 at the corners of the unit square."""
    corners = (0j, 0.75 + 0j, 0.75j, 0.75 + 0.75j)
    return IfsSpec(
        name="four-corner",
        maps=[SimilarityMap(ratio=0.25, shift=t) for t in corners],
        base=0.5 + 0.5j,
        diameter=math.sqrt(2.0),
    )


def middle_thirds_squared() -> IfsSpec:
    """Product of two middle-thirds Cantor sets in the unit square."""
    corners = (0j, 2.0 / 3.0 + 0j, 2.0j / 3.0, 2.0 / 3.0 + 2.0j / 3.0)
    return IfsSpec(
        name="middle-thirds-squared",
        maps=[SimilarityMap(ratio=1.0 / 3.0, shift=t) for t in corners],
        base=0.5 + 0.5j,
        diameter=math.sqrt(2.0),
    )


NAMED_IFS = {
    "four-corner": four_corner_cantor,
    "middle-thirds-squared": middle_thirds_squared,
}


class SampleDocument(RecordBaseModel):
    """JSON form of a SetSample or Region."""

    kind: Literal["ifs", "snowflake", "points", "region"]
    points: list[tuple[float, float]] = Field(default_factory=list)
    cells: list[str] = Field(default_factory=list)
    metadata: dict = Field(default_factory=dict)
