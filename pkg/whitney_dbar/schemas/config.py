from enum import StrEnum
import math
from pathlib import Path
from typing import Literal, Self

from pydantic import Field, field_validator, model_validator

from .base import RecordBaseModel
from .sets import NAMED_IFS


ExperimentName = Literal[
    "cauchy-inversion",
    "commutator-scan",
    "dbar-correction",
    "extend-linear",
    "holo-approx",
    "locally-constant",
    "max-principle",
    "perimeter",
    "snowflake-jet",
    "whitney-determinacy",
]


class FunctionSymbol(StrEnum):
    Z = "z"
    CONJ = "conj(z)"
    Z_SQUARED = "z^2"
    MODULUS_SQUARED = "z*conj(z)"
    BUMP = "bump"
    KOCH_PARAMETER = "koch-parameter"
    POLYNOMIAL = "polynomial"


class SetConfig(RecordBaseModel):
    """
    Sample of the compact set. ``kind`` selects which of the remaining
    fields are read; ``file`` loads a SetSample JSON document from ``path``.
    """

    kind: Literal["ifs", "snowflake", "circle", "grid", "file"]
    ifs: str = "four-corner"
    depth: int = Field(default=6, ge=0, le=16)
    beta: float = Field(default=math.pi / 3, gt=0, lt=math.pi / 2)
    n: int = Field(default=256, ge=1)
    radius: float = Field(default=1.0, gt=0)
    spacing: float = Field(default=1.0 / 16, gt=0)
    path: Path | None = None

    @model_validator(mode="after")
    def _check_kind(self) -> Self:
        if self.kind == "ifs" and self.ifs not in NAMED_IFS:
            raise ValueError(f"Unknown IFS {self.ifs!r}; known: {sorted(NAMED_IFS)}")
        if self.kind == "file" and self.path is None:
            raise ValueError("set kind 'file' needs a path")
        return self


class GridConfig(RecordBaseModel):
    corner: tuple[float, float] = (-1.0, -1.0)
    nx: int = Field(default=256, ge=3)
    ny: int = Field(default=256, ge=3)
    h: float = Field(default=2.0 / 256, gt=0)


class RegionConfig(RecordBaseModel):
    kind: Literal["disk", "square", "polygon"]
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = Field(default=1.0, gt=0)
    corner: tuple[float, float] = (0.0, 0.0)
    side: float = Field(default=1.0, gt=0)
    vertices: list[tuple[float, float]] | None = None

    @model_validator(mode="after")
    def _check_vertices(self) -> Self:
        if self.kind == "polygon" and (self.vertices is None or len(self.vertices) < 3):
            raise ValueError("polygon regions need at least 3 vertices")
        return self


class BumpConfig(RecordBaseModel):
    """Center and radius used whenever the ``bump`` symbol is resolved."""

    center: tuple[float, float] = (0.0, 0.0)
    radius: float = Field(default=1.0, gt=0)


class ExperimentConfig(RecordBaseModel):
    """
    One experiment run.

    ``functions`` lists one case per symbol; ``deltas`` and ``scales`` are
    positive and strictly descending.
    """

    experiment: ExperimentName
    sample: SetConfig | None = Field(default=None, alias="set")
    grid: GridConfig | None = None
    region: RegionConfig | None = None
    functions: list[FunctionSymbol] = Field(default_factory=lambda: [FunctionSymbol.Z])
    coefficients: list[tuple[float, float]] | None = None
    bump: BumpConfig = Field(default_factory=BumpConfig)
    deltas: list[float] = Field(default_factory=list)
    scales: list[float] = Field(default_factory=list)
    levels: list[int] = Field(default_factory=list)
    refinements: int = Field(default=0, ge=0, le=4)
    trials: int = Field(default=100, ge=1)
    dimension: int = Field(default=3, ge=1, le=8)
    method: Literal["fft", "direct"] = "fft"
    dbar_source: Literal["exact", "fd"] = "exact"
    dump_grids: bool = False
    output_dir: Path = Path("results")
    seed: int = Field(default=0, ge=0)

    @field_validator("deltas", "scales")
    @classmethod
    def _positive_descending(cls, v: list[float]) -> list[float]:
        if any(not math.isfinite(x) or x <= 0 for x in v):
            raise ValueError("values must be positive and finite")
        if any(b >= a for a, b in zip(v, v[1:], strict=False)):
            raise ValueError("values must be sorted strictly descending")
        return v

    @field_validator("levels")
    @classmethod
    def _nonnegative(cls, v: list[int]) -> list[int]:
        if any(x < 0 for x in v):
            raise ValueError("levels must be nonnegative")
        return v

    @model_validator(mode="after")
    def _check_sections(self) -> Self:
        needs = REQUIRED_SECTIONS[self.experiment]
        missing = [name for name in needs if not getattr(self, _FIELD.get(name, name))]
        if missing:
            raise ValueError(f"experiment {self.experiment!r} needs: {', '.join(missing)}")
        if len(set(self.functions)) != len(self.functions):
            raise ValueError("function symbols must be unique")
        if FunctionSymbol.POLYNOMIAL in self.functions and not self.coefficients:
            raise ValueError("symbol 'polynomial' needs coefficients")
        if FunctionSymbol.KOCH_PARAMETER in self.functions and (
            self.sample is None or self.sample.kind != "snowflake"
        ):
            raise ValueError("symbol 'koch-parameter' needs a snowflake set")
        if self.experiment == "dbar-correction" and len(self.functions) != 2:
            raise ValueError("dbar-correction takes exactly two functions: b and h")
        if self.experiment == "snowflake-jet" and self.sample.kind != "snowflake":
            raise ValueError("snowflake-jet needs a snowflake set")
        if self.experiment == "locally-constant" and self.sample.kind != "ifs":
            raise ValueError("locally-constant needs an IFS set")
        if self.sample is not None and self.levels and max(self.levels) > self.sample.depth:
            raise ValueError(f"levels must not exceed the set depth {self.sample.depth}")
        return self


_FIELD = {"set": "sample"}

REQUIRED_SECTIONS: dict[str, tuple[str, ...]] = {
    "cauchy-inversion": ("grid",),
    "commutator-scan": ("set", "scales"),
    "dbar-correction": ("grid",),
    "extend-linear": (),
    "holo-approx": ("set", "grid", "deltas"),
    "locally-constant": ("set", "levels"),
    "max-principle": ("region",),
    "perimeter": ("region", "grid"),
    "snowflake-jet": ("set", "scales"),
    "whitney-determinacy": ("set", "scales"),
}
