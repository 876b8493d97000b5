from typing import ClassVar

from pydantic import Field, model_validator

from .base import RecordBaseModel, TableBaseModel


#####################
### Jet modulus ###
#####################


class ModulusRow(RecordBaseModel):
    scale: float = Field(gt=0)
    sup_r: float | None = Field(default=None, ge=0, alias="sup_R")
    pair_count: int = Field(default=0, ge=0, exclude=True)

    @property
    def absent(self) -> bool:
        return self.sup_r is None


class ModulusTable(TableBaseModel[ModulusRow]):
    """Whitney remainder modulus, one row per scale (ascending)."""

    CSV_COLUMNS: ClassVar[tuple[str, ...]] = ("scale", "sup_R")

    @model_validator(mode="after")
    def _check_monotone(self) -> "ModulusTable":
        present = [r.sup_r for r in self.rows if r.sup_r is not None]
        if any(b < a for a, b in zip(present, present[1:], strict=False)):
            raise ValueError("sup_R must be non-decreasing in the scale")
        return self

    @property
    def scales(self) -> list[float]:
        return [r.scale for r in self.rows]

    @property
    def values(self) -> list[float | None]:
        return [r.sup_r for r in self.rows]


class DeterminacyRow(RecordBaseModel):
    index: int
    re: float
    im: float
    neighbors: int
    holo_re: float | None
    holo_im: float | None
    anti_re: float | None
    anti_im: float | None
    residual: float | None
    conditioning: float
    spread: float | None


class DeterminacyTable(TableBaseModel[DeterminacyRow]):
    CSV_COLUMNS: ClassVar[tuple[str, ...]] = (
        "index",
        "re",
        "im",
        "neighbors",
        "holo_re",
        "holo_im",
        "anti_re",
        "anti_im",
        "residual",
        "conditioning",
        "spread",
    )


class ApproxError(RecordBaseModel):
    """Uniform error of a flat (df = 0) approximation."""

    level: int
    uniform_error: float = Field(ge=0)
    cell_diameter: float = Field(ge=0)


class ApproxErrorTable(TableBaseModel[ApproxError]):
    CSV_COLUMNS: ClassVar[tuple[str, ...]] = ("level", "uniform_error", "cell_diameter")


##############
### Cauchy ###
##############


class ApproxReport(RecordBaseModel):
    delta: float = Field(gt=0)
    sup_error: float = Field(ge=0)
    dbar_residual: float = Field(ge=0)
    trunc_area: float = Field(ge=0)
    dbar_source: str = Field(default="exact", exclude=True)
    under_resolved: bool = Field(default=False, exclude=True)


class ApproxTable(TableBaseModel[ApproxReport]):
    CSV_COLUMNS: ClassVar[tuple[str, ...]] = (
        "delta",
        "sup_error",
        "dbar_residual",
        "trunc_area",
    )


class MaxPrincipleReport(RecordBaseModel):
    case: str = ""
    sup_boundary: float = Field(ge=0)
    sup_interior: float = Field(ge=0)
    passed: bool


class MaxPrincipleTable(TableBaseModel[MaxPrincipleReport]):
    CSV_COLUMNS: ClassVar[tuple[str, ...]] = ("case", "sup_boundary", "sup_interior", "passed")


class InversionRow(RecordBaseModel):
    h: float = Field(gt=0)
    nodes: int
    residual: float = Field(ge=0)


class InversionTable(TableBaseModel[InversionRow]):
    CSV_COLUMNS: ClassVar[tuple[str, ...]] = ("h", "nodes", "residual")


class CorrectionReport(RecordBaseModel):
    case: str = ""
    h: float = Field(gt=0)
    sup_correction: float = Field(ge=0)
    dbar_residual: float = Field(ge=0)


class CorrectionTable(TableBaseModel[CorrectionReport]):
    CSV_COLUMNS: ClassVar[tuple[str, ...]] = ("case", "h", "sup_correction", "dbar_residual")


#################
### Perimeter ###
#################


class PairingReport(RecordBaseModel):
    case: str = ""
    lhs: complex
    rhs_area: complex
    rhs_contour: complex
    residual: complex
    stokes_gap: float = Field(ge=0)
    scale: float = Field(ge=0)

    @property
    def residual_abs(self) -> float:
        return abs(self.residual)

    def csv_row(self) -> dict:
        return {
            "case": self.case,
            "lhs_re": self.lhs.real,
            "lhs_im": self.lhs.imag,
            "rhs_area_re": self.rhs_area.real,
            "rhs_area_im": self.rhs_area.imag,
            "rhs_contour_re": self.rhs_contour.real,
            "rhs_contour_im": self.rhs_contour.imag,
            "residual_abs": self.residual_abs,
            "stokes_gap": self.stokes_gap,
        }


class PairingTable(TableBaseModel[PairingReport]):
    CSV_COLUMNS: ClassVar[tuple[str, ...]] = (
        "case",
        "lhs_re",
        "lhs_im",
        "rhs_area_re",
        "rhs_area_im",
        "rhs_contour_re",
        "rhs_contour_im",
        "residual_abs",
        "stokes_gap",
    )

    def flat(self) -> list[dict]:
        return [row.csv_row() for row in self.rows]


class StabilitySeries(RecordBaseModel):
    """Pairings along a uniformly convergent sequence."""

    reports: list[PairingReport]
    sup_gaps: list[float]
    lhs_gaps: list[float]
    contour_gaps: list[float]
    bounds: list[float]
    within_bounds: bool


##################
### Commutator ###
##################


class ProfileRow(RecordBaseModel):
    scale: float = Field(gt=0)
    osc: float | None = Field(default=None, ge=0)
    angvar: float | None = Field(default=None, ge=0)

    @property
    def absent(self) -> bool:
        return self.angvar is None


class DiagonalProfile(TableBaseModel[ProfileRow]):
    """Diagonal regularity of a commutator kernel, one row per scale (ascending)."""

    CSV_COLUMNS: ClassVar[tuple[str, ...]] = ("scale", "osc", "angvar")

    has_diagonal: bool = True


class RegularityVerdict(RecordBaseModel):
    case: str = ""
    holomorphic_like: bool
    exponent: float | None
    smallest_angvar: float | None
    degraded: bool = False


class HolderFitReport(RecordBaseModel):
    """Fitted modulus exponent of a jet against the expected one."""

    case: str = ""
    exponent: float
    constant: float
    expected_exponent: float | None = None
    box_dimension: float | None = None
    endpoint_values: tuple[complex, complex] | None = None


###################
### Linear maps ###
###################


class ExtensionRow(RecordBaseModel):
    trial: int
    n: int
    dim: int
    accepted: bool
    restriction_error: float | None = Field(default=None, ge=0)
    oracle_gap: float | None = Field(default=None, ge=0)


class ExtensionTable(TableBaseModel[ExtensionRow]):
    CSV_COLUMNS: ClassVar[tuple[str, ...]] = (
        "trial",
        "n",
        "dim",
        "accepted",
        "restriction_error",
        "oracle_gap",
    )
