from collections.abc import Callable
import logging
import math
import struct
from typing import Final, Self

import numpy as np
from pydantic import Field, field_validator, model_validator

from .exceptions import BudgetExceededError, InvalidInputError
from .schemas.base import ArrayBaseModel, RecordBaseModel, readonly
from .settings import get_settings


logger = logging.getLogger(__name__)

HEADER: Final = struct.Struct("<5d2Q")


class Grid(RecordBaseModel):
    """
    Uniform rectangle of square cells of side ``h``; nodes sit at cell centers.

    Node (row j, column i) is ``corner + (i + 1/2) h + 1j (j + 1/2) h``.
    """

    corner: complex
    width: float = Field(gt=0)
    height: float = Field(gt=0)
    h: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_counts(self) -> Self:
        for name, length in (("width", self.width), ("height", self.height)):
            ratio = length / self.h
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                raise ValueError(f"{name}/h must be an integer, got {ratio!r}")
        return self

    @classmethod
    def square(cls, center: complex, half_width: float, n: int) -> Self:
        """n x n grid on the square of half side ``half_width`` about ``center``."""
        h = 2.0 * half_width / n
        corner = center - half_width * (1 + 1j)
        return cls(corner=corner, width=n * h, height=n * h, h=h)

    @classmethod
    def covering(cls, points: np.ndarray, pad: float, h: float) -> Self:
        """Smallest grid of spacing ``h`` covering the bounding box padded by ``pad``."""
        lo_x = float(points.real.min()) - pad
        lo_y = float(points.imag.min()) - pad
        nx = math.ceil((float(points.real.max()) + pad - lo_x) / h)
        ny = math.ceil((float(points.imag.max()) + pad - lo_y) / h)
        return cls(corner=complex(lo_x, lo_y), width=nx * h, height=ny * h, h=h)

    @property
    def nx(self) -> int:
        return round(self.width / self.h)

    @property
    def ny(self) -> int:
        return round(self.height / self.h)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def check_budget(self, budget: int | None = None) -> None:
        budget = budget or get_settings().node_budget
        if self.size > budget:
            raise BudgetExceededError(f"Grid has {self.size} nodes, budget is {budget}")

    def x(self) -> np.ndarray:
        return self.corner.real + (np.arange(self.nx) + 0.5) * self.h

    def y(self) -> np.ndarray:
        return self.corner.imag + (np.arange(self.ny) + 0.5) * self.h

    def nodes(self) -> np.ndarray:
        xx, yy = np.meshgrid(self.x(), self.y())
        return xx + 1j * yy

    def corners(self) -> np.ndarray:
        """Cell corner lattice, shape (ny + 1, nx + 1)."""
        xs = self.corner.real + np.arange(self.nx + 1) * self.h
        ys = self.corner.imag + np.arange(self.ny + 1) * self.h
        xx, yy = np.meshgrid(xs, ys)
        return xx + 1j * yy

    def contains(self, points: np.ndarray, pad: float = 0.0) -> bool:
        return bool(
            np.all(points.real >= self.corner.real + pad)
            and np.all(points.real <= self.corner.real + self.width - pad)
            and np.all(points.imag >= self.corner.imag + pad)
            and np.all(points.imag <= self.corner.imag + self.height - pad)
        )

    def refine(self, factor: int = 2) -> Self:
        return self.model_copy(update={"h": self.h / factor})

    def translate(self, shift: complex) -> Self:
        return self.model_copy(update={"corner": self.corner + shift})

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        values = np.asarray(func(self.nodes()), dtype=complex)
        return GridFunction(grid=self, values=values)


class GridFunction(ArrayBaseModel):
    """Complex values at the nodes of a Grid, row-major (rows are y)."""

    grid: Grid
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex(cls, v: object) -> np.ndarray:
        return readonly(np.array(v, dtype=np.complex128))

    @model_validator(mode="after")
    def _check_shape(self) -> Self:
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("GridFunction values must be finite")
        return self

    @classmethod
    def zeros(cls, grid: Grid) -> Self:
        return cls(grid=grid, values=np.zeros(grid.shape, dtype=complex))

    def sup_norm(self, mask: np.ndarray | None = None) -> float:
        values = self.values if mask is None else self.values[mask]
        return float(np.max(np.abs(values))) if values.size else 0.0

    def masked(self, mask: np.ndarray) -> Self:
        return self.model_copy(update={"values": readonly(np.where(mask, self.values, 0))})

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(grid=self.grid, values=self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(grid=self.grid, values=self.values - other.values)

    def __rmul__(self, scalar: complex) -> "GridFunction":
        return GridFunction(grid=self.grid, values=scalar * self.values)

    def _check_same_grid(self, other: "GridFunction") -> None:
        if other.grid != self.grid:
            raise InvalidInputError("GridFunctions live on different grids")

    ######################
    ### Binary layout ###
    ######################

    def to_bytes(self) -> bytes:
        grid = self.grid
        header = HEADER.pack(
            grid.corner.real,
            grid.corner.imag,
            grid.width,
            grid.height,
            grid.h,
            grid.nx,
            grid.ny,
        )
        return header + interleaved_bytes(self.values)

    @classmethod
    def from_bytes(cls, payload: bytes) -> Self:
        if len(payload) < HEADER.size:
            raise InvalidInputError("Truncated GridFunction header")
        cre, cim, width, height, h, nx, ny = HEADER.unpack_from(payload)
        body = np.frombuffer(payload, dtype="<f8", offset=HEADER.size)
        if body.size != 2 * nx * ny:
            raise InvalidInputError(
                "GridFunction body has %d floats, expected %d" % (body.size, 2 * nx * ny)
            )
        values = (body[0::2] + 1j * body[1::2]).reshape(ny, nx)
        grid = Grid(corner=complex(cre, cim), width=width, height=height, h=h)
        return cls(grid=grid, values=values)


def interleaved_bytes(values: np.ndarray) -> bytes:
    """Row-major interleaved re/im little-endian float64."""
    flat = np.asarray(values, dtype=np.complex128).reshape(-1)
    out = np.empty(2 * flat.size, dtype="<f8")
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out.tobytes()
