"""
Whitney C^1 jets on set samples.

A jet carries f(z_i) and the differential df_{z_i} = (holo_i, anti_i), i.e.
df_z(v) = holo * v + anti * conj(v), at every sample point.
"""

from collections.abc import Callable
import logging
import math
from typing import Self

import numpy as np
from pydantic import field_validator, model_validator
from scipy import linalg
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from . import _kernels
from .exceptions import BudgetExceededError, FitRefusedError, InvalidInputError
from .functions import WirtingerFunction
from .plane_sets import SetSample, SnowflakeCurve, as_xy
from .schemas.base import ArrayBaseModel, readonly
from .schemas.reports import (
    DeterminacyRow,
    DeterminacyTable,
    ModulusRow,
    ModulusTable,
)
from .settings import get_settings
from .wirtinger import RealLinearMap, from_real_matrix


logger = logging.getLogger(__name__)


class Jet1(ArrayBaseModel):
    base: SetSample
    values: np.ndarray
    holo: np.ndarray
    anti: np.ndarray

    @field_validator("values", "holo", "anti", mode="before")
    @classmethod
    def _as_complex(cls, v: object) -> np.ndarray:
        return readonly(np.atleast_1d(np.array(v, dtype=np.complex128)))

    @model_validator(mode="after")
    def _check(self) -> Self:
        n = len(self.base)
        for name in ("values", "holo", "anti"):
            array = getattr(self, name)
            if array.shape != (n,):
                raise ValueError(f"{name} needs one entry per base point ({n})")
            if not np.all(np.isfinite(array)):
                raise ValueError(f"{name} must be finite")
        return self

    def __len__(self) -> int:
        return self.values.size

    def diff(self, i: int) -> RealLinearMap:
        return RealLinearMap(holo=[self.holo[i]], anti=[self.anti[i]])

    @property
    def diffs(self) -> list[RealLinearMap]:
        return [self.diff(i) for i in range(len(self))]

    def relabeled(self, order: np.ndarray) -> Self:
        return type(self)(
            base=self.base.permuted(order),
            values=self.values[order],
            holo=self.holo[order],
            anti=self.anti[order],
        )

    def translated(self, shift: complex) -> Self:
        return self.model_copy(update={"base": self.base.translated(shift)})

    def to_json_dict(self) -> dict:
        return {
            "base": self.base.to_document().model_dump(mode="json"),
            "values": [[z.real, z.imag] for z in self.values.tolist()],
            "diffs": [
                [d.holo[0].real, d.holo[0].imag, d.anti[0].real, d.anti[0].imag]
                for d in self.diffs
            ],
        }


class FlatApproximation(ArrayBaseModel):
    """A jet with df = 0 approximating a continuous function, with its uniform error."""

    jet: Jet1
    level: int
    uniform_error: float
    cell_diameter: float


def _finite(array: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"non-finite {what} at some sample point")
    return array


def restrict_smooth(func: WirtingerFunction, sample: SetSample) -> Jet1:
    z = sample.points
    return Jet1(
        base=sample,
        values=_finite(func(z), "value"),
        holo=_finite(func.d(z), "dz derivative"),
        anti=_finite(func.dbar(z), "dzbar derivative"),
    )


def whitney_modulus(
    jet: Jet1,
    scales: list[float],
    accelerate: bool = False,
    pair_budget: int | None = None,
) -> ModulusTable:
    """
    sup of R(z, w) = |f(z) - f(w) - df_w(z - w)| / |z - w| over ordered pairs
    with |z - w| <= s, for each scale s. Rows are ascending in s.

    ``accelerate`` scans only kd-tree candidate pairs within the largest scale;
    the output is identical to the full scan.
    """
    n = len(jet)
    if n < 2:
        raise InvalidInputError("whitney_modulus needs at least 2 base points")
    grid = np.sort(np.asarray(scales, dtype=float))
    if grid.size == 0 or grid[0] <= 0:
        raise InvalidInputError("scales must be positive")

    points = np.ascontiguousarray(jet.base.points)
    args = (points, np.ascontiguousarray(jet.values), np.ascontiguousarray(jet.holo))
    anti = np.ascontiguousarray(jet.anti)
    best, counts = _kernels.empty_scan(n, grid.size)
    budget = pair_budget or get_settings().pair_budget

    if accelerate:
        indptr, indices = _neighbor_lists(points, float(grid[-1]) * (1 + 1e-12))
        if indices.size > budget:
            raise BudgetExceededError(f"{indices.size} candidate pairs, budget is {budget}")
        with _kernels.KERNEL_LOCK:
            _kernels.remainder_scan_csr(*args, anti, grid, indptr, indices, best, counts)
    else:
        if n * (n - 1) > budget:
            raise BudgetExceededError(f"{n * (n - 1)} ordered pairs, budget is {budget}")
        with _kernels.KERNEL_LOCK:
            _kernels.remainder_scan_all(*args, anti, grid, best, counts)

    per_scale = np.maximum.accumulate(best.max(axis=0))
    seen = np.cumsum(counts.sum(axis=0))
    rows = [
        ModulusRow(scale=float(s), sup_r=float(v) if c else None, pair_count=int(c))
        for s, v, c in zip(grid, per_scale, seen, strict=True)
    ]
    for row in rows:
        if row.absent:
            logger.warning("No pairs within scale %.3e; row flagged absent", row.scale)
    return ModulusTable(rows=rows)


def _neighbor_lists(points: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    tree = cKDTree(as_xy(points))
    lists = tree.query_ball_point(as_xy(points), r=radius, return_sorted=True)
    lengths = np.fromiter((len(x) for x in lists), dtype=np.int64, count=len(lists))
    indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    indices = (
        np.concatenate([np.asarray(x, dtype=np.int64) for x in lists])
        if lengths.sum()
        else np.zeros(0, dtype=np.int64)
    )
    return indptr, indices


def holder_fit(table: ModulusTable) -> tuple[float, float]:
    """Least-squares line log sup_R = alpha log s + log C; returns (alpha, C)."""
    usable = [(r.scale, r.sup_r) for r in table.rows if r.sup_r]
    if len(usable) < 3:
        raise FitRefusedError(f"holder_fit needs 3 rows with positive sup_R, got {len(usable)}")
    s, v = np.log(np.array(usable)).T
    slope, intercept = np.polyfit(s, v, 1)
    return float(slope), float(math.exp(intercept))


def dbar_defect(jet: Jet1) -> tuple[float, complex]:
    """max_i |dbar f_i| and the point where it is attained."""
    if len(jet) == 0:
        raise InvalidInputError("dbar_defect needs a nonempty jet")
    moduli = np.abs(jet.anti)
    k = int(np.argmax(moduli))
    return float(moduli[k]), complex(jet.base.points[k])


def locally_constant_jet(
    sample: SetSample,
    func: Callable[[np.ndarray], np.ndarray],
    level: int,
) -> FlatApproximation:
    """
    Constant on each depth-``level`` cell, equal to f at the cell's
    representative (the image of the IFS base point under the cell word); df = 0.
    """
    if sample.cells is None or sample.spec is None or sample.depth is None:
        raise InvalidInputError("locally_constant_jet needs an IFS sample with cell words")
    if not 0 <= level <= sample.depth:
        raise InvalidInputError(f"level {level} outside [0, {sample.depth}]")

    prefixes = [word[:level] for word in sample.cells]
    unique = sorted(set(prefixes))
    representatives = np.array([sample.spec.apply_word(p) for p in unique])
    cell_values = np.asarray(func(representatives), dtype=complex)
    lookup = dict(zip(unique, cell_values.tolist(), strict=True))
    values = np.array([lookup[p] for p in prefixes], dtype=complex)

    exact = np.asarray(func(sample.points), dtype=complex)
    error = float(np.max(np.abs(exact - values)))
    logger.debug("Locally constant level %d: %d cells, error %.3e", level, len(unique), error)
    zeros = np.zeros(len(sample), dtype=complex)
    return FlatApproximation(
        jet=Jet1(base=sample, values=values, holo=zeros, anti=zeros),
        level=level,
        uniform_error=error,
        cell_diameter=sample.spec.cell_diameter(level),
    )


def snowflake_zero_diff_jet(curve: SnowflakeCurve) -> Jet1:
    """f(z(t)) = t with df = 0; Whitney modulus ~ s^(1/alpha - 1)."""
    zeros = np.zeros(curve.points.size, dtype=complex)
    return Jet1(base=curve.to_sample(), values=curve.params, holo=zeros, anti=zeros)


def snowflake_flat_approx(
    curve: SnowflakeCurve,
    func: Callable[[np.ndarray], np.ndarray],
    level: int,
) -> FlatApproximation:
    """
    f on the curve approximated by a jet with df = 0 whose values are piecewise
    linear in the curve parameter between the level-``level`` vertices.
    """
    if not 0 <= level <= curve.depth:
        raise InvalidInputError(f"level {level} outside [0, {curve.depth}]")
    stride = 4 ** (curve.depth - level)
    vertex_values = np.asarray(func(curve.points[::stride]), dtype=complex)
    vertex_params = curve.params[::stride]
    values = np.interp(curve.params, vertex_params, vertex_values.real) + 1j * np.interp(
        curve.params, vertex_params, vertex_values.imag
    )
    exact = np.asarray(func(curve.points), dtype=complex)
    zeros = np.zeros(curve.points.size, dtype=complex)
    return FlatApproximation(
        jet=Jet1(base=curve.to_sample(), values=values, holo=zeros, anti=zeros),
        level=level,
        uniform_error=float(np.max(np.abs(exact - values))),
        cell_diameter=curve.ratio**level,
    )


def determinacy_scan(jet: Jet1, scale: float, cutoff: float = 1e-9) -> DeterminacyTable:
    """
    Differential determined by the values alone: per point, the real-linear map
    best fitting f(z_j) - f(z_i) ~ L(z_j - z_i) over neighbors within ``scale``.

    ``conditioning`` = sigma_min / sigma_max of the neighbor-difference system;
    below ``cutoff`` some direction is undetermined and no fit is reported.

    ``spread`` is the diameter of the quotients (f(z_j) - f(z_i)) / (z_j - z_i).
    Quotient j is the one complex d that neighbor j admits exactly; a single d
    fits every neighbor with remainder r only if spread <= 2 r.
    """
    points = jet.base.points
    tree = cKDTree(as_xy(points))
    rows = []
    for i, neighbors in enumerate(tree.query_ball_point(as_xy(points), r=scale)):
        others = np.array([j for j in sorted(neighbors) if j != i], dtype=np.int64)
        dz = points[others] - points[i]
        df = jet.values[others] - jet.values[i]
        system = np.column_stack([dz.real, dz.imag])
        sigma = linalg.svdvals(system) if others.size else np.zeros(2)
        conditioning = float(sigma[-1] / sigma[0]) if others.size >= 2 and sigma[0] else 0.0
        spread = float(pdist(as_xy(df / dz)).max(initial=0.0)) if others.size else None

        fit: dict = dict.fromkeys(("holo_re", "holo_im", "anti_re", "anti_im", "residual"))
        if conditioning > cutoff:
            coeffs, *_ = linalg.lstsq(system, np.column_stack([df.real, df.imag]))
            diff = from_real_matrix(coeffs.T)
            residual = np.abs(df - diff(dz)) / np.abs(dz)
            fit = {
                "holo_re": float(diff.holo[0].real),
                "holo_im": float(diff.holo[0].imag),
                "anti_re": float(diff.anti[0].real),
                "anti_im": float(diff.anti[0].imag),
                "residual": float(residual.max()),
            }
        rows.append(
            DeterminacyRow(
                index=i,
                re=float(points[i].real),
                im=float(points[i].imag),
                neighbors=int(others.size),
                conditioning=conditioning,
                spread=spread,
                **fit,
            )
        )
    return DeterminacyTable(rows=rows)
