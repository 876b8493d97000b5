"""
Commutator kernel K(z, w) = (b(z) - b(w)) / (z - w) on sampled sets and its
regularity near the diagonal.
"""

from collections.abc import Callable
import logging
from typing import Self

import numpy as np
from pydantic import field_validator, model_validator
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import pdist

from .exceptions import FitRefusedError, InvalidInputError
from .functions import WirtingerFunction
from .grid import interleaved_bytes
from .jets import Jet1
from .plane_sets import SetSample, as_xy
from .schemas.base import ArrayBaseModel, readonly
from .schemas.reports import DiagonalProfile, ProfileRow, RegularityVerdict
from .settings import get_settings


logger = logging.getLogger(__name__)

OSC_SLOPE_THRESHOLD = 0.5
ANGVAR_THRESHOLD = 0.2


class KernelMatrix(ArrayBaseModel):
    """Dense symmetric kernel; ``diagonal`` holds db(z_i) when known."""

    base: SetSample
    entries: np.ndarray
    diagonal: np.ndarray | None = None

    @field_validator("entries", "diagonal", mode="before")
    @classmethod
    def _as_complex(cls, v: object) -> np.ndarray | None:
        return None if v is None else readonly(np.array(v, dtype=np.complex128))

    @model_validator(mode="after")
    def _check(self) -> Self:
        n = len(self.base)
        if self.entries.shape != (n, n):
            raise ValueError(f"entries must be {n} x {n}")
        if self.diagonal is not None and self.diagonal.shape != (n,):
            raise ValueError("one diagonal value per point is required")
        return self

    @property
    def has_diagonal(self) -> bool:
        return self.diagonal is not None

    def to_bytes(self) -> bytes:
        """Row-major interleaved re/im float64; absent diagonal dumped as NaN."""
        full = np.array(self.entries)
        np.fill_diagonal(full, self.diagonal if self.has_diagonal else np.nan)
        return interleaved_bytes(full)


def build_kernel(
    b: Jet1 | WirtingerFunction | Callable[[np.ndarray], np.ndarray],
    sample: SetSample | None = None,
    cap: int | None = None,
    seed: int = 0,
) -> KernelMatrix:
    """
    K(i, j) = (b(z_i) - b(z_j)) / (z_i - z_j) for i != j. The diagonal is
    db(z_i) from a jet or a WirtingerFunction, absent for a bare callable.

    Samples above ``cap`` points are subsampled with ``seed``.
    """
    if isinstance(b, Jet1):
        if sample is not None and len(sample) != len(b):
            raise InvalidInputError("jet and sample sizes differ")
        sample = b.base
    if sample is None:
        raise InvalidInputError("build_kernel needs a sample")

    cap = cap or get_settings().kernel_cap
    keep = None
    if len(sample) > cap:
        logger.warning("Sample of %d points subsampled to %d (seed %d)", len(sample), cap, seed)
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(len(sample), size=cap, replace=False))
        sample = sample.permuted(keep)

    z = sample.points
    if isinstance(b, Jet1):
        values = b.values if keep is None else b.values[keep]
        diagonal = b.holo if keep is None else b.holo[keep]
    else:
        values = np.asarray(b(z), dtype=complex)
        diagonal = (
            np.asarray(b.d(z), dtype=complex) if isinstance(b, WirtingerFunction) else None
        )
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("symbol b has non-finite values on the sample")
    if diagonal is not None and not np.all(np.isfinite(diagonal)):
        diagonal = None

    upper = np.triu_indices(z.size, k=1)
    entries = np.zeros((z.size, z.size), dtype=complex)
    entries[upper] = (values[upper[0]] - values[upper[1]]) / (z[upper[0]] - z[upper[1]])
    entries = entries + entries.T
    if diagonal is not None:
        np.fill_diagonal(entries, diagonal)
    return KernelMatrix(base=sample, entries=entries, diagonal=diagonal)


def _diameter(values: np.ndarray) -> float:
    """Diameter of a finite set of complex numbers."""
    if values.size < 2:
        return 0.0
    xy = as_xy(values)
    if values.size > 32:
        try:
            xy = xy[ConvexHull(xy).vertices]
        except QhullError:  # collinear value sets
            span = np.ptp(xy, axis=0)
            axis = int(np.argmax(span))
            xy = xy[[int(np.argmin(xy[:, axis])), int(np.argmax(xy[:, axis]))]]
    return float(pdist(xy).max())


def diagonal_profile(kernel: KernelMatrix, scales: list[float]) -> DiagonalProfile:
    """
    Per scale s, over pairs with |z_i - z_j| <= s:
      osc(s)    = max |K(i, j) - db(z_i)|,
      angvar(s) = max over i of the diameter of {K(i, j)}.
    Rows with no pairs are absent.
    """
    grid = np.sort(np.asarray(scales, dtype=float))
    if grid.size == 0 or grid[0] <= 0:
        raise InvalidInputError("scales must be positive")
    z = kernel.base.points
    tree = cKDTree(as_xy(z))
    neighborhoods = tree.query_ball_point(as_xy(z), r=float(grid[-1]) * (1 + 1e-12))

    osc = np.zeros(grid.size)
    angvar = np.zeros(grid.size)
    pairs = np.zeros(grid.size, dtype=np.int64)
    for i, neighbors in enumerate(neighborhoods):
        others = np.array([j for j in sorted(neighbors) if j != i], dtype=np.int64)
        if others.size == 0:
            continue
        dist = np.abs(z[others] - z[i])
        row = kernel.entries[i, others]
        for k, s in enumerate(grid):
            within = dist <= s
            count = int(np.count_nonzero(within))
            if not count:
                continue
            pairs[k] += count
            angvar[k] = max(angvar[k], _diameter(row[within]))
            if kernel.has_diagonal:
                osc[k] = max(osc[k], float(np.abs(row[within] - kernel.diagonal[i]).max()))

    rows = [
        ProfileRow(
            scale=float(s),
            osc=float(o) if c and kernel.has_diagonal else None,
            angvar=float(a) if c else None,
        )
        for s, o, a, c in zip(grid, osc, angvar, pairs, strict=True)
    ]
    return DiagonalProfile(rows=rows, has_diagonal=kernel.has_diagonal)


def regularity_verdict(profile: DiagonalProfile) -> RegularityVerdict:
    """
    holomorphic-like iff the log-log slope of osc is >= 0.5 and the
    smallest-scale angvar is <= 0.2. Without a diagonal only angvar is used
    and the verdict is flagged degraded.
    """
    present = [r for r in profile.rows if not r.absent]
    if len(present) < 3:
        raise FitRefusedError(f"regularity_verdict needs 3 scale rows, got {len(present)}")
    smallest_angvar = present[0].angvar
    small_spread = smallest_angvar is not None and smallest_angvar <= ANGVAR_THRESHOLD

    if not profile.has_diagonal:
        logger.warning("Kernel has no diagonal data; verdict from angvar only")
        return RegularityVerdict(
            holomorphic_like=small_spread,
            exponent=None,
            smallest_angvar=smallest_angvar,
            degraded=True,
        )

    usable = [(r.scale, r.osc) for r in present if r.osc]
    if len(usable) < 3:
        # osc vanishes identically: the kernel is constant near the diagonal
        exponent = None
        steep = len(usable) == 0
    else:
        s, o = np.log(np.array(usable)).T
        exponent = float(np.polyfit(s, o, 1)[0])
        steep = exponent >= OSC_SLOPE_THRESHOLD
    return RegularityVerdict(
        holomorphic_like=steep and small_spread,
        exponent=exponent,
        smallest_angvar=smallest_angvar,
    )
