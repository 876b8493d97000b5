"""
Grid Wirtinger calculus and the planar Cauchy transform

    C[g](z) = -(1/pi) ∬ g(w) / (w - z) dA(w),

a right inverse of dbar. g is taken constant on each grid cell and the kernel
is integrated exactly over every cell, including the one containing z.
"""

from collections.abc import Callable
import logging
import math
from typing import Literal

import numpy as np
from scipy import optimize, signal

from . import _kernels
from .exceptions import InvalidInputError, NumericalContractError
from .functions import WirtingerFunction
from .grid import Grid, GridFunction
from .plane_sets import BoundaryCurve, Region, SetSample, delta_mask
from .schemas.reports import (
    ApproxReport,
    CorrectionReport,
    InversionRow,
    InversionTable,
    MaxPrincipleReport,
)


logger = logging.getLogger(__name__)

Method = Literal["fft", "direct"]


def dbar_fd(u: GridFunction) -> GridFunction:
    """(du/dx + i du/dy) / 2: centered inside, second-order one-sided on the boundary ring."""
    grid = u.grid
    if min(grid.shape) < 3:
        raise InvalidInputError("dbar_fd needs a grid of at least 3 x 3 nodes")
    du_dy, du_dx = np.gradient(u.values, grid.h, edge_order=2)
    return GridFunction(grid=grid, values=0.5 * (du_dx + 1j * du_dy))


def interior_mask(grid: Grid, ring: int = 1) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    mask[ring:-ring, ring:-ring] = True
    return mask


def corner_weights(g: GridFunction, support_mask: np.ndarray | None = None) -> np.ndarray:
    """
    Summation by parts of sum_cells g_c (P(c11) - P(c01) - P(c10) + P(c00)):
    the weight at corner (J, K) is g[J-1,K-1] - g[J-1,K] - g[J,K-1] + g[J,K],
    g taken as zero outside the grid (and outside ``support_mask``).
    """
    values = g.values if support_mask is None else np.where(support_mask, g.values, 0)
    padded = np.pad(values, 1)
    return padded[:-1, :-1] - padded[:-1, 1:] - padded[1:, :-1] + padded[1:, 1:]


def evaluate_transform(
    g: GridFunction,
    points: np.ndarray,
    support_mask: np.ndarray | None = None,
) -> np.ndarray:
    """C[g] at arbitrary points by the cell-exact sum."""
    points = np.asarray(points, dtype=complex)
    weights = corner_weights(g, support_mask).reshape(-1)
    corners = g.grid.corners().reshape(-1)
    keep = weights != 0
    out = np.zeros(points.size, dtype=complex)
    with _kernels.KERNEL_LOCK:
        _kernels.corner_sum(
            np.ascontiguousarray(points.reshape(-1)),
            np.ascontiguousarray(corners[keep]),
            np.ascontiguousarray(weights[keep]),
            out,
        )
    return (-out / math.pi).reshape(points.shape)


def offset_kernel(grid: Grid) -> np.ndarray:
    """
    I[a, b] = ∬_cell 1 / (w - z) dA over the cell whose center is offset by
    (-(b - nx + 1), -(a - ny + 1)) * h from the node z, laid out for convolution.
    """
    ny, nx = grid.shape
    h = grid.h
    xs = (np.arange(-nx + 1, nx + 1) - 0.5) * h
    ys = (np.arange(-ny + 1, ny + 1) - 0.5) * h
    lattice = np.empty((ys.size, xs.size), dtype=complex)
    with _kernels.KERNEL_LOCK:
        _kernels.primitive_lattice(xs, ys, lattice)
    cells = lattice[1:, 1:] - lattice[1:, :-1] - lattice[:-1, 1:] + lattice[:-1, :-1]
    return cells[::-1, ::-1]


def cauchy_transform(
    g: GridFunction,
    support_mask: np.ndarray | None = None,
    method: Method = "fft",
) -> GridFunction:
    """
    C[g] at the grid nodes.

    ``direct`` evaluates the cell-exact sum node by node; ``fft`` convolves g
    with the same cell-exact offset kernel and agrees with it to rounding.
    """
    grid = g.grid
    grid.check_budget()
    values = g.values if support_mask is None else np.where(support_mask, g.values, 0)
    if method == "direct":
        result = evaluate_transform(GridFunction(grid=grid, values=values), grid.nodes())
    elif method == "fft":
        result = -signal.fftconvolve(values, offset_kernel(grid), mode="valid") / math.pi
    else:
        raise InvalidInputError(f"Unknown transform method {method!r}")
    if not np.all(np.isfinite(result)):
        raise NumericalContractError("Cauchy transform produced non-finite values")
    logger.debug("Cauchy transform (%s) on %dx%d grid", method, *grid.shape)
    return GridFunction(grid=grid, values=result)


def holo_approx(
    func: WirtingerFunction,
    sample: SetSample,
    delta: float,
    grid: Grid,
    dbar_source: Literal["exact", "fd"] = "exact",
    method: Method = "fft",
) -> tuple[GridFunction, ApproxReport]:
    """
    Holomorphic approximation of F on E: h = C[dbar F restricted to the
    complement of the delta-neighborhood of E].

    h is holomorphic on the neighborhood, and F = C[dbar F] differs from h on E
    only by the transform of the truncated piece.
    """
    if delta < grid.h:
        raise InvalidInputError(
            f"delta={delta} is below the grid spacing {grid.h}; truncation unresolved"
        )
    if not grid.contains(sample.points, pad=delta):
        raise InvalidInputError("sample (padded by delta) is not inside the grid")

    if dbar_source == "exact":
        dbar_f = grid.sample(func.dbar)
    else:
        dbar_f = dbar_fd(grid.sample(func))
    near = delta_mask(sample, delta, grid)
    outside = ~near.mask

    transform = cauchy_transform(dbar_f, support_mask=outside, method=method)
    on_sample = evaluate_transform(dbar_f, sample.points, support_mask=outside)
    sup_error = float(np.max(np.abs(func(sample.points) - on_sample)))

    close = delta_mask(sample, delta / 2, grid).mask & interior_mask(grid)
    residual = dbar_fd(transform).sup_norm(close)

    report = ApproxReport(
        delta=delta,
        sup_error=sup_error,
        dbar_residual=residual,
        trunc_area=near.area,
        dbar_source=dbar_source,
        under_resolved=near.under_resolved,
    )
    logger.info(
        "holo_approx delta=%.4g: sup error on E %.3e, dbar residual %.3e",
        delta,
        sup_error,
        residual,
    )
    return transform, report


def inversion_residual(
    g_func: Callable[[np.ndarray], np.ndarray],
    grid: Grid,
    method: Method = "fft",
) -> float:
    """sup over interior nodes of |dbar_fd(C[g]) - g|."""
    g = grid.sample(g_func)
    transform = cauchy_transform(g, method=method)
    return (dbar_fd(transform) - g).sup_norm(interior_mask(grid))


def inversion_study(
    g_func: Callable[[np.ndarray], np.ndarray],
    grid: Grid,
    refinements: int,
    method: Method = "fft",
) -> InversionTable:
    rows = []
    for _ in range(refinements + 1):
        rows.append(
            InversionRow(
                h=grid.h,
                nodes=grid.size,
                residual=inversion_residual(g_func, grid, method),
            )
        )
        grid = grid.refine()
    return InversionTable(rows=rows)


def dbar_correction(
    b: WirtingerFunction,
    holomorphic: WirtingerFunction,
    grid: Grid,
) -> tuple[GridFunction, CorrectionReport]:
    """
    u = C[h dbar b], so that b h - u is holomorphic wherever h is; the size of
    u measures how far b h is from holomorphic.
    """
    source = grid.sample(lambda z: holomorphic(z) * b.dbar(z))
    correction = cauchy_transform(source)
    corrected = grid.sample(lambda z: b(z) * holomorphic(z)) - correction
    residual = dbar_fd(corrected).sup_norm(interior_mask(grid))
    return correction, CorrectionReport(
        h=grid.h, sup_correction=correction.sup_norm(), dbar_residual=residual
    )


def max_principle_check(
    u: Callable[[np.ndarray], np.ndarray] | GridFunction,
    region: Region,
    h: float | None = None,
    refine: int = 8,
) -> MaxPrincipleReport:
    """
    Compare sup |u| on the boundary of ``region`` with sup |u| inside.

    Callables are sampled on a grid of spacing ``h`` inside and on a dense
    boundary rule whose best candidates are refined by bounded scalar search.
    Grid functions use their nodes: the boundary is the ring of inside nodes
    with a 4-neighbor outside the region.
    """
    if isinstance(u, GridFunction):
        inside = region.contains(u.grid.nodes())
        padded = np.pad(inside, 1)
        ring = inside & ~(
            padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
        )
        moduli = np.abs(u.values)
        sup_boundary = float(moduli[ring].max(initial=0.0))
        sup_interior = float(moduli[inside & ~ring].max(initial=0.0))
    else:
        lo, hi = region.bounds()
        h = h or max(hi.real - lo.real, hi.imag - lo.imag) / 512
        grid = Grid.covering(np.array([lo, hi]), pad=h, h=h)
        nodes = grid.nodes()
        inside = region.contains(nodes)
        sup_interior = float(np.abs(np.asarray(u(nodes[inside]))).max(initial=0.0))
        sup_boundary = max(_boundary_sup(u, curve, h / 8, refine) for curve in region.curves())

    passed = sup_interior <= sup_boundary + 1e-12 * (1.0 + sup_boundary)
    return MaxPrincipleReport(
        sup_boundary=sup_boundary, sup_interior=sup_interior, passed=passed
    )


def _boundary_sup(
    u: Callable[[np.ndarray], np.ndarray],
    curve: BoundaryCurve,
    h: float,
    refine: int,
) -> float:
    breaks = curve.pieces(h)
    t = np.concatenate([breaks[:-1], 0.5 * (breaks[:-1] + breaks[1:])])
    t.sort()
    moduli = np.abs(np.asarray(u(curve(t))))
    best = float(moduli.max())
    step = float(np.max(np.diff(t)))
    for k in np.argsort(moduli)[::-1][:refine]:
        found = optimize.minimize_scalar(
            lambda s: -float(np.abs(np.asarray(u(curve(np.array([s])))))[0]),
            bounds=(t[k] - step, t[k] + step),
            method="bounded",
            options={"xatol": 1e-13},
        )
        best = max(best, -float(found.fun))
    return best
