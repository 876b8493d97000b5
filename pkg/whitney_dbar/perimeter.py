"""
Dual evaluation of dbar(f 1_E) = f dbar 1_E against test functions phi.

For a region E:
    lhs         = <dbar(f 1_E), phi>  = -∬_E f dbar(phi) dA
    rhs_area    = -∬_E dbar(f phi) dA
    rhs_contour = -(1/2i) ∮_{∂E} f phi dz
lhs - rhs_area = ∬_E dbar(f) phi dA vanishes when dbar f = 0 on E, and
rhs_area = rhs_contour is Stokes' theorem.
"""

from collections.abc import Sequence
import logging

import numpy as np

from .exceptions import InvalidInputError
from .functions import WirtingerFunction
from .grid import Grid
from .plane_sets import Region
from .schemas.reports import PairingReport, StabilitySeries


logger = logging.getLogger(__name__)

GAUSS_ORDER = 8


def _check_support(phi: WirtingerFunction, grid: Grid, region: Region) -> np.ndarray:
    values = np.abs(grid.sample(phi).values)
    ring = np.concatenate([values[0], values[-1], values[:, 0], values[:, -1]])
    if ring.max() > 1e-14 * max(1.0, values.max()):
        raise InvalidInputError("test function support touches the grid boundary")
    lo, hi = region.bounds()
    if not grid.contains(np.array([lo, hi])):
        raise InvalidInputError("region is not inside the grid")
    return values


def pair(
    func: WirtingerFunction,
    phi: WirtingerFunction,
    region: Region,
    grid: Grid,
    contour_h: float | None = None,
    case: str = "",
) -> PairingReport:
    """
    Area integrals by cell-center quadrature over cells whose centers lie in
    the region; the contour integral by composite 8-point Gauss-Legendre on
    pieces no longer than ``contour_h`` (default: the grid spacing).
    """
    phi_abs = _check_support(phi, grid, region)
    nodes = grid.nodes()
    z = nodes[region.contains(nodes)]
    area_element = grid.h**2

    f, dbar_f = func(z), func.dbar(z)
    phi_z, dbar_phi = phi(z), phi.dbar(z)
    lhs = -np.sum(f * dbar_phi) * area_element
    rhs_area = -np.sum(dbar_f * phi_z + f * dbar_phi) * area_element

    zc, wc = region.contour_rule(contour_h or grid.h, GAUSS_ORDER)
    rhs_contour = -np.sum(func(zc) * phi(zc) * wc) / 2j

    report = PairingReport(
        case=case or func.name,
        lhs=complex(lhs),
        rhs_area=complex(rhs_area),
        rhs_contour=complex(rhs_contour),
        residual=complex(lhs - rhs_area),
        stokes_gap=float(abs(rhs_area - rhs_contour)),
        scale=float(phi_abs.max()) * region.area,
    )
    logger.debug(
        "pair %s: residual %.3e, stokes gap %.3e",
        report.case,
        report.residual_abs,
        report.stokes_gap,
    )
    return report


def uniform_limit_stability(
    sequence: Sequence[WirtingerFunction],
    phi: WirtingerFunction,
    region: Region,
    grid: Grid,
    limit: WirtingerFunction | None = None,
    contour_h: float | None = None,
) -> StabilitySeries:
    """
    Pairings along f_k -> f. The gaps |lhs_k - lhs| and |contour_k - contour|
    are bounded by ||f_k - f||_sup (||dbar phi||_L1(E) + length(∂E) ||phi||_sup / 2).
    """
    if len(sequence) < 2:
        raise InvalidInputError("uniform_limit_stability needs at least 2 functions")
    limit = limit or sequence[-1]
    reports = [pair(f, phi, region, grid, contour_h) for f in sequence]
    reference = pair(limit, phi, region, grid, contour_h)

    nodes = grid.nodes()
    z_area = nodes[region.contains(nodes)]
    z_contour, w_contour = region.contour_rule(contour_h or grid.h, GAUSS_ORDER)
    checkpoints = np.concatenate([z_area, z_contour])
    dbar_phi_l1 = float(np.sum(np.abs(phi.dbar(z_area)))) * grid.h**2
    length = float(np.sum(np.abs(w_contour)))
    phi_sup = float(np.abs(phi(checkpoints)).max())

    sup_gaps = [float(np.abs(f(checkpoints) - limit(checkpoints)).max()) for f in sequence]
    bounds = [gap * (dbar_phi_l1 + length * phi_sup / 2) for gap in sup_gaps]
    lhs_gaps = [abs(r.lhs - reference.lhs) for r in reports]
    contour_gaps = [abs(r.rhs_contour - reference.rhs_contour) for r in reports]
    slack = 1e-12 * (1.0 + abs(reference.lhs) + abs(reference.rhs_contour))
    within = all(
        lg <= b + slack and cg <= b + slack
        for lg, cg, b in zip(lhs_gaps, contour_gaps, bounds, strict=True)
    )
    if not within:
        logger.warning("pairing gaps exceed the uniform-convergence bound")
    return StabilitySeries(
        reports=reports,
        sup_gaps=sup_gaps,
        lhs_gaps=lhs_gaps,
        contour_gaps=contour_gaps,
        bounds=bounds,
        within_bounds=within,
    )
