"""
Test grid dbar, the cell-exact Cauchy transform and the approximation studies built on it
"""

import math
import struct

import numpy as np
from pydantic import ValidationError
import pytest

from whitney_dbar.cauchy import (
    cauchy_transform,
    dbar_correction,
    dbar_fd,
    evaluate_transform,
    holo_approx,
    interior_mask,
    inversion_residual,
    inversion_study,
    max_principle_check,
)
from whitney_dbar.exceptions import BudgetExceededError, InvalidInputError
from whitney_dbar.functions import (
    bump,
    conjugate,
    exp,
    identity,
    modulus_squared,
    polynomial,
    square,
)
from whitney_dbar.grid import Grid, GridFunction
from whitney_dbar.plane_sets import SetSample, delta_mask, ifs_sample, region_make
from whitney_dbar.schemas.sets import four_corner_cantor


############
### Grid ###
############


def test_grid_counts_must_be_integral():
    with pytest.raises(ValidationError):
        Grid(corner=0j, width=1.0, height=1.0, h=0.3)


def test_grid_nodes_at_cell_centers():
    grid = Grid(corner=-1 - 2j, width=2.0, height=1.0, h=0.5)
    assert grid.shape == (2, 4)
    assert grid.nodes()[0, 0] == pytest.approx(-0.75 - 1.75j)
    assert grid.corners().shape == (3, 5)


def test_grid_budget():
    with pytest.raises(BudgetExceededError):
        Grid.square(0j, 1.0, 2048).check_budget()


def test_grid_function_bytes():
    grid = Grid(corner=-1 + 0.5j, width=0.75, height=0.5, h=0.25)
    u = grid.sample(lambda z: z**2 - 1j)
    payload = u.to_bytes()
    assert len(payload) == 56 + 16 * grid.size
    assert struct.unpack_from("<5d2Q", payload)[-2:] == (3, 2)
    back = GridFunction.from_bytes(payload)
    assert back.grid == grid
    np.testing.assert_array_equal(back.values, u.values)
    with pytest.raises(InvalidInputError):
        GridFunction.from_bytes(payload[:-8])
    with pytest.raises(InvalidInputError):
        GridFunction.from_bytes(payload[:20])


def test_grid_functions_on_different_grids():
    a = GridFunction.zeros(Grid.square(0j, 1.0, 8))
    b = GridFunction.zeros(Grid.square(0j, 1.0, 16))
    with pytest.raises(InvalidInputError):
        a - b


###############
### dbar_fd ###
###############


@pytest.mark.parametrize(
    "func, expected",
    [
        (identity(), lambda z: np.zeros_like(z)),
        (conjugate(), lambda z: np.ones_like(z)),
        (modulus_squared(), lambda z: z),
    ],
)
def test_dbar_fd_exact_on_quadratics(func, expected):
    grid = Grid.square(0.2 - 0.1j, 1.0, 32)
    got = dbar_fd(grid.sample(func))
    error = np.abs(got.values - expected(grid.nodes()))
    assert error[interior_mask(grid)].max() <= 1e-10


def test_dbar_fd_second_order_inside_bump():
    """Inside the disk the bump is a quartic and the centered error is exactly 2 h^2 z."""
    func = bump()
    errors = []
    for n in (60, 120, 240):
        grid = Grid.square(0j, 1.5, n)
        nodes = grid.nodes()
        inside = np.abs(nodes) < 0.9
        error = np.abs(dbar_fd(grid.sample(func)).values - func.dbar(nodes))
        errors.append(error[inside].max())
    for coarse, fine in zip(errors, errors[1:], strict=False):
        assert coarse / fine >= 3


def test_dbar_fd_needs_three_nodes():
    grid = Grid(corner=0j, width=2.0, height=1.0, h=0.5)
    with pytest.raises(InvalidInputError):
        dbar_fd(GridFunction.zeros(grid))


########################
### Cauchy transform ###
########################


def test_transform_of_zero():
    grid = Grid.square(0j, 1.0, 32)
    assert cauchy_transform(GridFunction.zeros(grid)).sup_norm() <= 1e-15


def test_transform_of_disk_indicator():
    """C[1_D] = conj(z) inside the unit disk and 1/z outside."""
    grid = Grid.square(0j, 1.25, 320)
    nodes = grid.nodes()
    g = GridFunction(grid=grid, values=np.ones(grid.shape))
    transform = cauchy_transform(g, support_mask=np.abs(nodes) < 1)
    r = np.abs(nodes)
    with np.errstate(divide="ignore"):
        exact = np.where(r < 1, np.conj(nodes), 1 / nodes)
    away = np.abs(r - 1) >= 2 * grid.h
    assert np.abs(transform.values - exact)[away].max() <= 5 * grid.h


def test_fft_matches_direct():
    grid = Grid.square(0.1j, 1.2, 24)
    g = grid.sample(bump().dbar)
    fft = cauchy_transform(g, method="fft")
    direct = cauchy_transform(g, method="direct")
    assert np.abs(fft.values - direct.values).max() <= 1e-9


def test_transform_is_linear():
    grid = Grid.square(0j, 1.5, 48)
    g1 = grid.sample(bump().dbar)
    g2 = grid.sample(lambda z: np.where(np.abs(z) < 1, np.conj(z), 0))
    a = 0.3 - 2j
    combined = cauchy_transform(a * g1 + g2)
    separate = a * cauchy_transform(g1) + cauchy_transform(g2)
    assert (combined - separate).sup_norm() <= 1e-10


def test_transform_translation_equivariant():
    grid = Grid.square(0j, 1.2, 20)
    g = grid.sample(bump().dbar)
    moved = GridFunction(grid=grid.translate(3 - 2j), values=g.values)
    a = cauchy_transform(g, method="direct")
    b = cauchy_transform(moved, method="direct")
    assert np.abs(a.values - b.values).max() <= 1e-10


def test_evaluate_transform_at_nodes_matches_grid():
    grid = Grid.square(0j, 1.2, 16)
    g = grid.sample(bump().dbar)
    points = grid.nodes()[::3, ::5]
    np.testing.assert_allclose(
        evaluate_transform(g, points), cauchy_transform(g).values[::3, ::5], atol=1e-9
    )


def test_unknown_method():
    grid = Grid.square(0j, 1.0, 8)
    with pytest.raises(InvalidInputError):
        cauchy_transform(GridFunction.zeros(grid), method="spectral")


@pytest.mark.slow
def test_inversion_residual_decreases():
    table = inversion_study(bump(), Grid.square(0j, 1.5, 64), refinements=3)
    residuals = [row.residual for row in table.rows]
    assert [row.nodes for row in table.rows] == [64**2, 128**2, 256**2, 512**2]
    for coarse, fine in zip(residuals, residuals[1:], strict=False):
        assert coarse / fine >= 1.5


#########################
### Holomorphic approx ###
#########################


def test_holo_approx_single_point():
    func = bump()
    grid = Grid.square(0j, 1.25, 256)
    sample = SetSample(points=[0j], h=0.0)
    delta = 0.1
    _, report = holo_approx(func, sample, delta, grid)
    grad_sup = 2 / math.sqrt(3) * (2 / 3)
    assert report.sup_error <= 2 * grad_sup * delta
    assert report.trunc_area == pytest.approx(math.pi * delta**2, rel=0.1)


def test_holo_approx_rejects_unresolved_delta():
    grid = Grid.square(0j, 1.25, 64)
    with pytest.raises(InvalidInputError):
        holo_approx(bump(), SetSample(points=[0j], h=0.0), grid.h / 2, grid)


def test_holo_approx_rejects_uncovered_sample():
    grid = Grid.square(0j, 1.0, 64)
    with pytest.raises(InvalidInputError):
        holo_approx(bump(), SetSample(points=[0.95 + 0j], h=0.0), 0.1, grid)


@pytest.mark.slow
def test_holo_approx_on_cantor_set():
    func = bump(1.0, 0.5 + 0.5j)
    sample = ifs_sample(four_corner_cantor(), 6)
    grid = Grid(corner=-0.5 - 0.5j, width=2.0, height=2.0, h=1 / 128)
    deltas = [math.sqrt(2) / 8 / 2**k for k in range(4)]
    reports = [holo_approx(func, sample, d, grid)[1] for d in deltas]
    errors = [r.sup_error for r in reports]
    assert all(b < a for a, b in zip(errors, errors[1:], strict=False))
    assert errors[-1] <= errors[0] / 3
    grad_sup = 2 / math.sqrt(3) * (2 / 3)
    # h is holomorphic near E: only the centered-difference error remains
    for report in reports[:2]:
        assert report.dbar_residual <= 16 * grad_sup * (grid.h / report.delta) ** 2
    inversion = inversion_residual(func.dbar, grid)
    assert all(report.dbar_residual < 10 * inversion for report in reports)


def test_truncation_removes_dbar_near_the_set():
    func = bump(1.0, 0.5 + 0.5j)
    sample = ifs_sample(four_corner_cantor(), 3)
    grid = Grid(corner=-0.5 - 0.5j, width=2.0, height=2.0, h=1 / 64)
    delta = math.sqrt(2) / 8
    _, report = holo_approx(func, sample, delta, grid)

    dbar_f = grid.sample(func.dbar)
    close = delta_mask(sample, delta / 2, grid).mask & interior_mask(grid)
    untruncated = dbar_fd(cauchy_transform(dbar_f)).sup_norm(close)
    assert untruncated == pytest.approx(dbar_f.sup_norm(close), rel=0.1)
    assert report.dbar_residual <= untruncated / 10


######################
### dbar correction ###
######################


def test_correction_vanishes_for_holomorphic_multiplier():
    grid = Grid.square(0j, 1.5, 32)
    correction, report = dbar_correction(identity(), square(), grid)
    assert report.sup_correction == 0.0
    assert correction.sup_norm() == 0.0


def test_correction_residual_decreases():
    grid = Grid.square(0j, 1.5, 64)
    coarse = dbar_correction(bump(), square(), grid)[1]
    fine = dbar_correction(bump(), square(), grid.refine())[1]
    assert coarse.sup_correction > 0
    assert fine.dbar_residual < coarse.dbar_residual / 1.2


#########################
### Maximum principle ###
#########################


def test_max_principle_monomial():
    report = max_principle_check(polynomial([0, 0, 0, 0, 0, 1]), region_make("disk"))
    assert report.passed
    assert report.sup_boundary == pytest.approx(1.0, abs=1e-12)
    assert report.sup_interior < 1.0


def test_max_principle_exp():
    report = max_principle_check(exp(), region_make("disk"))
    assert report.passed
    assert report.sup_boundary == pytest.approx(math.e, abs=1e-9)
    assert report.sup_interior <= math.e


def test_max_principle_on_square():
    square_region = region_make("square", corner=-0.5 - 0.5j)
    report = max_principle_check(polynomial([1, -1j, 0.5]), square_region)
    assert report.passed


def test_max_principle_grid_function():
    grid = Grid.square(0j, 1.25, 250)
    report = max_principle_check(grid.sample(lambda z: np.abs(z) ** 2), region_make("disk"))
    assert report.passed
    assert report.sup_boundary > 0.95
    assert report.sup_interior > 0.95


@pytest.mark.slow
def test_max_principle_random_polynomials(rng):
    disk = region_make("disk")
    for _ in range(100):
        degree = int(rng.integers(0, 9))
        coeffs = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        assert max_principle_check(polynomial(coeffs.tolist()), disk).passed
