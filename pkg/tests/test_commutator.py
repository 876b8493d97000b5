"""
Test commutator kernels and their diagonal regularity profile
"""

import math

import numpy as np
import pytest

from whitney_dbar.commutator import (
    build_kernel,
    diagonal_profile,
    regularity_verdict,
)
from whitney_dbar.exceptions import FitRefusedError, InvalidInputError
from whitney_dbar.functions import (
    bipolynomial,
    conjugate,
    identity,
    polynomial,
    square,
)
from whitney_dbar.jets import restrict_smooth
from whitney_dbar.plane_sets import SetSample, circle_sample, grid_sample
from whitney_dbar.schemas.reports import DiagonalProfile, ProfileRow


CIRCLE_SCALES = [0.4, 0.2, 0.1, 0.05]


def _off_diagonal(kernel) -> np.ndarray:
    return kernel.entries[~np.eye(len(kernel.base), dtype=bool)]


def test_square_kernel_is_sum():
    sample = circle_sample(64)
    kernel = build_kernel(square(), sample)
    z = sample.points
    expected = z[:, None] + z[None, :]
    assert np.abs(kernel.entries - expected).max() <= 1e-12
    np.testing.assert_allclose(kernel.diagonal, 2 * z)


def test_identity_kernel_is_one():
    kernel = build_kernel(identity(), grid_sample(4, 0.5))
    np.testing.assert_array_equal(kernel.entries, 1)


def test_conjugate_kernel_on_roots_of_unity():
    kernel = build_kernel(conjugate(), circle_sample(8))
    values = _off_diagonal(kernel)
    np.testing.assert_allclose(np.abs(values), 1.0, atol=1e-12)
    assert np.unique(np.round(values, 9)).size >= 3


def test_kernel_symmetric():
    func = bipolynomial({(2, 0): 1, (1, 1): 0.5, (0, 3): -1j})
    kernel = build_kernel(func, grid_sample(6, 0.2))
    np.testing.assert_array_equal(kernel.entries, kernel.entries.T)


def test_affine_kernel_constant():
    kernel = build_kernel(polynomial([0.5, 2 - 1j]), grid_sample(5, 0.25))
    assert np.abs(kernel.entries - (2 - 1j)).max() <= 1e-14


def test_conjugation_covariance():
    func = bipolynomial({(2, 0): 1, (0, 1): 0.3})
    sample = grid_sample(5, 0.3, corner=-0.6 - 0.6j)
    kernel = build_kernel(func, sample)
    mirrored = build_kernel(func.conjugated(), sample.mirrored())
    assert np.abs(mirrored.entries - np.conj(kernel.entries)).max() <= 1e-12


def test_kernel_from_jet_matches_function():
    sample = grid_sample(4, 0.25)
    from_jet = build_kernel(restrict_smooth(square(), sample))
    from_func = build_kernel(square(), sample)
    np.testing.assert_array_equal(from_jet.entries, from_func.entries)


def test_bare_callable_has_no_diagonal():
    kernel = build_kernel(lambda z: z**2, circle_sample(16))
    assert not kernel.has_diagonal
    assert np.isnan(np.frombuffer(kernel.to_bytes(), dtype="<f8")[0])
    assert len(kernel.to_bytes()) == 16 * 16**2


def test_subsampling_above_cap():
    sample = circle_sample(100)
    a = build_kernel(square(), sample, cap=30, seed=3)
    b = build_kernel(square(), sample, cap=30, seed=3)
    assert len(a.base) == 30
    np.testing.assert_array_equal(a.base.points, b.base.points)


def test_cap_from_environment(fresh_settings):
    fresh_settings.setenv("WHITNEY_DBAR_KERNEL_CAP", "10")
    assert len(build_kernel(square(), circle_sample(40)).base) == 10


def test_non_finite_symbol_rejected():
    sample = SetSample(points=[0j, 1 + 0j, 1j], h=1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        with pytest.raises(InvalidInputError):
            build_kernel(lambda z: 1 / z, sample)


###############
### Profile ###
###############


def test_square_oscillation_equals_scale():
    kernel = build_kernel(square(), grid_sample(5, 0.25))
    profile = diagonal_profile(kernel, [1.0, 0.5, 0.25])
    for row in profile.rows:
        assert row.osc == pytest.approx(row.scale, abs=1e-12)


def test_conjugate_angular_variation_on_lattice():
    kernel = build_kernel(conjugate(), grid_sample(8, 0.125))
    profile = diagonal_profile(kernel, [0.5, 0.25, 0.125])
    assert all(row.angvar >= 1.0 for row in profile.rows)


def test_cubic_oscillation_halves():
    kernel = build_kernel(polynomial([0, 0, 0, 1]), grid_sample(9, 0.125))
    osc = [row.osc for row in diagonal_profile(kernel, [0.5, 0.25, 0.125]).rows]
    # rows ascend in scale
    assert osc[0] <= 0.6 * osc[1]
    assert osc[1] <= 0.6 * osc[2]


def test_rows_absent_below_spacing():
    kernel = build_kernel(square(), grid_sample(3, 1.0))
    rows = diagonal_profile(kernel, [2.0, 1.0, 0.5]).rows
    assert rows[0].absent and rows[0].osc is None
    assert not rows[1].absent


def test_profile_csv_header():
    kernel = build_kernel(square(), circle_sample(32))
    text = diagonal_profile(kernel, CIRCLE_SCALES).to_csv()
    assert text.splitlines()[0] == "scale,osc,angvar"


def test_profile_rejects_bad_scales():
    kernel = build_kernel(square(), circle_sample(8))
    with pytest.raises(InvalidInputError):
        diagonal_profile(kernel, [0.5, 0.0])


###############
### Verdict ###
###############


def test_square_is_holomorphic_like():
    kernel = build_kernel(square(), circle_sample(256))
    verdict = regularity_verdict(diagonal_profile(kernel, CIRCLE_SCALES))
    assert verdict.holomorphic_like
    assert verdict.exponent == pytest.approx(1.0, abs=0.1)
    assert not verdict.degraded


def test_conjugate_is_not_holomorphic_like():
    kernel = build_kernel(conjugate(), circle_sample(256))
    verdict = regularity_verdict(diagonal_profile(kernel, CIRCLE_SCALES))
    assert not verdict.holomorphic_like
    assert verdict.exponent == pytest.approx(0.0, abs=1e-6)


def test_conjugate_angvar_is_the_chord_sweep():
    # K = e^{-2i theta} over chords reaching m steps either way spans an arc of 4 m pi / n
    n = 256
    profile = diagonal_profile(build_kernel(conjugate(), circle_sample(n)), CIRCLE_SCALES)
    for row in profile.rows:
        m = max(k for k in range(1, n // 2) if 2 * math.sin(k * math.pi / n) <= row.scale)
        assert row.angvar == pytest.approx(2 * math.sin(2 * m * math.pi / n), abs=1e-9)
        assert 1.8 * row.scale <= row.angvar < 1.0
        assert row.osc == pytest.approx(1.0, abs=1e-12)


def test_conjugate_angvar_on_lattice_reaches_one():
    profile = diagonal_profile(build_kernel(conjugate(), grid_sample(12, 1 / 16)), [0.25, 0.125, 0.0625])
    assert all(row.angvar >= 1.0 for row in profile.rows)


def test_identity_constant_kernel_passes():
    kernel = build_kernel(identity(), circle_sample(128))
    verdict = regularity_verdict(diagonal_profile(kernel, CIRCLE_SCALES))
    assert verdict.holomorphic_like
    assert verdict.exponent is None


def test_small_antiholomorphic_part_detected():
    func = bipolynomial({(1, 0): 1, (0, 1): 0.01})
    kernel = build_kernel(func, grid_sample(12, 1 / 16))
    verdict = regularity_verdict(diagonal_profile(kernel, [0.5, 0.25, 0.125, 0.0625]))
    assert not verdict.holomorphic_like
    assert verdict.smallest_angvar <= 0.2


def test_verdict_without_diagonal_is_degraded():
    kernel = build_kernel(lambda z: z**2, circle_sample(256))
    profile = diagonal_profile(kernel, CIRCLE_SCALES)
    assert all(row.osc is None for row in profile.rows)
    verdict = regularity_verdict(profile)
    assert verdict.degraded
    assert verdict.exponent is None
    assert verdict.holomorphic_like


def test_verdict_refuses_two_scales():
    profile = DiagonalProfile(
        rows=[
            ProfileRow(scale=0.1, osc=0.1, angvar=0.1),
            ProfileRow(scale=0.2, osc=0.2, angvar=0.2),
        ]
    )
    with pytest.raises(FitRefusedError):
        regularity_verdict(profile)
