# tests/test_waves.py

import math

import numpy as np
import pytest

from pdelab.grid import GridField, SpectralOperator, gaussian_bump, spectral_sine_reference, spectral_wave_reference
from pdelab.waves import (
    cos_to_exp_rewrite_check,
    descend_to_3d,
    double_angle_check,
    fit_ladder,
    ladder_coefficients,
    shift_multiplier,
    stencil_derivative,
    wave2d_poisson,
    wave3d_kirchhoff,
    wave_general,
    wave_with_velocity,
)
from propagators.errors import FitResidualError, GridError


def reference(f, t):
    return spectral_wave_reference(f, t, SpectralOperator.laplacian_root(f))


@pytest.fixture(scope="module")
def bump2d():
    return gaussian_bump((64, 64), (8.0, 8.0), 0.4)


def test_ladder_coefficients():
    assert ladder_coefficients(1) == (1, 2)
    # 3 + 12k + 4k(k−1) = (2k+1)(2k+3)
    assert ladder_coefficients(2) == (3, 12, 4)
    assert ladder_coefficients(1, drop_outer=True) == (1, 0)


def test_fit_ladder_on_polynomial_bracket():
    # A(s) = s², m = 1: D[t·t⁴] = 5t⁴
    value = fit_ladder(lambda tau: np.array([tau ** 4]), 0.7, 1)
    assert value[0].real == pytest.approx(5.0 * 0.7 ** 4, rel=1e-10)


def test_fit_ladder_reports_bad_fit():
    with pytest.raises(FitResidualError) as info:
        fit_ladder(lambda tau: np.array([tau ** 4]), 1.0, 1, degree=1)
    assert info.value.degree == 1


def test_stencil_derivative_of_sine():
    value = stencil_derivative(lambda tau: np.array([math.sin(2.0 * tau)]), 0.4)
    assert value[0] == pytest.approx(2.0 * math.cos(0.8), abs=1e-10)


def test_shift_multiplier_of_single_node_is_translation():
    field = GridField(np.zeros(16), (2.0 * math.pi,))
    mult = shift_multiplier(field, 0.5, np.array([[1.0]]), np.array([1.0]))
    k = field.wavenumbers()[0]
    assert np.allclose(mult, np.exp(0.5j * k))


def test_one_dimensional_wave_is_exact():
    f = gaussian_bump((64,), (16.0,), 0.8)
    u = wave_general(f, 0.7)
    assert u.relative_gap(reference(f, 0.7)) < 1e-12


def test_two_dimensional_ladder_route(bump2d):
    u = wave_general(bump2d, 0.5)
    assert u.relative_gap(reference(bump2d, 0.5)) < 1e-5


def test_disk_average_formula(bump2d):
    u = wave2d_poisson(bump2d, 0.5)
    assert u.relative_gap(reference(bump2d, 0.5)) < 1e-6


def test_disk_average_preserves_constants():
    ones = GridField(np.ones((32, 32)), (8.0, 8.0))
    u = wave2d_poisson(ones, 0.5)
    assert np.max(np.abs(u.values - 1.0)) < 1e-10


def test_sphere_average_formula():
    f = gaussian_bump((32, 32, 32), (8.0, 8.0, 8.0), 0.6)
    u = wave3d_kirchhoff(f, 0.4, level=24)
    assert u.relative_gap(reference(f, 0.4)) < 1e-6


def test_sphere_average_at_time_zero_is_identity():
    f = gaussian_bump((8, 8, 8), (8.0, 8.0, 8.0), 0.4)
    u = wave3d_kirchhoff(f, 0.0, level=8)
    assert u.relative_gap(f) < 1e-8


def test_formulas_check_dimension(bump2d):
    with pytest.raises(GridError):
        wave3d_kirchhoff(bump2d, 0.3)
    with pytest.raises(GridError):
        wave2d_poisson(gaussian_bump((16,), (8.0,), 0.5), 0.3)


def test_wrap_around_is_refused(bump2d):
    with pytest.raises(GridError):
        wave_general(bump2d, 4.0)


def test_wave_with_velocity_in_one_dimension():
    f = gaussian_bump((128,), (16.0,), 0.5)
    g = gaussian_bump((128,), (16.0,), 0.7, centre=(1.0,))
    t = 0.5
    root = SpectralOperator.laplacian_root(f)
    expected = spectral_wave_reference(f, t, root).values + spectral_sine_reference(g, t, root).values
    u = wave_with_velocity(f, g, t)
    assert u.relative_gap(f.with_values(expected)) < 1e-6


def test_wave_with_velocity_needs_matching_grids():
    f = gaussian_bump((32,), (8.0,), 0.5)
    g = gaussian_bump((64,), (8.0,), 0.5)
    with pytest.raises(GridError):
        wave_with_velocity(f, g, 0.2)


def test_double_angle_on_exact_one_dimensional_propagator():
    f = gaussian_bump((64,), (16.0,), 0.8)
    assert double_angle_check(wave_general, f, 0.5) < 1e-12


def test_descend_to_3d_copies_along_new_axis(bump2d):
    lifted = descend_to_3d(bump2d, 4, 8.0)
    assert lifted.shape == (64, 64, 4)
    assert lifted.lengths == (8.0, 8.0, 8.0)
    assert np.array_equal(lifted.values[:, :, 3], bump2d.values)


def test_cos_exp_rewrite():
    assert cos_to_exp_rewrite_check([1.0, 1.0], 1.0) < 1e-10
    assert cos_to_exp_rewrite_check([1.0, 0.0, 1.0], 1.0) < 1e-10
    assert cos_to_exp_rewrite_check([1.0, 1.0], 1.0, asymmetric=True) > 1e-3
