# tests/test_grid.py

import math

import numpy as np
import pytest

from pdelab.grid import (
    GridField,
    SpectralOperator,
    check_no_wrap,
    gaussian_bump,
    plane_wave,
    spectral_sine_reference,
    spectral_wave_reference,
)
from propagators.errors import GridError


def test_rejects_four_axes():
    with pytest.raises(GridError):
        GridField(np.zeros((2, 2, 2, 2)), (1.0,))


def test_rejects_non_positive_length():
    with pytest.raises(GridError):
        GridField(np.zeros(8), (0.0,))


def test_default_origin_centres_the_box():
    field = GridField(np.zeros((8, 4)), (2.0, 4.0))
    assert field.origin == (-1.0, -2.0)
    assert field.spacing == (0.25, 1.0)
    assert field.axes()[0][0] == -1.0


def test_fft_roundtrip():
    field = gaussian_bump((32, 32), (4.0, 4.0), 0.3)
    assert field.roundtrip_error() < 1e-13


def test_derivative_of_plane_wave():
    field = plane_wave((16,), (2.0 * math.pi,), (3,))
    d = SpectralOperator.derivative(field, 0).apply(field)
    assert np.allclose(d.values, 3j * field.values, atol=1e-12)


def test_derivative_symbol_zeroes_nyquist():
    field = GridField(np.zeros(8), (2.0 * math.pi,))
    symbol = SpectralOperator.derivative(field, 0).symbol
    assert symbol[4] == 0.0


def test_wave_reference_on_plane_wave():
    field = plane_wave((16, 16), (2.0 * math.pi, 2.0 * math.pi), (3, 4))
    u = spectral_wave_reference(field, 0.3, SpectralOperator.laplacian_root(field))
    assert np.allclose(u.values, math.cos(1.5) * field.values, atol=1e-12)


def test_klein_gordon_reference_on_constant():
    field = GridField(np.ones(16), (4.0,))
    u = spectral_wave_reference(field, 0.5, SpectralOperator.klein_gordon(field, 2.0))
    assert np.allclose(u.values, math.cos(1.0), atol=1e-12)


def test_damped_reference_grows_low_modes():
    field = GridField(np.ones(16), (4.0,))
    u = spectral_wave_reference(field, 0.5, SpectralOperator.damped(field, 2.0))
    assert np.allclose(u.values, math.cosh(1.0), atol=1e-12)


def test_sine_reference_on_constant_is_t():
    field = GridField(np.ones(8), (4.0,))
    u = spectral_sine_reference(field, 0.7, SpectralOperator.laplacian_root(field))
    assert np.allclose(u.values, 0.7, atol=1e-12)


def test_value_at_interpolates_band_limited_data():
    field = plane_wave((16,), (2.0 * math.pi,), (2,))
    assert field.value_at((0.1,)) == pytest.approx(np.exp(0.2j), abs=1e-12)


def test_support_radius_of_bump():
    field = gaussian_bump((64,), (16.0,), 0.5)
    # e^{−r²/2σ²} = 1e−10 at r = σ√(20 ln 10)
    expected = 0.5 * math.sqrt(20.0 * math.log(10.0))
    assert abs(field.support_radius() - expected) <= field.spacing[0]


def test_norm_of_constant_is_box_volume_root():
    field = GridField(np.ones((8, 8)), (2.0, 2.0))
    assert field.norm() == pytest.approx(2.0)


def test_wrap_guard():
    field = GridField(np.zeros(16), (8.0,))
    check_no_wrap(field, 3.9)
    with pytest.raises(GridError):
        check_no_wrap(field, -4.0)
