# tests/test_klein_gordon.py

import math

import numpy as np
import pytest

from pdelab.grid import GridField, SpectralOperator, gaussian_bump, spectral_wave_reference
from pdelab.klein_gordon import KGKernelSpec, bessel_identity_check, damped_wave, kernel_propagate, klein_gordon
from pdelab.waves import double_angle_check, wave_general
from propagators.errors import GridError


@pytest.fixture(scope="module")
def bump():
    return gaussian_bump((128,), (16.0,), 0.5)


def test_kernel_spec_ranges():
    with pytest.raises(GridError):
        KGKernelSpec(a=1.0, n=4)
    with pytest.raises(ValueError):
        KGKernelSpec(a=-1.0, n=2)


def test_kernel_spec_prefactors():
    assert KGKernelSpec(a=1.0, n=1).prefactor == pytest.approx(0.5)
    assert KGKernelSpec(a=1.0, n=2).prefactor == pytest.approx(1.0 / (2.0 * math.pi))
    assert KGKernelSpec(a=1.0, n=3).prefactor == pytest.approx(1.0 / (4.0 * math.pi))
    assert KGKernelSpec(a=1.0, n=3).m == 2


@pytest.mark.parametrize("c,at", [(0.3, 0.5), (1.0, 2.0), (0.7, 5.0)])
def test_bessel_identity(c, at):
    assert bessel_identity_check(c, at) < 1e-10


def test_one_dimensional_klein_gordon(bump):
    t = 0.5
    u = klein_gordon(bump, t, 1.0)
    ref = spectral_wave_reference(bump, t, SpectralOperator.klein_gordon(bump, 1.0))
    assert u.relative_gap(ref) < 1e-5


def test_two_dimensional_klein_gordon():
    f = gaussian_bump((48, 48), (8.0, 8.0), 0.5)
    t = 0.4
    u = klein_gordon(f, t, 1.5)
    ref = spectral_wave_reference(f, t, SpectralOperator.klein_gordon(f, 1.5))
    assert u.relative_gap(ref) < 1e-5


def test_massless_limit_is_the_wave_propagator(bump):
    assert klein_gordon(bump, 0.5, 0.0).relative_gap(wave_general(bump, 0.5)) < 1e-8


def test_damped_constant_mode_grows_like_cosh():
    flat = GridField(np.ones(128), (16.0,))
    u = damped_wave(flat, 0.5, 0.5)
    assert np.max(np.abs(u.values - math.cosh(0.25))) < 1e-6


def test_damped_wave_matches_continued_reference(bump):
    t, a = 0.5, 0.5
    u = damped_wave(bump, t, a)
    ref = spectral_wave_reference(bump, t, SpectralOperator.damped(bump, a))
    assert u.relative_gap(ref) < 1e-5


def test_kernel_dimension_must_match_field(bump):
    with pytest.raises(GridError):
        kernel_propagate(bump, 0.3, KGKernelSpec(a=1.0, n=2))


def test_double_angle(bump):
    gap = double_angle_check(lambda g, s: klein_gordon(g, s, 1.0), bump, 0.25)
    assert gap < 2e-3


def test_three_dimensional_klein_gordon():
    f = gaussian_bump((16, 16, 16), (8.0, 8.0, 8.0), 0.8)
    t = 0.3
    u = klein_gordon(f, t, 1.0)
    ref = spectral_wave_reference(f, t, SpectralOperator.klein_gordon(f, 1.0))
    assert u.relative_gap(ref) < 1e-5


def test_two_dimensional_damped_wave():
    f = gaussian_bump((48, 48), (8.0, 8.0), 0.5)
    t, a = 0.4, 1.0
    u = damped_wave(f, t, a)
    ref = spectral_wave_reference(f, t, SpectralOperator.damped(f, a))
    assert u.relative_gap(ref) < 1e-5
