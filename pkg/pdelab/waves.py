# pdelab/waves.py

"""Ascent propagators applied to gridded initial data.

Every formula here averages the data over x + tω with ω running through a
sphere or ball rule. On a periodic grid that average is a Fourier multiplier,

    Σ_p w_p f(x + tω_p)  ⟷  [Σ_p w_p e^{itk·ω_p}] f̂(k),

which evaluates f at off-grid points by exact trigonometric interpolation.
The remaining time derivatives act on smooth brackets in t, either through a
finite-difference stencil or through a polynomial fit in s = t² on which the
D-ladder is exact.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev

from pdelab.grid import GridField, check_no_wrap
from propagators.errors import FitResidualError, GridError
from propagators.quadrature import build_ball_rule, build_sphere_rule

logger = logging.getLogger(__name__)

DEFAULT_LEVEL = 32
DEFAULT_FIT_DEGREE = 24
DEFAULT_FIT_SAMPLES = 40
FIT_RTOL = 1e-8
STENCIL_STEP = 1e-3


class NodeSet(NamedTuple):
    nodes: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=32)
def sphere_nodes(n: int, level: int) -> NodeSet:
    rule = build_sphere_rule(n, level, method="product")
    return NodeSet(rule.nodes, rule.weights)


@lru_cache(maxsize=32)
def ball_nodes(d: int, level: int, weighted: bool = True) -> NodeSet:
    rule = build_ball_rule(d, level, method="product", weighted=weighted)
    return NodeSet(rule.nodes, rule.weights)


def shift_multiplier(field: GridField, t: float, nodes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Σ_p w_p exp(i t k·ω_p) on the frequency grid of ``field``.

    Only the first ``field.ndim`` node coordinates move the data; extra
    coordinates must already be folded into ``weights``.
    """
    factors = [np.exp(1j * t * np.outer(k, nodes[:, a])) for a, k in enumerate(field.wavenumbers())]
    if field.ndim == 1:
        return factors[0] @ weights
    if field.ndim == 2:
        return (factors[0] * weights) @ factors[1].T
    out = np.empty(field.shape, dtype=complex)
    left = factors[0] * weights
    for i in range(field.shape[0]):
        out[i] = (left[i] * factors[1]) @ factors[2].T
    return out


def stencil_derivative(g: Callable[[float], np.ndarray], t: float) -> np.ndarray:
    """d/dt by the 5-point centred stencil, refined once by Richardson (h and 2h)."""
    h = STENCIL_STEP * max(1.0, abs(t))

    def five_point(step: float) -> np.ndarray:
        return (-g(t + 2 * step) + 8 * g(t + step) - 8 * g(t - step) + g(t - 2 * step)) / (12 * step)

    fine, coarse = five_point(h), five_point(2 * h)
    return (16 * fine - coarse) / 15


def ladder_coefficients(m: int, drop_outer: bool = False) -> Tuple[int, ...]:
    """β_j with D_m[t^{2m−1} A(t²)] = Σ_j β_j s^j A^{(j)}(s) at s = t².

    On A = s^k the ladder must give (2k+1)(2k+3)⋯(2k+2m−1) (the first factor
    dropped for the sine bracket); β_j are the forward differences of that
    polynomial at k = 0 divided by j!.
    """
    first = 1 if drop_outer else 0

    def p(k: int) -> int:
        return math.prod(2 * k + 2 * i + 1 for i in range(first, m))

    values = [p(k) for k in range(m + 1)]
    betas = []
    for j in range(m + 1):
        diff = values
        for _ in range(j):
            diff = [b - a for a, b in zip(diff, diff[1:])]
        betas.append(diff[0] // math.factorial(j))
    return tuple(betas)


def fit_ladder(
    bracket: Callable[[float], np.ndarray],
    t: float,
    m: int,
    drop_outer: bool = False,
    degree: int = DEFAULT_FIT_DEGREE,
    samples: int = DEFAULT_FIT_SAMPLES,
    fit_tol: float = FIT_RTOL,
) -> np.ndarray:
    """Apply the D-ladder to t^{2m−1}A(t²) where A(s) = bracket(√s).

    A is fitted by Chebyshev least squares on [0, t²] (coefficients along
    axis 0, one column per grid mode) and the ladder acts on the fit exactly.
    The sine variant returns t·Σβ_j s^j A^{(j)}.
    """
    betas = ladder_coefficients(m, drop_outer)
    s_max = t * t
    if s_max == 0.0:
        value = betas[0] * bracket(0.0)
        return np.zeros_like(value) if drop_outer else value

    y = np.cos(np.pi * (np.arange(samples) + 0.5) / samples)
    data = np.stack([bracket(math.sqrt(s_max * (yj + 1.0) / 2.0)) for yj in y])
    shape = data.shape[1:]
    data = data.reshape(samples, -1)
    vander = chebyshev.chebvander(y, degree)
    coeffs, *_ = np.linalg.lstsq(vander, data, rcond=None)
    scale = max(float(np.max(np.abs(data))), np.finfo(float).tiny)
    residual = float(np.max(np.abs(vander @ coeffs - data))) / scale
    if residual > fit_tol:
        raise FitResidualError(residual, fit_tol, degree)

    # s^j d^j/ds^j at s = s_max equals 2^j d^j/dy^j at y = 1, and T_i(1) = 1
    value = np.zeros(coeffs.shape[1], dtype=complex)
    for j, beta in enumerate(betas):
        if beta:
            deriv = chebyshev.chebder(coeffs, j, axis=0) if j else coeffs
            value += beta * 2.0 ** j * deriv.sum(axis=0)
    value = value.reshape(shape)
    return t * value if drop_outer else value


# -- classical formulas -----------------------------------------------------------


def wave2d_poisson(f: GridField, t: float, level: int = DEFAULT_LEVEL) -> GridField:
    """(1/2π) ∂/∂t [t ∫_{disk} f(x+tω)(1−|ω|²)^{−1/2} dω], derivative by stencil."""
    if f.ndim != 2:
        raise GridError(f"disk-average formula needs a 2-D field, got {f.ndim}-D")
    check_no_wrap(f, t)
    nodes, weights = ball_nodes(2, level)
    fhat = f.spectrum()
    bracket = lambda tau: tau * shift_multiplier(f, tau, nodes, weights)
    return f.from_spectrum(stencil_derivative(bracket, t) * fhat / (2.0 * math.pi))


def wave3d_kirchhoff(f: GridField, t: float, level: int = DEFAULT_LEVEL) -> GridField:
    """(1/4π) ∂/∂t [t ∮_{S²} f(x+tω) dω], derivative by stencil."""
    if f.ndim != 3:
        raise GridError(f"sphere-average formula needs a 3-D field, got {f.ndim}-D")
    check_no_wrap(f, t)
    nodes, weights = sphere_nodes(3, level)
    fhat = f.spectrum()
    bracket = lambda tau: tau * shift_multiplier(f, tau, nodes, weights)
    return f.from_spectrum(stencil_derivative(bracket, t) * fhat / (4.0 * math.pi))


def _average_nodes(n: int, level: int) -> Tuple[NodeSet, float]:
    if n == 2:
        return ball_nodes(2, level), 1.0 / (2.0 * math.pi)
    return sphere_nodes(3, level), 1.0 / (4.0 * math.pi)


def wave_general(
    f: GridField,
    t: float,
    level: int = DEFAULT_LEVEL,
    degree: int = DEFAULT_FIT_DEGREE,
    samples: int = DEFAULT_FIT_SAMPLES,
) -> GridField:
    """Ascent kernel for the field's dimension with the D-ladder on a fit in t².

    n = 1 is the two-point average ½[f(x+t) + f(x−t)]; n = 2 uses the weighted
    disk, n = 3 the sphere S².
    """
    check_no_wrap(f, t)
    fhat = f.spectrum()
    if f.ndim == 1:
        two_point = shift_multiplier(f, t, np.array([[1.0], [-1.0]]), np.array([0.5, 0.5]))
        return f.from_spectrum(two_point * fhat)
    (nodes, weights), prefactor = _average_nodes(f.ndim, level)
    bracket = lambda tau: shift_multiplier(f, tau, nodes, weights) * fhat
    return f.from_spectrum(prefactor * fit_ladder(bracket, t, 1, degree=degree, samples=samples))


def wave_with_velocity(
    f: GridField,
    g: GridField,
    t: float,
    level: int = DEFAULT_LEVEL,
    degree: int = DEFAULT_FIT_DEGREE,
    samples: int = DEFAULT_FIT_SAMPLES,
) -> GridField:
    """u(t) = cos(t√S) f + sin(t√S)/√S g for u(0) = f, u_t(0) = g.

    The sine part is the cosine bracket without its outer ∂/∂t.
    """
    if f.shape != g.shape or f.lengths != g.lengths:
        raise GridError("displacement and velocity must share a grid")
    from pdelab.klein_gordon import KGKernelSpec, kernel_propagate

    cos_part = wave_general(f, t, level, degree, samples)
    sin_part = kernel_propagate(g, t, KGKernelSpec(a=0.0, n=g.ndim), level, degree, samples, sine=True)
    return f.with_values(cos_part.values + sin_part.values)


def double_angle_check(propagate: Callable[[GridField, float], GridField], f: GridField, t: float) -> float:
    """Relative gap between cos(2t√S)f and 2cos(t√S)(cos(t√S)f) − f."""
    once = propagate(f, t)
    twice = propagate(once, t)
    direct = propagate(f, 2.0 * t)
    composed = f.with_values(2.0 * twice.values - f.values)
    return direct.relative_gap(composed)


def descend_to_3d(f2: GridField, depth: int, length: float) -> GridField:
    """Extend a 2-D field constant along a new third axis."""
    values = np.repeat(f2.values[:, :, None], depth, axis=2)
    return GridField(values, tuple(f2.lengths) + (length,))


# -- cos/exp rewrite --------------------------------------------------------------


def cos_to_exp_rewrite_check(
    values: Sequence[float],
    t: float,
    level: int = 16,
    asymmetric: bool = False,
) -> float:
    """|∫Πcos(tωᵢaᵢ) − ∫e^{itω₁a₁}Π_{i≥2}cos(tωᵢaᵢ)| over the ascent measure.

    The two agree because the rest of the integrand is even in ω₁ and the rule
    is symmetric. ``asymmetric`` keeps only the nodes with ω₁ > 0 (weights
    doubled), which breaks that symmetry on purpose.
    """
    a = np.asarray([float(np.real(v)) for v in values])
    n = a.size
    if n % 2 == 0:
        nodes, weights = ball_nodes(n, level)
    else:
        nodes, weights = sphere_nodes(n, level)
    if asymmetric:
        keep = nodes[:, 0] > 0
        nodes, weights = nodes[keep], 2.0 * weights[keep]
    phases = t * nodes * a
    rest = np.prod(np.cos(phases[:, 1:]), axis=1)
    cos_form = np.dot(weights, np.cos(phases[:, 0]) * rest)
    exp_form = np.dot(weights, np.exp(1j * phases[:, 0]) * rest)
    return float(abs(exp_form - cos_form))
