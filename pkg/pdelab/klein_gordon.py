"""Klein–Gordon and damped waves through one ascent bracket per dimension.

For S = −Δ + a² the ascent bracket carries a kernel in t√(1−|ω|²):

  * even n = 2m: weighted ball B^n, kernel cos(a t √(1−|ω|²)), prefactor (2π)^{−m};
  * odd n = 2m−1: plain ball B^n, kernel J₀(a t √(1−|ω|²)), prefactor π(2π)^{−m}.

The odd case is the even case in dimension n+1 with the extra coordinate
integrated out, which turns cos into πJ₀. The damped equation u_tt = Δu + a²u
swaps cos for cosh and J₀ for I₀.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev
from scipy import special

from pdelab.grid import GridField, check_no_wrap
from pdelab.waves import (
    DEFAULT_FIT_DEGREE,
    DEFAULT_FIT_SAMPLES,
    DEFAULT_LEVEL,
    ball_nodes,
    fit_ladder,
    shift_multiplier,
)
from propagators.errors import GridError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KGKernelSpec:
    a: float
    n: int
    damped: bool = False

    def __post_init__(self):
        if not 1 <= self.n <= 3:
            raise GridError(f"grid propagators cover n = 1..3, got n={self.n}")
        if self.a < 0:
            raise ValueError(f"mass parameter must be >= 0, got {self.a}")

    @property
    def m(self) -> int:
        return (self.n + 1) // 2

    @property
    def weighted(self) -> bool:
        return self.n % 2 == 0

    @property
    def prefactor(self) -> float:
        base = (2.0 * math.pi) ** (-self.m)
        return base if self.weighted else math.pi * base

    def kernel(self) -> Callable[[np.ndarray], np.ndarray]:
        if self.weighted:
            return np.cosh if self.damped else np.cos
        return special.i0 if self.damped else special.j0


def bessel_identity_check(c: float, at: float, points: int = 64) -> float:
    """|∫_{−1}^{1} cos(at·c·x)(1−x²)^{−1/2} dx − πJ₀(at·c)| by Gauss–Chebyshev."""
    x = chebyshev.chebpts1(points)
    integral = math.pi / points * float(np.sum(np.cos(at * c * x)))
    return abs(integral - math.pi * float(special.j0(at * c)))


def kernel_propagate(
    f: GridField,
    t: float,
    spec: KGKernelSpec,
    level: int = DEFAULT_LEVEL,
    degree: int = DEFAULT_FIT_DEGREE,
    samples: int = DEFAULT_FIT_SAMPLES,
    sine: bool = False,
) -> GridField:
    """cos(t√S)f, or sin(t√S)/√S f with ``sine``, for the kernel family in ``spec``."""
    if f.ndim != spec.n:
        raise GridError(f"kernel built for n={spec.n}, field is {f.ndim}-D")
    check_no_wrap(f, t)
    nodes, weights = ball_nodes(spec.n, level, spec.weighted)
    radial = np.sqrt(np.clip(1.0 - np.sum(nodes * nodes, axis=1), 0.0, None))
    kernel = spec.kernel()
    fhat = f.spectrum()

    def bracket(tau: float) -> np.ndarray:
        return shift_multiplier(f, tau, nodes, weights * kernel(spec.a * tau * radial)) * fhat

    value = fit_ladder(bracket, t, spec.m, drop_outer=sine, degree=degree, samples=samples)
    logger.debug("kernel propagate n=%d a=%g damped=%s sine=%s t=%g", spec.n, spec.a, spec.damped, sine, t)
    return f.from_spectrum(spec.prefactor * value)


def klein_gordon(
    f: GridField,
    t: float,
    a: float,
    level: int = DEFAULT_LEVEL,
    degree: int = DEFAULT_FIT_DEGREE,
    samples: int = DEFAULT_FIT_SAMPLES,
) -> GridField:
    """u_tt = Δu − a²u, u(0) = f, u_t(0) = 0."""
    return kernel_propagate(f, t, KGKernelSpec(a=a, n=f.ndim), level, degree, samples)


def damped_wave(
    f: GridField,
    t: float,
    a: float,
    level: int = DEFAULT_LEVEL,
    degree: int = DEFAULT_FIT_DEGREE,
    samples: int = DEFAULT_FIT_SAMPLES,
) -> GridField:
    """u_tt = Δu + a²u, u(0) = f, u_t(0) = 0; low modes grow like cosh."""
    return kernel_propagate(f, t, KGKernelSpec(a=a, n=f.ndim, damped=True), level, degree, samples)
