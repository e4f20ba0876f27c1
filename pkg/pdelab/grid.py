# pdelab/grid.py

"""Periodic grid fields, Fourier symbols and the spectral wave reference."""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from propagators.errors import GridError

logger = logging.getLogger(__name__)

SUPPORT_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples on a periodic box [origin, origin + lengths) with a uniform grid."""

    values: np.ndarray
    lengths: Tuple[float, ...]
    origin: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if not 1 <= values.ndim <= 3:
            raise GridError(f"grid fields have 1 to 3 axes, got {values.ndim}")
        lengths = tuple(float(L) for L in np.broadcast_to(self.lengths, (values.ndim,)))
        if any(L <= 0 for L in lengths) or any(n < 2 for n in values.shape):
            raise GridError(f"bad grid: shape {values.shape}, lengths {lengths}")
        origin = tuple(-L / 2 for L in lengths) if self.origin is None else tuple(self.origin)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def from_function(cls, f: Callable[..., np.ndarray], shape: Sequence[int], lengths: Sequence[float]) -> "GridField":
        blank = cls(np.zeros(tuple(shape)), tuple(lengths))
        return blank.with_values(f(*blank.coordinates()))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    def axes(self) -> List[np.ndarray]:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape)]

    def coordinates(self) -> List[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def wavenumbers(self) -> List[np.ndarray]:
        return [2.0 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(self.shape, self.spacing)]

    def spectrum(self) -> np.ndarray:
        return np.fft.fftn(self.values)

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(values, self.lengths, self.origin)

    def from_spectrum(self, spectrum: np.ndarray) -> "GridField":
        return self.with_values(np.fft.ifftn(spectrum))

    def roundtrip_error(self) -> float:
        back = np.fft.ifftn(np.fft.fftn(self.values))
        scale = max(float(np.max(np.abs(self.values))), np.finfo(float).tiny)
        return float(np.max(np.abs(back - self.values))) / scale

    def norm(self) -> float:
        """Discrete L² norm with the cell volume."""
        return float(np.sqrt(np.prod(self.spacing)) * np.linalg.norm(self.values))

    def relative_gap(self, other: "GridField") -> float:
        return float(np.linalg.norm(self.values - other.values) / max(np.linalg.norm(other.values), np.finfo(float).tiny))

    def support_radius(self, rtol: float = SUPPORT_RTOL) -> float:
        """Largest distance from the box centre at which |f| exceeds rtol·max|f|."""
        mag = np.abs(self.values)
        peak = float(mag.max())
        if peak == 0.0:
            return 0.0
        centre = [o + L / 2 for o, L in zip(self.origin, self.lengths)]
        dist2 = sum((c - x0) ** 2 for c, x0 in zip(self.coordinates(), centre))
        return float(np.sqrt(dist2[mag > rtol * peak].max()))

    def value_at(self, point: Sequence[float]) -> complex:
        """Trigonometric interpolation at an arbitrary point."""
        phase = np.ones(self.shape, dtype=complex)
        for axis, (k, x, o) in enumerate(zip(self.wavenumbers(), point, self.origin)):
            shape = [1] * self.ndim
            shape[axis] = -1
            phase = phase * np.exp(1j * k * (x - o)).reshape(shape)
        return complex(np.sum(self.spectrum() * phase) / self.values.size)


def check_no_wrap(field: GridField, t: float) -> None:
    """Kernels reach |t| from every sample; beyond half the box they meet their own periodic image."""
    half = min(field.lengths) / 2
    if abs(t) >= half:
        raise GridError(f"|t|={abs(t):g} reaches half the periodic box ({half:g}); enlarge the box")


def gaussian_bump(shape: Sequence[int], lengths: Sequence[float], sigma: float, centre: Optional[Sequence[float]] = None) -> GridField:
    centre = [0.0] * len(shape) if centre is None else list(centre)

    def bump(*xs):
        r2 = sum((x - c) ** 2 for x, c in zip(xs, centre))
        return np.exp(-r2 / (2.0 * sigma * sigma))

    return GridField.from_function(bump, shape, lengths)


def plane_wave(shape: Sequence[int], lengths: Sequence[float], modes: Sequence[int]) -> GridField:
    """exp(i k·x) with k = 2π·modes/lengths, exactly periodic on the box."""
    ks = [2.0 * np.pi * j / L for j, L in zip(modes, lengths)]
    return GridField.from_function(lambda *xs: np.exp(1j * sum(k * x for k, x in zip(ks, xs))), shape, lengths)


@dataclass(frozen=True, eq=False)
class SpectralOperator:
    """Fourier multiplier; ``continued`` marks a complex root symbol from analytic continuation."""

    symbol: np.ndarray
    continued: bool = False

    @classmethod
    def derivative(cls, field: GridField, axis: int) -> "SpectralOperator":
        """∂/∂x_axis as i·k with the Nyquist mode zeroed, so the symbol is odd."""
        k = field.wavenumbers()[axis].copy()
        n = field.shape[axis]
        if n % 2 == 0:
            k[n // 2] = 0.0
        shape = [1] * field.ndim
        shape[axis] = -1
        return cls(np.broadcast_to(1j * k.reshape(shape), field.shape).copy())

    @classmethod
    def laplacian_root(cls, field: GridField) -> "SpectralOperator":
        return cls(np.sqrt(_k_squared(field)))

    @classmethod
    def klein_gordon(cls, field: GridField, a: float) -> "SpectralOperator":
        return cls(np.sqrt(_k_squared(field) + a * a))

    @classmethod
    def damped(cls, field: GridField, a: float) -> "SpectralOperator":
        """√(|k|²−a²) on the principal branch; imaginary below |k| = a."""
        return cls(np.sqrt(_k_squared(field) - a * a + 0j), continued=True)

    @property
    def root(self) -> np.ndarray:
        return self.symbol if self.continued else np.abs(self.symbol)

    def apply(self, field: GridField) -> GridField:
        return field.from_spectrum(self.symbol * field.spectrum())


def _k_squared(field: GridField) -> np.ndarray:
    grids = np.meshgrid(*field.wavenumbers(), indexing="ij")
    return sum(k * k for k in grids)


def spectral_wave_reference(f: GridField, t: float, symbol: SpectralOperator) -> GridField:
    """cos(t·σ(k)) applied mode by mode: u_tt = −σ²u, u(0) = f, u_t(0) = 0."""
    return f.from_spectrum(np.cos(t * symbol.root) * f.spectrum())


def spectral_sine_reference(g: GridField, t: float, symbol: SpectralOperator) -> GridField:
    """sin(tσ)/σ mode by mode, with value t where σ = 0."""
    root = symbol.root
    mult = t * np.sinc(t * root / np.pi)
    return g.from_spectrum(mult * g.spectrum())
