# pdelab/oscillators.py

"""Sum-of-squares operators on grids, propagated by the non-commutative limit.

Both demos discretize A = (1/i)d/dx spectrally, so A is exactly Hermitian and
A² + B² is the discrete operator the dense oracle diagonalizes.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from pdelab.grid import GridField, SpectralOperator
from propagators.operators import HermitianOperator, cos_sqrt_sum_oracle
from propagators.trotter import ConvergenceReport, cos_noncomm

logger = logging.getLogger(__name__)

OSCILLATOR_POINTS = 64
OSCILLATOR_LENGTH = 16.0
GRUSHIN_POINTS = 16
GRUSHIN_LENGTH = 2.0 * math.pi
DEFAULT_DEMO_TOL = 1e-5


@dataclass
class DemoResult:
    field: GridField
    report: ConvergenceReport
    oracle_gap: float
    reference: GridField

    def to_dict(self) -> dict:
        return {**self.report.to_dict(), "oracle_gap": self.oracle_gap}


def momentum_matrix(field: GridField, axis: int = 0) -> np.ndarray:
    """(1/i)d/dx as the dense matrix F⁻¹ diag(k) F, Nyquist mode zeroed."""
    n = field.shape[axis]
    k = (SpectralOperator.derivative(GridField(np.zeros(n), field.lengths[axis]), 0).symbol / 1j).real
    F = np.fft.fft(np.eye(n), axis=0)
    P = np.fft.ifft(k[:, None] * F, axis=0)
    return 0.5 * (P + P.conj().T)


def oscillator_grid(points: int = OSCILLATOR_POINTS, length: float = OSCILLATOR_LENGTH) -> GridField:
    return GridField(np.zeros(points), (length,))


def hermite_state(field: GridField, level: int) -> GridField:
    """Unnormalized Hermite function H_level(x)e^{−x²/2}; eigenvalue 2·level+1 of −d²/dx² + x²."""
    x = field.axes()[0]
    coeffs = np.zeros(level + 1)
    coeffs[level] = 1.0
    return field.with_values(np.polynomial.hermite.hermval(x, coeffs) * np.exp(-x * x / 2))


def _run_pair(
    f: GridField,
    A: HermitianOperator,
    B: HermitianOperator,
    t: float,
    tol: float,
    m_cap: int,
) -> DemoResult:
    h = f.values.reshape(-1)
    reference = cos_sqrt_sum_oracle([A, B], t).entries @ h
    vector, report = cos_noncomm(A, B, h, t, tol, m_cap=m_cap, reference=reference)
    gap = float(np.linalg.norm(vector.entries - reference) / max(np.linalg.norm(reference), np.finfo(float).tiny))
    logger.info("oracle gap %.3e after m=%d (%s)", gap, report.m_values[-1], report.verdict.value)
    return DemoResult(
        field=f.with_values(vector.entries.reshape(f.shape)),
        report=report,
        oracle_gap=gap,
        reference=f.with_values(reference.reshape(f.shape)),
    )


def harmonic_oscillator(f: GridField, t: float, tol: float = DEFAULT_DEMO_TOL, m_cap: int = 1024) -> DemoResult:
    """cos(t√P)f for P = −d²/dx² + x² with A = (1/i)d/dx and B = x."""
    if f.ndim != 1:
        raise ValueError(f"oscillator demo takes a 1-D field, got {f.ndim}-D")
    edge = max(abs(f.values[0]), abs(f.values[-1])) / max(float(np.max(np.abs(f.values))), np.finfo(float).tiny)
    if edge > 1e-12:
        logger.warning("field is %.1e of its peak at the box edge; widen the grid", edge)
    A = HermitianOperator(momentum_matrix(f), label="A")
    B = HermitianOperator.diagonal(f.axes()[0], label="B")
    return _run_pair(f, A, B, t, tol, m_cap)


def grushin_pair(f: GridField) -> Tuple[HermitianOperator, HermitianOperator]:
    """A = (1/i)∂/∂x₁ and B = x₁(1/i)∂/∂x₂ on the flattened 2-D grid (x₁ slow index)."""
    n2 = f.shape[1]
    D1 = momentum_matrix(f, 0)
    D2 = momentum_matrix(f, 1)
    x1 = f.axes()[0]
    A = HermitianOperator(np.kron(D1, np.eye(n2)), label="A")
    B = HermitianOperator(np.kron(np.diag(x1), D2), label="B")
    return A, B


def grushin_demo(f: GridField, t: float, tol: float = DEFAULT_DEMO_TOL, m_cap: int = 1024) -> DemoResult:
    """cos(t√(−∂²/∂x₁² − x₁²∂²/∂x₂²))f on a small periodic grid."""
    if f.ndim != 2:
        raise ValueError(f"Grushin demo takes a 2-D field, got {f.ndim}-D")
    A, B = grushin_pair(f)
    return _run_pair(f, A, B, t, tol, m_cap)


def grushin_grid(points: int = GRUSHIN_POINTS, length: float = GRUSHIN_LENGTH) -> GridField:
    return GridField(np.zeros((points, points)), (length, length))


def smooth_periodic(field: GridField, seed: Optional[int] = None) -> GridField:
    """Low-mode trigonometric field with seeded coefficients."""
    rng = np.random.default_rng(seed)
    spectrum = np.zeros(field.shape, dtype=complex)
    low = tuple(slice(0, 3) for _ in field.shape)
    spectrum[low] = rng.standard_normal(spectrum[low].shape) + 1j * rng.standard_normal(spectrum[low].shape)
    return field.with_values(np.fft.ifftn(spectrum).real * field.values.size)
