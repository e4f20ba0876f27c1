# propagators/operators.py

"""Finite-dimensional self-adjoint operators and the exact spectral oracle.

Every ascent formula in the toolkit is checked against the functions in this
module: they evaluate f(M) through a Hermitian eigendecomposition, which is
exact up to rounding for the dense matrices used here.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, NamedTuple, Sequence, Union

import numpy as np
import scipy.linalg

from propagators.errors import DecompositionError, DimensionMismatchError

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12

ArrayLike = Union[np.ndarray, Sequence]


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T

    def orthogonality_error(self) -> float:
        U = self.eigenvectors
        return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1]), ord="fro"))


class HermitianOperator:
    """Dense complex d×d matrix certified Hermitian.

    Inputs whose anti-Hermitian part exceeds ``HERMITIAN_RTOL·‖M‖_F`` are not
    rejected: they are replaced by (M + M*)/2 and ``symmetrized`` is set so
    callers can surface the warning.
    """

    def __init__(self, entries: ArrayLike, label: str = ""):
        arr = np.array(entries, dtype=complex)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")

        scale = float(np.linalg.norm(arr))
        defect = float(np.linalg.norm(arr - arr.conj().T))
        self.defect = defect
        self.symmetrized = defect > HERMITIAN_RTOL * scale
        if self.symmetrized:
            logger.warning(
                "operator %s is not Hermitian (defect %.3e vs norm %.3e); using (M+M*)/2",
                label or f"{arr.shape[0]}x{arr.shape[0]}", defect, scale,
            )
        arr = 0.5 * (arr + arr.conj().T)
        arr.setflags(write=False)
        self._entries = arr
        self.label = label

    @classmethod
    def diagonal(cls, values: Iterable[float], label: str = "") -> "HermitianOperator":
        return cls(np.diag(np.asarray(list(values), dtype=float)), label=label)

    @classmethod
    def scalar(cls, value: float, label: str = "") -> "HermitianOperator":
        return cls([[value]], label=label)

    @classmethod
    def zeros(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim)))

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @cached_property
    def decomposition(self) -> SpectralDecomposition:
        M = self._entries
        if not np.all(np.isfinite(M)):
            raise DecompositionError(f"{self.dim}x{self.dim} operator has non-finite entries")
        try:
            w, v = scipy.linalg.eigh(M)
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise DecompositionError(
                f"eigh failed for {self.dim}x{self.dim} operator "
                f"(‖M‖_F={np.linalg.norm(M):.3e}, max|m_ij|={np.abs(M).max():.3e}): {exc}"
            ) from exc
        return SpectralDecomposition(eigenvalues=w, eigenvectors=v)

    @cached_property
    def norm2(self) -> float:
        """Operator 2-norm, exact for Hermitian matrices."""
        w = self.decomposition.eigenvalues
        return float(np.max(np.abs(w))) if w.size else 0.0

    @cached_property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self._entries))

    def square(self) -> np.ndarray:
        return self._entries @ self._entries

    def scaled(self, factor: float) -> "HermitianOperator":
        return HermitianOperator(self._entries * float(factor), label=self.label)

    def __matmul__(self, other):
        if isinstance(other, HermitianOperator):
            return self._entries @ other._entries
        if isinstance(other, StateVector):
            return StateVector(self._entries @ other.entries)
        return self._entries @ np.asarray(other)

    def __repr__(self) -> str:
        name = f" {self.label}" if self.label else ""
        return f"HermitianOperator{name}(dim={self.dim}, ‖·‖₂={self.norm2:.4g})"


@dataclass(frozen=True)
class StateVector:
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


def as_state(h: Union[StateVector, ArrayLike]) -> StateVector:
    return h if isinstance(h, StateVector) else StateVector(np.asarray(h))


def check_dims(ops: Sequence[HermitianOperator], h: Union[StateVector, None] = None) -> int:
    if not ops:
        raise DimensionMismatchError("need at least one operator")
    dims = {op.dim for op in ops}
    if len(dims) != 1:
        raise DimensionMismatchError(f"operators have different dimensions {sorted(dims)}")
    dim = dims.pop()
    if h is not None and h.dim != dim:
        raise DimensionMismatchError(f"vector has dimension {h.dim}, operators have {dim}")
    return dim


def commutator_norm(A: HermitianOperator, B: HermitianOperator) -> float:
    a, b = A.entries, B.entries
    return float(np.linalg.norm(a @ b - b @ a))


def sum_of_squares(ops: Sequence[HermitianOperator]) -> HermitianOperator:
    dim = check_dims(ops)
    S = np.zeros((dim, dim), dtype=complex)
    for op in ops:
        S += op.square()
    return HermitianOperator(S, label="S")


def spectral_apply(M: HermitianOperator, f: Callable[[np.ndarray], np.ndarray]) -> HermitianOperator:
    """Return U f(Λ) U* for a real-valued, vectorised f."""
    dec = M.decomposition
    values = np.asarray(f(dec.eigenvalues), dtype=float)
    U = dec.eigenvectors
    return HermitianOperator((U * values) @ U.conj().T)


def _psd_sqrt(lam: np.ndarray) -> np.ndarray:
    # eigenvalues of a sum of squares can come out as -1e-16
    return np.sqrt(np.clip(lam, 0.0, None))


def cos_sqrt_sum_oracle(ops: Sequence[HermitianOperator], t: float) -> HermitianOperator:
    """cos(t√(A₁²+⋯+Aₙ²)) by diagonalising the sum of squares."""
    S = sum_of_squares(ops)
    return spectral_apply(S, lambda lam: np.cos(t * _psd_sqrt(lam)))


def sinc_sqrt_sum_oracle(ops: Sequence[HermitianOperator], t: float) -> HermitianOperator:
    """sin(t√S)/√S, taking the value t on the kernel of S."""
    S = sum_of_squares(ops)
    return spectral_apply(S, lambda lam: t * np.sinc(t * _psd_sqrt(lam) / np.pi))


def heat_semigroup(M: HermitianOperator, rho: float) -> HermitianOperator:
    """exp(−ρM²)."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return spectral_apply(M, lambda lam: np.exp(-rho * lam * lam))


def trotter_product(A: HermitianOperator, B: HermitianOperator, rho: float, m: int) -> np.ndarray:
    """[exp(−ρA²/m) exp(−ρB²/m)]^m.

    The product of two non-commuting semigroups is not Hermitian, so the
    result is returned as a plain array.
    """
    check_dims([A, B])
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    step = heat_semigroup(A, rho / m).entries @ heat_semigroup(B, rho / m).entries
    return np.linalg.matrix_power(step, m)


class AnalyticBound(NamedTuple):
    C: float
    K: float
    radius: float


def analytic_bound(A: HermitianOperator, B: HermitianOperator, h: Union[StateVector, ArrayLike]) -> AnalyticBound:
    """Constants C, K with ‖A^{α₁}B^{α₂}⋯h‖ ≤ C K^{|α|} |α|! for bounded A, B.

    ``radius`` is 1/(√2 K), infinite when both operators vanish.
    """
    return analytic_bound_q([A, B], h)


def analytic_bound_q(ops: Sequence[HermitianOperator], h: Union[StateVector, ArrayLike]) -> AnalyticBound:
    """Same constants for q operators; the series then converges for |t| < 1/(√q K)."""
    h = as_state(h)
    check_dims(ops, h)
    C = h.norm()
    K = max(op.norm2 for op in ops)
    radius = math.inf if K == 0.0 else 1.0 / (math.sqrt(len(ops)) * K)
    return AnalyticBound(C=C, K=K, radius=radius)
