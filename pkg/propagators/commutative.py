# propagators/commutative.py

"""Wave propagators of commuting families assembled from one-dimensional cosines.

For n = 2m commuting operators

    cos(t√S) = (2π)^{−m} D[ t^{2m−1} ∫_{B^{2m}} Π cos(tωᵢAᵢ) (1−|ω|²)^{−1/2} dω ]

and for n = 2m+1 the same bracket is averaged over S^{2m} with prefactor
1/(2(2π)^m). D = ∂/∂t (1/t ∂/∂t)^{m−1}. The integrand is expanded node by node
into its even cosine series, so D acts on monomials exactly and no numerical
differentiation is involved.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, roots_genlaguerre, roots_legendre

from propagators.errors import (
    DecompositionError,
    NonCommutingFamilyError,
    ParityMismatchError,
    QuadratureLevelError,
)
from propagators.operators import (
    HermitianOperator,
    check_dims,
    heat_semigroup,
)
from propagators.quadrature import (
    DEFAULT_MC_SEED,
    build_ball_rule,
    build_sphere_rule,
)

logger = logging.getLogger(__name__)

COMMUTATOR_RTOL = 1e-10
SERIES_TAIL_TOL = 1e-12
MAX_TRUNCATION = 400
MAX_DIRECT_SCALE = 8.0
# frac(i·φ) + ½ keeps the mixing coefficients away from accidental ties
_GOLDEN = 0.6180339887498949


@dataclass(frozen=True)
class JointDiagonalization:
    basis: np.ndarray
    eigenvalues: np.ndarray  # shape (n, dim): row i holds the spectrum of Aᵢ in the common basis

    def apply(self, values: np.ndarray) -> np.ndarray:
        """U diag(values) U* for values indexed by the common eigenvectors."""
        U = self.basis
        return (U * values) @ U.conj().T


class CommutingFamily:
    """Hermitian operators A₁,…,Aₙ with ‖[Aᵢ,Aⱼ]‖_F ≤ 1e−10·‖Aᵢ‖_F‖Aⱼ‖_F."""

    def __init__(self, ops: Sequence[HermitianOperator], tolerance: float = COMMUTATOR_RTOL):
        ops = list(ops)
        self.dim = check_dims(ops)
        defect = 0.0
        for A, B in combinations(ops, 2):
            scale = A.frobenius * B.frobenius
            if scale == 0.0:
                continue
            a, b = A.entries, B.entries
            defect = max(defect, float(np.linalg.norm(a @ b - b @ a)) / scale)
        if defect > tolerance:
            raise NonCommutingFamilyError(defect, tolerance)
        self.ops = ops
        self.commutator_defect = defect

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def norm_sum(self) -> float:
        return sum(op.norm2 for op in self.ops)

    def extended(self, op: HermitianOperator) -> "CommutingFamily":
        return CommutingFamily(self.ops + [op])

    @cached_property
    def joint(self) -> JointDiagonalization:
        return joint_diagonalization(self)


def joint_diagonalization(family: CommutingFamily) -> JointDiagonalization:
    """Common eigenbasis from one generic linear combination Σcᵢ Aᵢ."""
    coeffs = (np.arange(1, family.n + 1) * _GOLDEN) % 1.0 + 0.5
    mix = HermitianOperator(sum(c * op.entries for c, op in zip(coeffs, family.ops)))
    U = mix.decomposition.eigenvectors
    rows = []
    for i, op in enumerate(family.ops):
        rotated = U.conj().T @ op.entries @ U
        diag = np.real(np.diag(rotated))
        off = float(np.linalg.norm(rotated - np.diag(diag)))
        if off > 1e-8 * max(op.frobenius, 1.0):
            raise DecompositionError(
                f"joint diagonalization left off-diagonal mass {off:.3e} in operator {i}; "
                "the mixing combination is degenerate"
            )
        rows.append(diag)
    return JointDiagonalization(basis=U, eigenvalues=np.array(rows))


# -- time series and the D-ladder ------------------------------------------------


@dataclass(frozen=True)
class OddTimeSeries:
    """G(t) = Σ_k c_k t^{2k+parity_order}."""

    parity_order: int
    coefficients: Tuple[np.ndarray, ...]
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.parity_order % 2 == 0:
            raise ParityMismatchError(f"odd series needs an odd parity order, got {self.parity_order}")

    @property
    def truncation(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, t: float) -> np.ndarray:
        return _horner(self.coefficients, t * t) * t ** self.parity_order


@dataclass(frozen=True)
class EvenTimeSeries:
    """E(t) = Σ_k e_k t^{2k}."""

    coefficients: Tuple[np.ndarray, ...]
    tail_bound: float = 0.0

    @property
    def truncation(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, t: float) -> np.ndarray:
        return _horner(self.coefficients, t * t)


def _horner(coefficients: Sequence[np.ndarray], s: float) -> np.ndarray:
    acc = np.array(coefficients[-1], dtype=complex)
    for c in reversed(coefficients[:-1]):
        acc = acc * s + c
    return acc


def ladder_factor(k: int, m: int, drop_outer: bool = False) -> int:
    """Coefficient produced by D on t^{2k+2m−1}: (2k+1)(2k+3)⋯(2k+2m−1).

    With ``drop_outer`` the final ∂/∂t is skipped, leaving (2k+3)⋯(2k+2m−1)
    in front of t^{2k+1}.
    """
    first = 1 if drop_outer else 0
    return math.prod(2 * k + 2 * j + 1 for j in range(first, m))


def d_operator_apply(series: OddTimeSeries, m: int) -> EvenTimeSeries:
    """Apply ∂/∂t (1/t ∂/∂t)^{m−1} to Σ c_k t^{2k+2m−1} coefficient by coefficient."""
    if m < 1 or series.parity_order != 2 * m - 1:
        raise ParityMismatchError(f"D for m={m} acts on t^(2k+{2 * m - 1}) series, got parity order {series.parity_order}")
    coeffs = tuple(c * ladder_factor(k, m) for k, c in enumerate(series.coefficients))
    return EvenTimeSeries(coeffs, series.tail_bound)


def d_operator_apply_sine(series: OddTimeSeries, m: int) -> OddTimeSeries:
    """(1/t ∂/∂t)^{m−1} only, which turns the cosine bracket into sin(t√S)/√S."""
    if m < 1 or series.parity_order != 2 * m - 1:
        raise ParityMismatchError(f"D for m={m} acts on t^(2k+{2 * m - 1}) series, got parity order {series.parity_order}")
    coeffs = tuple(c * ladder_factor(k, m, drop_outer=True) for k, c in enumerate(series.coefficients))
    return OddTimeSeries(1, coeffs, series.tail_bound)


# -- series of ordered cosine products -------------------------------------------


def truncation_order(scale: float, tol: float = SERIES_TAIL_TOL) -> int:
    """Smallest N with scale^{2N+2}/(2N+2)! ≤ tol."""
    if scale <= 0.0:
        return 0
    log_tol = math.log(tol)
    for N in range(MAX_TRUNCATION + 1):
        if (2 * N + 2) * math.log(scale) - math.lgamma(2 * N + 3) <= log_tol:
            return N
    raise ValueError(f"cosine tail does not reach {tol:g} below order {MAX_TRUNCATION} for scale {scale:g}")


def cosine_powers(X: np.ndarray, order: int) -> List[Optional[np.ndarray]]:
    """[(−1)^j X^{2j}/(2j)! for j ≤ order]; trailing entries are None once X vanishes."""
    if not np.any(X):
        return [np.eye(X.shape[0], dtype=complex)] + [None] * order
    X2 = X @ X
    powers = [np.eye(X.shape[0], dtype=complex)]
    for j in range(1, order + 1):
        powers.append(powers[-1] @ X2 * (-1.0 / ((2 * j - 1) * (2 * j))))
    return powers


def ordered_moment_series(
    matrices: Sequence[np.ndarray],
    moment: Callable[[Tuple[int, ...]], float],
    order: int,
    start: np.ndarray,
) -> List[np.ndarray]:
    """Coefficients c_k of t^{2k} in ∫ cos(tω₁X₁)⋯cos(tωₙXₙ) dμ(ω) · start.

    c_k = Σ_{|α|=k} μ(ω^{2α}) P₁[α₁]⋯Pₙ[αₙ]·start with Pᵢ[j] = (−1)^j Xᵢ^{2j}/(2j)!.
    The product order is kept, so the same walk serves non-commuting operators.
    """
    n = len(matrices)
    powers = [cosine_powers(X, order) for X in matrices]
    start = np.asarray(start, dtype=complex)
    coeffs = [np.zeros_like(start) for _ in range(order + 1)]
    alpha = [0] * n

    def walk(i: int, partial: np.ndarray, used: int) -> None:
        for j in range(order - used + 1):
            P = powers[i][j]
            if P is None:
                break
            alpha[i] = j
            term = partial if j == 0 else P @ partial
            if i == 0:
                coeffs[used + j] += moment(tuple(alpha)) * term
            else:
                walk(i - 1, term, used + j)
        alpha[i] = 0

    walk(n - 1, start, 0)
    return coeffs


@dataclass(frozen=True)
class AscentExpansion:
    n: int
    m: int
    truncation: int
    rule_level: int
    tail_bound: float
    moment_error: float
    prefactor: float
    bracket: Tuple[np.ndarray, ...]
    rule: dict = field(default_factory=dict)

    @property
    def formula(self) -> str:
        if self.n == 1:
            return "two-point-average"
        return "weighted-ball-ascent" if self.n % 2 == 0 else "sphere-ascent"

    def cosine_series(self) -> EvenTimeSeries:
        if self.m == 0:
            return EvenTimeSeries(tuple(self.prefactor * c for c in self.bracket), self.tail_bound)
        series = OddTimeSeries(2 * self.m - 1, self.bracket, self.tail_bound)
        even = d_operator_apply(series, self.m)
        return EvenTimeSeries(tuple(self.prefactor * c for c in even.coefficients), self.tail_bound)

    def sine_series(self) -> OddTimeSeries:
        if self.m == 0:
            # sin(tA)/A = ∫₀ᵗ cos(sA) ds, term by term
            coeffs = tuple(self.prefactor * c / (2 * k + 1) for k, c in enumerate(self.bracket))
            return OddTimeSeries(1, coeffs, self.tail_bound)
        series = OddTimeSeries(2 * self.m - 1, self.bracket, self.tail_bound)
        odd = d_operator_apply_sine(series, self.m)
        return OddTimeSeries(1, tuple(self.prefactor * c for c in odd.coefficients), self.tail_bound)


def ascent_prefactor(n: int) -> float:
    m = n // 2
    if n % 2 == 0:
        return (2.0 * math.pi) ** (-m)
    return 1.0 / (2.0 * (2.0 * math.pi) ** m)


def ascent_expansion(
    family: CommutingFamily,
    t: float,
    rule_level: Optional[int] = None,
    order: Optional[int] = None,
    method: str = "auto",
    seed: int = DEFAULT_MC_SEED,
    threads: int = 0,
) -> AscentExpansion:
    """Build the ascent series for ``family``, certified for times up to |t|.

    ``order`` defaults to the cosine-tail truncation for Σ‖Aᵢ‖·|t|; the rule
    level defaults to the same order and may not fall below it.
    """
    n = family.n
    m = n // 2
    scale = family.norm_sum * abs(t)
    N = truncation_order(scale) if order is None else order
    level = N if rule_level is None else rule_level
    if level < N:
        raise QuadratureLevelError(level, N)

    if n % 2 == 0:
        rule = build_ball_rule(n, level, method=method, seed=seed, threads=threads)
    else:
        rule = build_sphere_rule(n, level, method=method, seed=seed, threads=threads)
    moment_error = rule.certified_error(N)
    tail = 0.0 if scale == 0.0 else math.exp((2 * N + 2) * math.log(scale) - gammaln(2 * N + 3))

    bracket = ordered_moment_series(
        [op.entries for op in family.ops], rule.moment, N, np.eye(family.dim, dtype=complex)
    )
    logger.info(
        "ascent n=%d m=%d: order %d, rule %s level %d, moment error %.2e, tail %.2e",
        n, m, N, rule.kind, level, moment_error, tail,
    )
    if moment_error > 1e-8:
        logger.warning("rule moment self-test error %.2e exceeds 1e-8; results carry it", moment_error)
    return AscentExpansion(
        n=n, m=m, truncation=N, rule_level=level, tail_bound=tail, moment_error=moment_error,
        prefactor=ascent_prefactor(n), bracket=tuple(bracket), rule=rule.describe(),
    )


def _halvings(family: CommutingFamily, t: float) -> int:
    """Halvings of t that bring Σ‖Aᵢ‖·|t| to at most MAX_DIRECT_SCALE."""
    scale = family.norm_sum * abs(t)
    if scale <= MAX_DIRECT_SCALE:
        return 0
    return int(math.ceil(math.log2(scale / MAX_DIRECT_SCALE)))


class AscentEvaluation(NamedTuple):
    value: HermitianOperator
    expansion: AscentExpansion
    halvings: int


def evaluate_ascent(
    family: CommutingFamily,
    t: float,
    rule_level: Optional[int] = None,
    sine: bool = False,
    **kwargs,
) -> AscentEvaluation:
    """Evaluate at t/2^k, then climb back with cos 2x = 2cos²x − 1 and sin 2x = 2 sin x cos x.

    The alternating series loses about eps·cosh(scale) to cancellation;
    k keeps the summed scale at or below MAX_DIRECT_SCALE. Extra keyword
    arguments go to ``ascent_expansion``.
    """
    k = _halvings(family, t)
    tau = t / 2 ** k
    expansion = ascent_expansion(family, tau, rule_level, **kwargs)
    C = expansion.cosine_series().evaluate(tau)
    S = expansion.sine_series().evaluate(tau) if sine else None
    eye = np.eye(family.dim, dtype=complex)
    for _ in range(k):
        if sine:
            S = 2.0 * S @ C
        C = 2.0 * C @ C - eye
    if k:
        logger.debug("ascent at |t|=%g evaluated at |t|/2^%d and doubled back", abs(t), k)
    return AscentEvaluation(HermitianOperator(S if sine else C), expansion, k)


def cos_ascent_even(family: CommutingFamily, t: float, rule_level: Optional[int] = None) -> HermitianOperator:
    if family.n % 2:
        raise ParityMismatchError(f"even-dimension ascent needs an even number of operators, got {family.n}")
    return evaluate_ascent(family, t, rule_level).value


def cos_ascent_odd(family: CommutingFamily, t: float, rule_level: Optional[int] = None) -> HermitianOperator:
    if family.n % 2 == 0:
        raise ParityMismatchError(f"odd-dimension ascent needs an odd number of operators, got {family.n}")
    return evaluate_ascent(family, t, rule_level).value


def cos_ascent(family: CommutingFamily, t: float, rule_level: Optional[int] = None) -> HermitianOperator:
    if family.n % 2 == 0:
        return cos_ascent_even(family, t, rule_level)
    return cos_ascent_odd(family, t, rule_level)


def sin_ascent(family: CommutingFamily, t: float, rule_level: Optional[int] = None) -> HermitianOperator:
    """sin(t√S)/√S: the cosine construction with the outer ∂/∂t dropped."""
    return evaluate_ascent(family, t, rule_level, sine=True).value


# -- derivation checks ------------------------------------------------------------


class TransmutationPair(NamedTuple):
    lhs: HermitianOperator
    rhs: HermitianOperator
    gap: float


def transmutation_check(B: HermitianOperator, rho: float, tol: float = 1e-12) -> TransmutationPair:
    """exp(−ρB²) against (4πρ)^{−1/2} ∫ e^{−t²/4ρ} cos(Bt) dt.

    The integral is cut at |t| = T with e^{−T²/4ρ} = tol and done by
    Gauss–Legendre on [−T, T] per eigenvalue of B.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    lhs = heat_semigroup(B, rho)
    T = math.sqrt(4.0 * rho * math.log(1.0 / tol))
    points = 64 + int(math.ceil(2.0 * T * (B.norm2 + 1.0 / math.sqrt(rho))))
    x, w = roots_legendre(points)
    s, ws = T * x, T * w
    dec = B.decomposition
    gauss = ws * np.exp(-s * s / (4.0 * rho))
    values = np.cos(np.outer(dec.eigenvalues, s)) @ gauss / math.sqrt(4.0 * math.pi * rho)
    U = dec.eigenvectors
    rhs = HermitianOperator((U * values) @ U.conj().T)
    gap = float(np.linalg.norm(lhs.entries - rhs.entries))
    return TransmutationPair(lhs, rhs, gap)


def product_heat_expansion_check(family: CommutingFamily, rho: float, laguerre_points: int = 60) -> float:
    """Frobenius gap between Π exp(−ρAᵢ²) and its radial Gaussian-cosine average.

    With u = t²/4ρ the radial integral becomes a generalised Gauss–Laguerre
    rule with exponent (n−2)/2 and prefactor π^{−n/2}/2; the angular part uses
    a product sphere rule, both evaluated on the joint spectrum.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    n = family.n
    joint = family.joint
    lam = joint.eigenvalues
    spread = float(np.max(np.linalg.norm(lam, axis=0))) if lam.size else 0.0
    t_eff = 2.0 * math.sqrt(40.0 * rho)
    level = int(min(80, 10 + math.ceil(1.5 * t_eff * spread)))
    sphere = build_sphere_rule(n, level, method="product")
    nodes, weights = sphere.nodes, sphere.weights

    u, wu = roots_genlaguerre(laguerre_points, (n - 2) / 2)
    values = np.zeros(family.dim)
    for uj, wj in zip(u, wu):
        t = 2.0 * math.sqrt(rho * uj)
        # (nodes, dim) products of cos(t ωᵢ λᵢ)
        phase = np.ones((nodes.shape[0], family.dim))
        for i in range(n):
            phase *= np.cos(t * np.outer(nodes[:, i], lam[i]))
        values += wj * (weights @ phase)
    values *= 0.5 * math.pi ** (-n / 2)

    radial = joint.apply(values)
    product = np.eye(family.dim, dtype=complex)
    for op in family.ops:
        product = product @ heat_semigroup(op, rho).entries
    gap = float(np.linalg.norm(radial - product))
    logger.debug("product heat expansion n=%d rho=%g: sphere level %d, gap %.2e", n, rho, level, gap)
    return gap
