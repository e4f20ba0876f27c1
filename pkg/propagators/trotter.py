"""Non-commutative propagators as limits of Trotter-type cosine series.

For non-commuting A, B the product of one-dimensional ascents

    F_m(t) = Σ_n (−1)^n t^{2n} n!/(2n)! · W_n h,
    W_n = [z^n] Π_{j=1}^{m} (e^{zA²/m} e^{zB²/m}),

tends to cos(t√(A²+B²))h as m → ∞. ``taylor_series_build`` produces the
vectors W_n h by multiplying truncated exponential series factor by factor;
the drivers double m until successive iterates agree.
"""

import enum
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from propagators.commutative import (
    OddTimeSeries,
    ascent_prefactor,
    d_operator_apply,
    ordered_moment_series,
    truncation_order,
)
from propagators.errors import OutsideRadiusError, SeriesMemoryError, UnsupportedRuleError
from propagators.operators import (
    HermitianOperator,
    StateVector,
    analytic_bound_q,
    as_state,
    check_dims,
)
from propagators.quadrature import DEFAULT_MC_SEED, build_ball_rule

logger = logging.getLogger(__name__)

SERIES_MEMORY_BUDGET = 1 << 30
COMMUTING_ATOL = 1e-12
EMPIRICAL_START_ORDER = 16
EMPIRICAL_MAX_ORDER = 1024
MAX_CROSSCHECK_M = 3


class Verdict(str, enum.Enum):
    CONVERGED = "converged"
    SLOW = "slow"
    OUTSIDE_RADIUS = "outside_radius"


@dataclass(frozen=True)
class TaylorOperatorSeries:
    order: int
    coeffs: np.ndarray  # row n holds W_n h
    m: int
    factor_norms: Tuple[float, ...]

    @property
    def vectors(self) -> List[StateVector]:
        return [StateVector(row) for row in self.coeffs]


@dataclass
class ConvergenceReport:
    m_values: List[int]
    errors: List[float]
    truncation_order: int
    tail_bound: float
    radius: float
    verdict: Verdict
    caution: bool = False
    differences: List[float] = field(default_factory=list)
    # last kept term of the refined series; only set outside the radius
    empirical_tail: float = 0.0
    formula: str = "noncommutative-series-limit"

    def to_dict(self) -> dict:
        data = asdict(self)
        data["verdict"] = self.verdict.value
        return data


def taylor_series_build(
    ops: Sequence[HermitianOperator],
    h,
    m: int,
    N: int,
) -> TaylorOperatorSeries:
    """W_0 h,…,W_N h for the pattern (A₁²,…,A_q²) repeated m times.

    Each factor exp(zX/m) is truncated at order N, which is exact for the
    coefficients kept. The rightmost factor acts on h first.
    """
    h = as_state(h)
    dim = check_dims(ops, h)
    if N < 0 or m < 1:
        raise ValueError(f"need N >= 0 and m >= 1, got N={N}, m={m}")
    if 2 * (N + 1) * dim * 16 > SERIES_MEMORY_BUDGET:
        raise SeriesMemoryError(f"order {N} at dimension {dim} exceeds the series memory budget")

    factors = [op.square() / m for op in ops]
    factor_norms = tuple(op.norm2 ** 2 / m for op in ops)
    V = np.zeros((N + 1, dim), dtype=complex)
    V[0] = h.entries
    for _ in range(m):
        for X in reversed(factors):
            new = V.copy()
            tmp = V
            for j in range(1, N + 1):
                tmp = (tmp[:-1] @ X.T) / j
                if not tmp.any():
                    break
                new[j:] += tmp
            V = new
    return TaylorOperatorSeries(order=N, coeffs=V, m=m, factor_norms=factor_norms)


def _term_scales(t: float, N: int, kind: str) -> np.ndarray:
    """(−1)^n t^{2n} n!/(2n)! for cosine, (−1)^n t^{2n+1} n!/(2n+1)! for sine.

    Magnitudes are formed in log space so large N does not overflow.
    """
    n = np.arange(N + 1)
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    if t == 0.0:
        base = (n == 0).astype(float)
        return base if kind == "cos" else np.zeros(N + 1)
    shift = 0 if kind == "cos" else 1
    log_mag = (2 * n + shift) * math.log(abs(t)) + np.array(
        [math.lgamma(k + 1) - math.lgamma(2 * k + shift + 1) for k in n]
    )
    mag = np.exp(log_mag)
    if kind == "sin" and t < 0:
        mag = -mag
    return sign * mag


def series_tail_bound(C: float, K: float, t: float, N: int, q: int = 2) -> float:
    """C (q t²K²)^{N+1} / (1 − q t²K²), the dropped tail of the cosine series.

    W_n is the z^n coefficient of a product of exponentials whose exponents
    have norms summing to at most qK², so ‖W_n h‖ ≤ C (qK²)^n / n! with
    C = ‖h‖ from ``analytic_bound_q``. The n-th term, scaled by
    t^{2n} n!/(2n)!, is then below C (q t²K²)^n and the geometric sum past N
    gives the bound. It is finite only for q t²K² < 1, i.e. |t| < 1/(√q K).
    """
    ratio = q * t * t * K * K
    if C == 0.0 or ratio == 0.0:
        return 0.0
    if ratio >= 1.0:
        return math.inf
    return C * ratio ** (N + 1) / (1.0 - ratio)


def _certified_order(C: float, K: float, t: float, tol: float, q: int) -> int:
    ratio = q * t * t * K * K
    if C == 0.0 or ratio == 0.0:
        return 0
    # C ratio^{N+1}/(1−ratio) ≤ tol
    need = math.log(tol * (1.0 - ratio) / C) / math.log(ratio) - 1.0
    return max(0, int(math.ceil(need)))


class FmEvaluation(NamedTuple):
    vector: StateVector
    order: int
    tail_bound: float
    caution: bool
    empirical_tail: float = 0.0


def evaluate_fm(
    ops: Sequence[HermitianOperator],
    h,
    m: int,
    t: float,
    tol: float,
    kind: str = "cos",
    allow_outside_radius: bool = False,
) -> FmEvaluation:
    """F_m(t) for the pattern ``ops`` with its truncation record."""
    h = as_state(h)
    q = len(ops)
    bound = analytic_bound_q(ops, h)
    inside = abs(t) < bound.radius
    if inside:
        N = _certified_order(bound.C, bound.K, t, tol, q)
        series = taylor_series_build(ops, h, m, N)
        tail = series_tail_bound(bound.C, bound.K, t, N, q)
        if kind == "sin":
            tail *= abs(t)
        vector = _term_scales(t, N, kind) @ series.coeffs
        return FmEvaluation(StateVector(vector), N, tail, False)

    if not allow_outside_radius:
        raise OutsideRadiusError(t, bound.radius)
    N = EMPIRICAL_START_ORDER
    while True:
        series = taylor_series_build(ops, h, m, N)
        terms = series.coeffs * _term_scales(t, N, kind)[:, None]
        last = float(np.linalg.norm(terms[-1]))
        if last <= tol or N >= EMPIRICAL_MAX_ORDER:
            break
        N *= 2
    if last > tol:
        logger.warning("series at |t|=%g still has last term %.2e at order %d", abs(t), last, N)
    # no analytic bound holds here; the refinement residual is kept apart
    return FmEvaluation(StateVector(terms.sum(axis=0)), N, math.inf, True, last)


def fm_evaluate(A: HermitianOperator, B: HermitianOperator, h, m: int, t: float, tol: float) -> StateVector:
    """F_m(t; A, B; h) by the series form, certified inside |t| < 1/(√2 K)."""
    return evaluate_fm([A, B], h, m, t, tol).vector


def fm_quadrature_crosscheck(
    A: HermitianOperator,
    B: HermitianOperator,
    h,
    m: int,
    t: float,
    mc_samples: Optional[int] = None,
    seed: int = DEFAULT_MC_SEED,
) -> StateVector:
    """F_m(t) straight from its ball-integral form in dimension 2m.

    The node integrand cos(ω₁tA/√m)cos(ω₂tB/√m)⋯cos(ω_{2m}tB/√m)h is expanded
    in t and the D-ladder is applied to the coefficients.
    """
    if not 1 <= m <= MAX_CROSSCHECK_M:
        raise UnsupportedRuleError(f"quadrature cross-check needs 1 <= m <= {MAX_CROSSCHECK_M}, got {m}")
    h = as_state(h)
    check_dims([A, B], h)
    scale = 1.0 / math.sqrt(m)
    matrices = [A.entries * scale, B.entries * scale] * m
    K = max(A.norm2, B.norm2)
    N = truncation_order(2.0 * m * K * scale * abs(t))
    if mc_samples:
        rule = build_ball_rule(2 * m, N, method="monte-carlo", samples=mc_samples, seed=seed)
    else:
        rule = build_ball_rule(2 * m, N, method="product")
    bracket = ordered_moment_series(matrices, rule.moment, N, h.entries)
    even = d_operator_apply(OddTimeSeries(2 * m - 1, tuple(bracket)), m)
    return StateVector(ascent_prefactor(2 * m) * even.evaluate(t))


def _commuting(ops: Sequence[HermitianOperator]) -> bool:
    for A, B in combinations(ops, 2):
        a, b = A.entries, B.entries
        if np.linalg.norm(a @ b - b @ a) > COMMUTING_ATOL * max(1.0, A.frobenius * B.frobenius):
            return False
    return True


def noncomm_limit(
    ops: Sequence[HermitianOperator],
    h,
    t: float,
    tol: float,
    kind: str = "cos",
    m0: int = 8,
    m_cap: int = 1024,
    richardson: bool = False,
    reference: Optional[np.ndarray] = None,
) -> Tuple[StateVector, ConvergenceReport]:
    """Drive F_m over m = m0, 2m0, 4m0, … until ‖F_{2m} − F_m‖ ≤ tol·‖h‖.

    Outside the certified radius the run continues with empirical truncation
    and the report carries a caution flag. When ``reference`` is given the
    report's errors are measured against it, otherwise they are the successive
    differences.
    """
    h = as_state(h)
    check_dims(ops, h)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    bound = analytic_bound_q(ops, h)
    threshold = tol * h.norm()
    started = time.perf_counter()

    def run(m: int) -> FmEvaluation:
        return evaluate_fm(ops, h, m, t, tol, kind=kind, allow_outside_radius=True)

    m = m0
    current = run(m)
    m_values, iterates, differences = [m], [current], []
    caution = current.caution
    verdict = Verdict.CONVERGED
    if not _commuting(ops):
        while True:
            if 2 * m > m_cap:
                verdict = Verdict.SLOW
                break
            m *= 2
            nxt = run(m)
            diff = float(np.linalg.norm(nxt.vector.entries - current.vector.entries))
            m_values.append(m)
            iterates.append(nxt)
            differences.append(diff)
            caution = caution or nxt.caution
            current = nxt
            if diff <= threshold:
                break

    result = current.vector.entries
    if richardson and len(iterates) > 1:
        result = 2.0 * iterates[-1].vector.entries - iterates[-2].vector.entries
    if verdict is Verdict.CONVERGED and caution:
        verdict = Verdict.OUTSIDE_RADIUS

    if reference is not None:
        ref = np.asarray(reference)
        errors = [float(np.linalg.norm(it.vector.entries - ref)) for it in iterates]
    else:
        errors = list(differences)
    report = ConvergenceReport(
        m_values=m_values,
        errors=errors,
        truncation_order=current.order,
        tail_bound=current.tail_bound,
        radius=bound.radius,
        verdict=verdict,
        caution=caution,
        differences=differences,
        empirical_tail=current.empirical_tail,
    )
    logger.info(
        "%s limit: m=%s verdict=%s order=%d (%.2fs)",
        kind, m_values[-1], verdict.value, current.order, time.perf_counter() - started,
    )
    if verdict is Verdict.SLOW:
        logger.warning("m cap %d reached before successive differences fell below %.1e", m_cap, threshold)
    return StateVector(result), report


def cos_noncomm(A, B, h, t: float, tol: float, **kwargs) -> Tuple[StateVector, ConvergenceReport]:
    return noncomm_limit([A, B], h, t, tol, kind="cos", **kwargs)


def cos_noncomm_q(ops: Sequence[HermitianOperator], h, t: float, tol: float, **kwargs) -> Tuple[StateVector, ConvergenceReport]:
    if len(ops) < 2:
        raise ValueError(f"need at least two operators, got {len(ops)}")
    return noncomm_limit(ops, h, t, tol, kind="cos", **kwargs)


def sin_noncomm(A, B, h, t: float, tol: float, **kwargs) -> StateVector:
    """sin(t√(A²+B²))/√(A²+B²) h through the series with terms scaled by t/(2n+1)."""
    return noncomm_limit([A, B], h, t, tol, kind="sin", **kwargs)[0]


class LimitGaps(NamedTuple):
    target: StateVector
    m_values: Tuple[int, ...]
    gaps: Tuple[float, ...]


def taylor_limit_check(
    A: HermitianOperator,
    B: HermitianOperator,
    n: int,
    h,
    m_values: Sequence[int] = (8, 16, 32, 64),
) -> LimitGaps:
    """Gaps ‖W_n h − (A²+B²)^n h/n!‖ as m grows."""
    if not 0 <= n <= 8:
        raise ValueError(f"n must lie in [0, 8], got {n}")
    h = as_state(h)
    S = A.square() + B.square()
    target = np.linalg.matrix_power(S, n) @ h.entries / math.factorial(n)
    gaps = []
    for m in m_values:
        W = taylor_series_build([A, B], h, m, n).coeffs[n]
        gaps.append(float(np.linalg.norm(W - target)))
    return LimitGaps(StateVector(target), tuple(m_values), tuple(gaps))


class RateFit(NamedTuple):
    exponent: float
    constant: float


def trotter_rate_fit(m_values: Sequence[int], errors: Sequence[float]) -> RateFit:
    """Least-squares fit of error(m) ≈ C/m^p on log–log axes."""
    m = np.asarray(m_values, dtype=float)
    e = np.asarray(errors, dtype=float)
    keep = e > 0
    if keep.sum() < 2:
        raise ValueError("need at least two positive errors to fit a rate")
    slope, intercept = np.polyfit(np.log(m[keep]), np.log(e[keep]), 1)
    return RateFit(exponent=float(-slope), constant=float(math.exp(intercept)))
