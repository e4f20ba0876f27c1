# tests/test_trotter.py

import math

import numpy as np
import pytest

from propagators.errors import OutsideRadiusError, UnsupportedRuleError
from propagators.fixtures import random_diagonal_family, random_hermitian, random_pair, random_unit_vector
from propagators.operators import HermitianOperator, StateVector, cos_sqrt_sum_oracle, sinc_sqrt_sum_oracle
from propagators.trotter import (
    Verdict,
    cos_noncomm,
    cos_noncomm_q,
    evaluate_fm,
    fm_evaluate,
    fm_quadrature_crosscheck,
    noncomm_limit,
    series_tail_bound,
    sin_noncomm,
    taylor_limit_check,
    taylor_series_build,
    trotter_rate_fit,
)


def test_taylor_coefficients_of_commuting_scalars():
    A, B = HermitianOperator.scalar(0.6), HermitianOperator.scalar(0.8)
    series = taylor_series_build([A, B], [1.0], m=5, N=6)
    for n in range(7):
        assert series.coeffs[n][0].real == pytest.approx(1.0 / math.factorial(n), rel=1e-12)


def test_commuting_pair_is_exact_for_every_m(rng):
    ops = random_diagonal_family(2, 4, rng)
    h = random_unit_vector(4, rng)
    oracle = cos_sqrt_sum_oracle(ops, 0.3).entries @ h.entries
    for m in (1, 3, 8):
        result = evaluate_fm(ops, h, m, 0.3, 1e-13)
        assert not result.caution
        assert np.linalg.norm(result.vector.entries - oracle) < 1e-11


def test_tail_bound_respects_tolerance(pair):
    A, B, h = pair
    result = evaluate_fm([A, B], h, 8, 0.3, 1e-10)
    assert result.tail_bound <= 1e-10


def test_outside_radius_is_refused_unless_allowed(pair):
    A, B, h = pair
    t = 2.0
    with pytest.raises(OutsideRadiusError):
        fm_evaluate(A, B, h, 8, t, 1e-8)
    result = evaluate_fm([A, B], h, 8, t, 1e-8, allow_outside_radius=True)
    assert result.caution


def test_series_tail_bound_diverges_at_radius():
    assert math.isinf(series_tail_bound(1.0, 1.0, 1.0, 10))
    assert series_tail_bound(0.0, 1.0, 0.1, 10) == 0.0


def test_limit_converges_to_oracle(pair):
    A, B, h = pair
    t, tol = 0.3, 1e-3
    oracle = cos_sqrt_sum_oracle([A, B], t).entries @ h.entries
    vector, report = cos_noncomm(A, B, h, t, tol, reference=oracle)
    assert report.verdict is Verdict.CONVERGED
    assert report.m_values == [8 * 2 ** i for i in range(len(report.m_values))]
    assert report.differences[-1] <= tol
    assert np.linalg.norm(vector.entries - oracle) <= 2 * tol
    assert report.errors[-1] < report.errors[0]


def test_richardson_improves_the_limit(pair):
    A, B, h = pair
    t = 0.3
    oracle = cos_sqrt_sum_oracle([A, B], t).entries @ h.entries
    plain, _ = cos_noncomm(A, B, h, t, 1e-3)
    extrapolated, _ = cos_noncomm(A, B, h, t, 1e-3, richardson=True)
    assert np.linalg.norm(extrapolated.entries - oracle) < np.linalg.norm(plain.entries - oracle)


def test_m_cap_yields_slow_verdict(pair):
    A, B, h = pair
    _, report = cos_noncomm(A, B, h, 0.3, 1e-12, m0=8, m_cap=8)
    assert report.verdict is Verdict.SLOW
    assert report.m_values == [8]
    assert report.to_dict()["verdict"] == "slow"


def test_commuting_family_needs_no_doubling(rng):
    ops = random_diagonal_family(3, 4, rng)
    _, report = cos_noncomm_q(ops, random_unit_vector(4, rng), 0.2, 1e-8)
    assert report.m_values == [8]
    assert report.verdict is Verdict.CONVERGED


def test_sine_limit_on_commuting_pair(rng):
    A, B = random_diagonal_family(2, 3, rng)
    h = random_unit_vector(3, rng)
    result = sin_noncomm(A, B, h, 0.4, 1e-10)
    oracle = sinc_sqrt_sum_oracle([A, B], 0.4).entries @ h.entries
    assert np.linalg.norm(result.entries - oracle) < 1e-9


def test_limit_rejects_non_positive_tolerance(pair):
    A, B, h = pair
    with pytest.raises(ValueError):
        cos_noncomm(A, B, h, 0.3, 0.0)


def test_series_matches_quadrature_form(rng):
    A, B = random_pair(3, rng, 1.0)
    h = random_unit_vector(3, rng)
    series = fm_evaluate(A, B, h, 2, 0.2, 1e-12)
    quad = fm_quadrature_crosscheck(A, B, h, 2, 0.2)
    assert np.linalg.norm(series.entries - quad.entries) < 1e-4


def test_quadrature_form_is_limited_to_small_m(pair):
    A, B, h = pair
    with pytest.raises(UnsupportedRuleError):
        fm_quadrature_crosscheck(A, B, h, 4, 0.2)


def test_second_taylor_coefficient_gap_is_one_over_m(pair):
    A, B, h = pair
    gaps = taylor_limit_check(A, B, 2, h, m_values=(8, 64)).gaps
    assert gaps[0] / gaps[1] == pytest.approx(8.0, rel=1e-6)


def test_taylor_limit_of_first_coefficient_is_exact(pair):
    A, B, h = pair
    gaps = taylor_limit_check(A, B, 1, h).gaps
    assert max(gaps) < 1e-12


def test_rate_fit_recovers_power_law():
    m = [8, 16, 32, 64]
    fit = trotter_rate_fit(m, [0.3 / k for k in m])
    assert fit.exponent == pytest.approx(1.0)
    assert fit.constant == pytest.approx(0.3)


def test_rate_fit_needs_two_points():
    with pytest.raises(ValueError):
        trotter_rate_fit([8, 16], [0.1, 0.0])


def test_state_vector_is_immutable():
    v = StateVector(np.ones(3))
    with pytest.raises(ValueError):
        v.entries[0] = 2.0


def test_outside_radius_report_has_no_analytic_tail(pair):
    A, B, h = pair
    _, report = cos_noncomm(A, B, h, 1.0, 1e-6, m_cap=64)
    assert report.radius == pytest.approx(1.0 / math.sqrt(2.0))
    assert report.caution
    assert report.verdict in (Verdict.SLOW, Verdict.OUTSIDE_RADIUS)
    assert math.isinf(report.tail_bound)
    assert 0.0 < report.empirical_tail <= 1e-6
    assert math.isinf(report.to_dict()["tail_bound"])


def test_inside_radius_report_keeps_analytic_tail(pair):
    A, B, h = pair
    _, report = cos_noncomm(A, B, h, 0.3, 1e-3)
    assert not report.caution
    assert 0.0 < report.tail_bound <= 1e-3
    assert report.empirical_tail == 0.0


@pytest.mark.parametrize("t", [0.2, 0.5, 0.65])
def test_dropped_tail_stays_under_the_bound(pair, t):
    A, B, h = pair
    result = evaluate_fm([A, B], h, 8, t, 1e-6)
    N = result.order
    longer = taylor_series_build([A, B], h, 8, N + 10).coeffs
    scales = [(-1) ** n * t ** (2 * n) * math.factorial(n) / math.factorial(2 * n) for n in range(N + 11)]
    extended = np.asarray(scales) @ longer
    assert np.linalg.norm(extended - result.vector.entries) <= result.tail_bound


def test_noncomm_cosine_even_and_sine_odd_in_time(pair):
    A, B, h = pair
    plus, _ = cos_noncomm(A, B, h, 0.3, 1e-3, m_cap=32)
    minus, _ = cos_noncomm(A, B, h, -0.3, 1e-3, m_cap=32)
    assert np.array_equal(plus.entries, minus.entries)
    s_plus = sin_noncomm(A, B, h, 0.3, 1e-3, m_cap=32)
    s_minus = sin_noncomm(A, B, h, -0.3, 1e-3, m_cap=32)
    assert np.allclose(s_minus.entries, -s_plus.entries, atol=1e-15)


def test_three_operator_limit_decays_like_one_over_m(rng):
    ops = [random_hermitian(3, rng, 1.0) for _ in range(3)]
    h = random_unit_vector(3, rng)
    t = 0.2
    oracle = cos_sqrt_sum_oracle(ops, t).entries @ h.entries
    m_values = [8, 16, 32, 64]
    errors = [np.linalg.norm(evaluate_fm(ops, h, m, t, 1e-13).vector.entries - oracle) for m in m_values]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert trotter_rate_fit(m_values, errors).exponent == pytest.approx(1.0, abs=0.1)
