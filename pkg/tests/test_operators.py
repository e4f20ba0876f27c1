# tests/test_operators.py

import math

import numpy as np
import pytest

from propagators.errors import DecompositionError, DimensionMismatchError
from propagators.fixtures import random_diagonal_family, random_hermitian
from propagators.operators import (
    HermitianOperator,
    StateVector,
    analytic_bound,
    commutator_norm,
    cos_sqrt_sum_oracle,
    heat_semigroup,
    sinc_sqrt_sum_oracle,
    spectral_apply,
    sum_of_squares,
    trotter_product,
)


def test_rejects_non_square():
    with pytest.raises(DimensionMismatchError):
        HermitianOperator(np.zeros((2, 3)))


def test_non_hermitian_input_is_symmetrized():
    op = HermitianOperator([[1.0, 2.0], [0.0, 1.0]])
    assert op.symmetrized
    assert np.allclose(op.entries, [[1.0, 1.0], [1.0, 1.0]])


def test_hermitian_input_is_kept(rng):
    op = random_hermitian(5, rng)
    assert not op.symmetrized
    assert op.decomposition.orthogonality_error() < 1e-12
    assert np.allclose(op.decomposition.reconstruct(), op.entries, atol=1e-12)


def test_entries_are_read_only():
    op = HermitianOperator.scalar(2.0)
    with pytest.raises(ValueError):
        op.entries[0, 0] = 3.0


def test_non_finite_entries_fail_decomposition():
    op = HermitianOperator([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(DecompositionError):
        op.decomposition


def test_norm2_matches_largest_eigenvalue_magnitude():
    op = HermitianOperator.diagonal([0.5, -3.0, 2.0])
    assert op.norm2 == pytest.approx(3.0)


def test_cosine_oracle_on_scalars():
    ops = [HermitianOperator.scalar(3.0), HermitianOperator.scalar(4.0)]
    value = cos_sqrt_sum_oracle(ops, 0.2).entries[0, 0].real
    assert value == pytest.approx(math.cos(1.0), abs=1e-14)


def test_sinc_oracle_on_kernel_returns_t():
    ops = [HermitianOperator.zeros(3)]
    assert np.allclose(sinc_sqrt_sum_oracle(ops, 0.7).entries, 0.7 * np.eye(3))


def test_sum_of_squares_rejects_mixed_dimensions():
    with pytest.raises(DimensionMismatchError):
        sum_of_squares([HermitianOperator.zeros(2), HermitianOperator.zeros(3)])


def test_spectral_apply_identity_function(rng):
    op = random_hermitian(4, rng)
    assert np.allclose(spectral_apply(op, lambda lam: lam).entries, op.entries, atol=1e-12)


def test_heat_semigroup_requires_positive_rho(rng):
    with pytest.raises(ValueError):
        heat_semigroup(random_hermitian(3, rng), 0.0)


def test_trotter_product_is_exact_for_commuting_pair(rng):
    A, B = random_diagonal_family(2, 4, rng)
    product = trotter_product(A, B, 0.4, 3)
    direct = spectral_apply(sum_of_squares([A, B]), lambda lam: np.exp(-0.4 * lam))
    assert np.allclose(product, direct.entries, atol=1e-12)


def test_commutator_norm_vanishes_for_diagonal_family(rng):
    A, B = random_diagonal_family(2, 5, rng)
    assert commutator_norm(A, B) == 0.0


def test_analytic_bound_radius_and_scaling(pair):
    A, B, h = pair
    bound = analytic_bound(A, B, h)
    assert bound.C == pytest.approx(1.0)
    assert bound.radius == pytest.approx(1.0 / (math.sqrt(2.0) * bound.K))
    doubled = analytic_bound(A.scaled(2.0), B.scaled(2.0), h)
    assert doubled.K == pytest.approx(2.0 * bound.K)
    assert doubled.radius == pytest.approx(bound.radius / 2.0)


def test_analytic_bound_for_zero_operators_is_unbounded():
    bound = analytic_bound(HermitianOperator.zeros(2), HermitianOperator.zeros(2), StateVector(np.ones(2)))
    assert math.isinf(bound.radius)


def test_matmul_on_state_vector():
    op = HermitianOperator.diagonal([1.0, 2.0])
    out = op @ StateVector(np.array([1.0, 1.0]))
    assert isinstance(out, StateVector)
    assert np.allclose(out.entries, [1.0, 2.0])


def test_heat_semigroup_of_commuting_root_is_the_product(rng):
    A, B = random_diagonal_family(2, 5, rng)
    root = spectral_apply(sum_of_squares([A, B]), np.sqrt)
    product = heat_semigroup(A, 0.7).entries @ heat_semigroup(B, 0.7).entries
    assert np.linalg.norm(heat_semigroup(root, 0.7).entries - product) <= 1e-12


def test_trotter_product_error_halves_when_m_doubles(pair):
    A, B, _ = pair
    rho = 0.5
    exact = spectral_apply(sum_of_squares([A, B]), lambda lam: np.exp(-rho * lam)).entries
    errors = [np.linalg.norm(trotter_product(A, B, rho, m) - exact) for m in (8, 16, 32, 64)]
    for earlier, later in zip(errors, errors[1:]):
        assert earlier / later == pytest.approx(2.0, rel=0.2)
