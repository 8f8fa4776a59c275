"""Tests for the dense numerical primitives.

Oracles used here, written before the implementation was exercised:
  * normal-equations solve ``(A' W A)^-1 A' W y`` for weighted least
    squares (dense, brute force),
  * hand-computed weighted means,
  * analytic gradients of polynomial test functions,
  * a Richardson-extrapolated central difference for the empirical
    profile-map gradient.
"""

import numpy as np
import pytest

from mommix import numkit
from mommix.errors import (
    DegenerateWeights,
    DimensionMismatch,
    NonFiniteEvaluation,
    RankDeficient,
)


def normal_equations_wls(a, y, w):
    """Brute-force oracle: solve the weighted normal equations directly."""
    aw = a * w[:, None]
    return np.linalg.solve(aw.T @ a, aw.T @ y)


def richardson_gradient(f, at, h0):
    """Higher-order FD oracle: one Richardson step on central differences."""
    at = np.asarray(at, dtype=float)
    grad = np.empty_like(at)
    for j in range(at.size):
        def central(h):
            xp = at.copy()
            xm = at.copy()
            xp[j] += h
            xm[j] -= h
            return (f(xp) - f(xm)) / (2.0 * h)

        grad[j] = (4.0 * central(h0 / 2.0) - central(h0)) / 3.0
    return grad


class TestWeightedMean:
    def test_uniform_weights_is_plain_mean(self):
        assert numkit.weighted_mean([1.0, 2.0, 3.0], [1.0, 1.0, 1.0]) == 2.0

    def test_point_mass(self):
        assert numkit.weighted_mean([1.0, 2.0, 3.0], [0.0, 0.0, 5.0]) == 3.0

    def test_hand_computed(self):
        # (1*1 + 2*3) / 4 = 1.75
        assert numkit.weighted_mean([1.0, 2.0], [1.0, 3.0]) == 1.75

    def test_invariant_to_weight_rescaling(self):
        rng = np.random.default_rng(7)
        v = rng.normal(size=40)
        w = rng.uniform(0.1, 2.0, size=40)
        base = numkit.weighted_mean(v, w)
        for c in (1e-6, 3.0, 1e8):
            assert numkit.weighted_mean(v, c * w) == pytest.approx(base, rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            numkit.weighted_mean([1.0, 2.0], [1.0])

    def test_degenerate_weights(self):
        with pytest.raises(DegenerateWeights):
            numkit.weighted_mean([1.0, 2.0], [0.0, 0.0])
        with pytest.raises(DegenerateWeights):
            numkit.weighted_mean([1.0, 2.0], [1.0, -0.5])
        with pytest.raises(DegenerateWeights):
            numkit.weighted_mean([1.0, 2.0], [1.0, np.nan])


class TestWeightedLeastSquares:
    def test_exact_linear_data(self):
        design = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]])
        fit = numkit.weighted_least_squares(design, [1.0, 2.0, 3.0], [1.0, 1.0, 1.0])
        np.testing.assert_allclose(fit.coefficients, [1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(fit.residuals, 0.0, atol=1e-12)

    def test_zero_weight_row_is_ignored(self):
        design = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]])
        fit = numkit.weighted_least_squares(design, [0.0, 0.0, 1.0], [1.0, 1.0, 0.0])
        np.testing.assert_allclose(fit.coefficients, [0.0, 0.0], atol=1e-12)

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(123)
        a = rng.normal(size=(50, 3))
        y = rng.normal(size=50)
        w = rng.uniform(0.2, 3.0, size=50)
        fit = numkit.weighted_least_squares(a, y, w)
        oracle = normal_equations_wls(a, y, w)
        np.testing.assert_allclose(fit.coefficients, oracle, rtol=1e-8)

    def test_all_ones_weights_equals_ols(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(30, 4))
        y = rng.normal(size=30)
        fit = numkit.weighted_least_squares(a, y, np.ones(30))
        oracle = np.linalg.solve(a.T @ a, a.T @ y)
        np.testing.assert_allclose(fit.coefficients, oracle, rtol=1e-8)

    def test_weight_scaling_leaves_coefficients(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(25, 2))
        y = rng.normal(size=25)
        w = rng.uniform(0.5, 1.5, size=25)
        base = numkit.weighted_least_squares(a, y, w).coefficients
        scaled = numkit.weighted_least_squares(a, y, 37.0 * w).coefficients
        np.testing.assert_allclose(scaled, base, atol=1e-10)

    def test_fitted_plus_residuals_is_response(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(20, 3))
        y = rng.normal(size=20)
        w = rng.uniform(0.1, 1.0, size=20)
        fit = numkit.weighted_least_squares(a, y, w)
        np.testing.assert_allclose(fit.fitted + fit.residuals, y, rtol=1e-12, atol=1e-12)

    def test_rank_deficient_duplicate_column(self):
        rng = np.random.default_rng(3)
        col = rng.normal(size=20)
        a = np.column_stack([np.ones(20), col, col])
        with pytest.raises(RankDeficient):
            numkit.weighted_least_squares(a, rng.normal(size=20), np.ones(20))

    def test_rank_deficient_zero_design(self):
        with pytest.raises(RankDeficient):
            numkit.weighted_least_squares(np.zeros((5, 2)), np.ones(5), np.ones(5))

    def test_dimension_mismatches(self):
        a = np.ones((4, 2))
        with pytest.raises(DimensionMismatch):
            numkit.weighted_least_squares(a, np.ones(3), np.ones(4))
        with pytest.raises(DimensionMismatch):
            numkit.weighted_least_squares(a, np.ones(4), np.ones(5))
        with pytest.raises(DimensionMismatch):
            numkit.weighted_least_squares(np.ones(4), np.ones(4), np.ones(4))

    def test_degenerate_weights(self):
        a = np.column_stack([np.ones(4), np.arange(4.0)])
        with pytest.raises(DegenerateWeights):
            numkit.weighted_least_squares(a, np.ones(4), np.zeros(4))


class TestFiniteDiff:
    def test_square(self):
        grad = numkit.finite_diff_gradient(lambda x: x[0] ** 2, [3.0])
        np.testing.assert_allclose(grad, [6.0], atol=1e-6)

    def test_product(self):
        grad = numkit.finite_diff_gradient(lambda x: x[0] * x[1], [2.0, 5.0])
        np.testing.assert_allclose(grad, [5.0, 2.0], atol=1e-6)

    def test_quadratic_form_matches_analytic(self):
        rng = np.random.default_rng(17)
        q = rng.normal(size=(4, 4))
        q = q + q.T
        at = rng.normal(size=4)
        grad = numkit.finite_diff_gradient(lambda x: 0.5 * x @ q @ x, at)
        np.testing.assert_allclose(grad, q @ at, atol=1e-6)

    def test_profile_gradient_against_richardson_oracle(self):
        # empirical lambda3 profile on a simulated mixture dataset
        from mommix.moments import lambda23_profile
        from mommix.simulation import ScenarioSpec, generate

        data = generate(ScenarioSpec(kind="gaussian_mixture", n=500, p=0.5, seed=99))

        def lam3(l1):
            return lambda23_profile(data.x, data.y, np.ascontiguousarray(l1))[1]

        at = np.array([0.47])
        grad = numkit.finite_diff_gradient(lam3, at)
        oracle = richardson_gradient(lam3, at, h0=1e-4)
        np.testing.assert_allclose(grad, oracle, rtol=1e-4)

    def test_jacobian_rows_match_gradients(self):
        def f(x):
            return np.array([x[0] * x[1], x[0] ** 2 + 3.0 * x[1]])

        at = np.array([1.5, -2.0])
        jac = numkit.finite_diff_jacobian(f, at)
        g0 = numkit.finite_diff_gradient(lambda x: f(x)[0], at)
        g1 = numkit.finite_diff_gradient(lambda x: f(x)[1], at)
        np.testing.assert_allclose(jac[0], g0, rtol=1e-12)
        np.testing.assert_allclose(jac[1], g1, rtol=1e-12)

    def test_nonfinite_evaluation(self):
        with pytest.raises(NonFiniteEvaluation):
            numkit.finite_diff_gradient(lambda x: float("nan"), [1.0])
        with pytest.raises(NonFiniteEvaluation):
            numkit.finite_diff_jacobian(lambda x: np.array([1.0, np.inf]), [1.0])
