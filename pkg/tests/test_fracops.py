"""Fractional primitives against high-precision and brute-force oracles."""

import math

import mpmath
import numpy as np
import pytest

from descsys import (
    ConvergenceError,
    DomainError,
    FracOrder,
    SeriesControl,
    SolvabilityError,
    StructuralError,
    mittag_leffler,
    nabla_fractional_difference,
    nabla_fractional_sum,
    nabla_fractional_sum_sequence,
    rising_factorial,
    rl_difference_sequence,
)

mpmath.mp.dps = 40


def mp_rising(k, alpha):
    return float(mpmath.gamma(k + alpha) / mpmath.gamma(k))


class TestRisingFactorial:
    def test_integer_product(self):
        assert rising_factorial(3, 2) == pytest.approx(12.0, rel=1e-14)

    def test_zero_exponent(self):
        assert rising_factorial(5, 0) == pytest.approx(1.0, rel=1e-14)

    def test_sqrt_pi(self):
        # Gamma(0.5) = sqrt(pi)
        assert rising_factorial(1, -0.5) == pytest.approx(
            math.sqrt(math.pi), rel=1e-14
        )

    def test_against_high_precision_gamma(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            k = float(rng.uniform(1.0, 50.0))
            alpha = float(rng.uniform(-40.0, 50.0))
            if k + alpha <= 0 and abs(k + alpha - round(k + alpha)) < 1e-6:
                continue
            assert rising_factorial(k, alpha) == pytest.approx(
                mp_rising(k, alpha), rel=1e-12
            )

    def test_gamma_recurrence(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            k = float(rng.uniform(1.0, 30.0))
            a = float(rng.uniform(-5.0, 5.0))
            lhs = rising_factorial(k, a + 1.0)
            rhs = rising_factorial(k, a) * (k + a)
            assert lhs == pytest.approx(rhs, rel=1e-11)

    def test_identity_exponent_one(self):
        for k in (1.0, 2.5, 17.0, 49.5):
            assert rising_factorial(k, 1.0) == pytest.approx(k, rel=1e-13)

    def test_pole_raises(self):
        with pytest.raises(DomainError):
            rising_factorial(2.0, -2.0)
        with pytest.raises(DomainError):
            rising_factorial(1.0, -4.0)

    def test_small_k_rejected(self):
        with pytest.raises(DomainError):
            rising_factorial(0.5, 1.0)


class TestFracOrder:
    def test_valid(self):
        assert float(FracOrder(0.5)) == 0.5

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.7])
    def test_invalid(self, bad):
        with pytest.raises(DomainError):
            FracOrder(bad)


class TestSeriesControl:
    def test_defaults(self):
        ctrl = SeriesControl()
        assert ctrl.tol == 1e-12 and ctrl.max_terms == 10000

    def test_validation(self):
        with pytest.raises(DomainError):
            SeriesControl(tol=0.0)
        with pytest.raises(DomainError):
            SeriesControl(max_terms=0)


class TestNablaSum:
    def test_order_one_is_cumulative_sum(self):
        rng = np.random.default_rng(21)
        Y = rng.standard_normal((64, 3))
        for k in (0, 5, 63):
            np.testing.assert_allclose(
                nabla_fractional_sum(Y, 1.0, k),
                Y[: k + 1].sum(axis=0),
                rtol=1e-12,
                atol=1e-12,
            )

    def test_impulse_reproduces_kernel(self):
        Y = np.zeros(12)
        Y[0] = 1.0
        n = 0.4
        for k in range(12):
            expected = mp_rising(k + 1, n - 1) / float(mpmath.gamma(n))
            assert nabla_fractional_sum(Y, n, k) == pytest.approx(expected, rel=1e-12)

    def test_constant_half_order_value(self):
        # (1/Gamma(0.5)) * (2 rising -0.5 + 1 rising -0.5) = 1.5 for Y = 1
        Y = np.ones(4)
        assert nabla_fractional_sum(Y, 0.5, 1) == pytest.approx(1.5, rel=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(22)
        Y1 = rng.standard_normal((20, 2))
        Y2 = rng.standard_normal((20, 2))
        c = 1.7
        for n in (0.3, 0.9, 1.4):
            a = nabla_fractional_sum(Y1 * c + Y2, n, 15)
            b = c * nabla_fractional_sum(Y1, n, 15) + nabla_fractional_sum(Y2, n, 15)
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)

    def test_sequence_matches_pointwise(self):
        rng = np.random.default_rng(23)
        Y = rng.standard_normal((30, 2))
        seq = nabla_fractional_sum_sequence(Y, 0.7)
        for k in (0, 7, 29):
            np.testing.assert_allclose(seq[k], nabla_fractional_sum(Y, 0.7, k))

    def test_base_offset(self):
        Y = np.arange(5.0)
        assert nabla_fractional_sum(Y, 1.0, 6, alpha=3) == pytest.approx(Y[:4].sum())

    def test_errors(self):
        with pytest.raises(DomainError):
            nabla_fractional_sum(np.ones(3), 0.0, 1)
        with pytest.raises(StructuralError):
            nabla_fractional_sum(np.ones(3), 0.5, 5)


class TestNablaDifference:
    def test_constant_half_order(self):
        c = 3.25
        Y = np.full(6, c)
        assert nabla_fractional_difference(Y, 0.5, 1) == pytest.approx(
            0.5 * c, rel=1e-12
        )

    def test_zero_sequence(self):
        Y = np.zeros((8, 2))
        for n in (0.3, 0.8):
            for k in (1, 4, 7):
                np.testing.assert_allclose(
                    nabla_fractional_difference(Y, n, k), 0.0, atol=1e-15
                )

    def test_scaling(self):
        rng = np.random.default_rng(31)
        Y = rng.standard_normal((10, 3))
        c = -2.4
        for n in (0.25, 0.75):
            np.testing.assert_allclose(
                nabla_fractional_difference(c * Y, n, 6),
                c * nabla_fractional_difference(Y, n, 6),
                rtol=1e-10,
            )

    def test_needs_predecessor(self):
        with pytest.raises(DomainError):
            nabla_fractional_difference(np.ones(4), 0.5, 0)

    def test_order_one_is_backward_difference(self):
        rng = np.random.default_rng(32)
        Y = rng.standard_normal(9)
        assert nabla_fractional_difference(Y, 1.0, 4) == pytest.approx(Y[4] - Y[3])

    def test_order_validation(self):
        with pytest.raises(DomainError):
            nabla_fractional_difference(np.ones(4), 1.5, 1)


def gl_weights(nu, count):
    """Series coefficients of (1 - x)**nu via high-precision binomials."""
    return np.array(
        [float((-1) ** t * mpmath.binomial(nu, t)) for t in range(count)]
    )


class TestRlDifferenceSequence:
    def test_order_zero_identity(self):
        rng = np.random.default_rng(41)
        Y = rng.standard_normal((7, 2))
        np.testing.assert_allclose(rl_difference_sequence(Y, 0.0), Y)

    def test_integer_orders_are_iterated_differences(self):
        rng = np.random.default_rng(42)
        Y = rng.standard_normal(10)
        d1 = rl_difference_sequence(Y, 1.0)
        expected = Y.copy()
        expected[1:] = Y[1:] - Y[:-1]
        np.testing.assert_allclose(d1, expected)
        d2 = rl_difference_sequence(Y, 2.0)
        np.testing.assert_allclose(d2, rl_difference_sequence(d1, 1.0))

    @pytest.mark.parametrize("nu", [0.3, 0.5, 1.0, 1.5, 2.4])
    def test_matches_binomial_convolution(self, nu):
        # independent route: direct convolution with (1-x)**nu coefficients
        rng = np.random.default_rng(43)
        Y = rng.standard_normal((16, 2))
        w = gl_weights(nu, 16)
        expected = np.array([w[: k + 1][::-1] @ Y[: k + 1] for k in range(16)])
        np.testing.assert_allclose(
            rl_difference_sequence(Y, nu), expected, rtol=1e-9, atol=1e-11
        )

    def test_composition_semigroup(self):
        rng = np.random.default_rng(44)
        Y = rng.standard_normal((14, 3))
        a, b = 0.4, 0.9
        lhs = rl_difference_sequence(rl_difference_sequence(Y, a), b)
        rhs = rl_difference_sequence(Y, a + b)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-11)

    def test_negative_order_rejected(self):
        with pytest.raises(DomainError):
            rl_difference_sequence(np.ones(3), -0.5)


class TestMittagLeffler:
    def test_zero_matrix(self):
        for n in (0.3, 0.7, 1.0):
            value, terms = mittag_leffler(np.zeros((2, 2)), 5, n)
            np.testing.assert_allclose(
                value, np.eye(2) / math.gamma(n), rtol=1e-13
            )
            assert terms >= 1

    def test_geometric_series_at_order_one(self):
        value, _ = mittag_leffler(np.array([[0.5]]), 0, 1.0)
        assert value[0, 0] == pytest.approx(2.0, rel=1e-10)

    def test_binomial_identity_scalar(self):
        for k in range(11):
            value, _ = mittag_leffler(np.array([[0.5]]), k, 1.0)
            assert value[0, 0] == pytest.approx(0.5 ** -(k + 1), rel=1e-9)

    def test_matrix_identity_at_order_one(self):
        rng = np.random.default_rng(51)
        for _ in range(5):
            A = rng.standard_normal((3, 3))
            A *= 0.85 / max(np.abs(np.linalg.eigvals(A)))
            for k in (0, 7, 20):
                value, _ = mittag_leffler(A, k, 1.0)
                expected = np.linalg.matrix_power(
                    np.linalg.inv(np.eye(3) - A), k + 1
                )
                np.testing.assert_allclose(value, expected, rtol=1e-8)

    def test_spectral_radius_gate(self):
        with pytest.raises(SolvabilityError):
            mittag_leffler(np.array([[1.0]]), 0, 0.5)
        with pytest.raises(SolvabilityError):
            mittag_leffler(np.diag([0.2, 1.3]), 0, 0.5)

    def test_term_budget(self):
        with pytest.raises(ConvergenceError):
            mittag_leffler(
                np.array([[0.9]]), 3, 0.5, SeriesControl(tol=1e-14, max_terms=3)
            )

    def test_truncation_monotonicity(self):
        rng = np.random.default_rng(52)
        for _ in range(5):
            A = rng.standard_normal((2, 2))
            A *= 0.6 / max(np.abs(np.linalg.eigvals(A)))
            loose, _ = mittag_leffler(A, 4, 0.6, SeriesControl(tol=1e-8))
            tight, _ = mittag_leffler(A, 4, 0.6, SeriesControl(tol=1e-9))
            assert np.linalg.norm(loose - tight) <= 1e-8 * max(
                1.0, np.linalg.norm(tight)
            )

    def test_reports_terms(self):
        _, terms = mittag_leffler(np.array([[0.5]]), 2, 0.5)
        assert terms > 2

    def test_empty_matrix(self):
        value, terms = mittag_leffler(np.zeros((0, 0)), 0, 0.5)
        assert value.shape == (0, 0) and terms == 0

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            mittag_leffler(np.array([[0.5]]), -3, 0.5)
        with pytest.raises(DomainError):
            mittag_leffler(np.array([[0.5]]), 0, 1.2)
        with pytest.raises(StructuralError):
            mittag_leffler(np.ones((2, 3)), 0, 0.5)
