"""Root solver and closed-form distribution tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from maxmin_auction import (
    ConvergenceError,
    DomainError,
    ModelParams,
    reserve_cdf,
    reserve_cdf_integral,
    reserve_pdf,
    signal_cdf,
    signal_pdf,
    signal_quantile,
    solve_a,
)

import oracles


class TestSolveA:
    def test_frozen_root_mu_05(self, c05):
        assert abs(c05.a - oracles.A_MU_05) < 5e-14
        assert abs(c05.a * (1.0 - math.log(c05.a)) - 0.5) <= 1e-12
        assert abs(c05.lam - oracles.LAM_MU_05) < 1e-13
        assert abs(c05.revenue_guarantee - oracles.GUARANTEE_MU_05) < 1e-13
        assert abs(c05.h_at_a - oracles.H_AT_A_MU_05) < 1e-13

    def test_frozen_root_mu_075(self, c075):
        assert abs(c075.a - oracles.A_MU_075) < 5e-14
        pivot = 1.0 - math.sqrt(1.0 - 2.0 * c075.a)
        assert abs(pivot - oracles.PIVOT_MU_075) < 1e-12
        # headline rounding of the pivot
        assert round(pivot, 3) == 0.515

    def test_guarantee_headline_value(self, c05):
        assert abs(c05.revenue_guarantee - 0.3385) < 5e-4

    @pytest.mark.parametrize("mu", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    def test_guarantee_is_definitional(self, mu):
        c = solve_a(ModelParams(mu=mu))
        assert c.revenue_guarantee == 2.0 * c.a - c.a * c.a
        assert abs(c.a * (1.0 - math.log(c.a)) - mu) <= 1e-12
        assert 0.0 < c.a < 1.0
        assert c.lam > 0.0
        assert 0.0 < c.h_at_a < 1.0

    @pytest.mark.parametrize("mu", [0.0, 1.0, -0.3, 1.5])
    def test_domain_errors(self, mu):
        with pytest.raises(DomainError):
            ModelParams(mu=mu)

    def test_bad_tolerances(self):
        with pytest.raises(DomainError):
            ModelParams(mu=0.5, tol_root=0.0)
        with pytest.raises(DomainError):
            ModelParams(mu=0.5, tol_quad=-1e-9)

    def test_unreachable_tolerance_raises(self):
        # the float-converged residual at mu = 0.3 is ~6e-17, so an absurd
        # tolerance must be reported as a convergence failure
        with pytest.raises(ConvergenceError):
            solve_a(ModelParams(mu=0.3, tol_root=1e-30))


class TestReserveCdf:
    def test_endpoints_and_center(self, c05):
        assert reserve_cdf(c05, 0.0) == 0.0
        assert abs(reserve_cdf(c05, 1.0) - 1.0) < 1e-12
        assert reserve_cdf(c05, c05.a) == pytest.approx(c05.h_at_a, abs=1e-15)
        assert reserve_cdf(c05, 0.5) == pytest.approx(
            oracles.H_AT_HALF_MU_05, abs=1e-12
        )

    def test_continuity_at_removable_point(self, c05):
        base = reserve_cdf(c05, c05.a)
        for eps in (1e-3, 1e-6):
            jump = max(
                abs(reserve_cdf(c05, c05.a + eps) - base),
                abs(reserve_cdf(c05, c05.a - eps) - base),
            )
            # locally Lipschitz: gap bounded by ~H'(a) * eps
            assert jump < 2.0 * eps

    @pytest.mark.parametrize("mu", [0.3, 0.5, 0.75, 0.9])
    def test_strictly_increasing_on_fine_grid(self, mu):
        c = solve_a(ModelParams(mu=mu))
        x = np.linspace(0.0, 1.0, 10_001)
        h = reserve_cdf(c, x)
        assert np.all(np.diff(h) > 0.0)
        assert np.all((h >= 0.0) & (h <= 1.0 + 1e-15))

    def test_vectorised_matches_scalar(self, c05):
        x = np.array([0.0, 0.1, c05.a, 0.7, 1.0])
        vec = reserve_cdf(c05, x)
        assert vec.shape == x.shape
        for xi, vi in zip(x, vec):
            assert reserve_cdf(c05, float(xi)) == vi

    def test_domain_error(self, c05):
        with pytest.raises(DomainError):
            reserve_cdf(c05, -0.1)
        with pytest.raises(DomainError):
            reserve_cdf(c05, 1.1)


class TestReservePdf:
    def test_positive_everywhere(self, c05):
        x = np.linspace(1e-4, 1.0, 5_000)
        assert np.all(reserve_pdf(c05, x) > 0.0)

    def test_removable_value(self, c05):
        assert reserve_pdf(c05, c05.a) == pytest.approx(
            oracles.HPRIME_AT_A_MU_05, abs=1e-12
        )

    def test_x_times_density_vanishes_at_origin(self, c05):
        v4 = 1e-4 * reserve_pdf(c05, 1e-4)
        v6 = 1e-6 * reserve_pdf(c05, 1e-6)
        assert v6 < v4 < 1e-2
        assert v6 < 1e-4

    def test_density_undefined_at_zero(self, c05):
        with pytest.raises(DomainError):
            reserve_pdf(c05, 0.0)

    def test_matches_finite_differences(self, c05):
        eps = 1e-6
        x = np.linspace(0.02, 1.0 - eps, 400)
        x = x[np.abs(x - c05.a) > 0.01]
        fd = (reserve_cdf(c05, x + eps) - reserve_cdf(c05, x - eps)) / (2.0 * eps)
        assert np.max(np.abs(fd - reserve_pdf(c05, x))) < 1e-6


class TestReserveIntegral:
    @pytest.mark.parametrize("x", [1e-4, 0.05, 0.3, 0.5, 0.8, 1.0])
    def test_matches_quadrature_oracle(self, c05, x):
        oracle, err = quad(
            lambda t: reserve_cdf(c05, t), 0.0, x, limit=200, epsabs=1e-12
        )
        assert abs(reserve_cdf_integral(c05, x) - oracle) < 1e-9 + 10 * err

    def test_frozen_values(self, c05):
        assert reserve_cdf_integral(c05, 0.5) == pytest.approx(
            oracles.INT_H_TO_HALF_MU_05, abs=1e-13
        )
        assert reserve_cdf_integral(c05, 1.0) == pytest.approx(
            oracles.INT_H_TO_ONE_MU_05, abs=1e-13
        )

    def test_derivative_recovers_cdf(self, c05):
        eps = 1e-6
        for x in (0.1, c05.a, 0.6, 0.95):
            fd = (
                reserve_cdf_integral(c05, x + eps)
                - reserve_cdf_integral(c05, x - eps)
            ) / (2.0 * eps)
            assert abs(fd - reserve_cdf(c05, x)) < 1e-9


class TestSignal:
    def test_cdf_branches(self, c05):
        a = c05.a
        assert signal_cdf(c05, 0.0) == 0.0
        assert signal_cdf(c05, a / 2.0) == 0.0
        assert signal_cdf(c05, a) == 0.0
        assert signal_cdf(c05, 1.0) == 1.0
        # atom at 1: left limit is 1 - a
        assert signal_cdf(c05, 1.0 - 1e-12) == pytest.approx(1.0 - a, abs=1e-9)
        assert signal_cdf(c05, 0.5) == pytest.approx(1.0 - a / 0.5, abs=1e-15)

    def test_mean_is_mu(self, c05):
        val, err = quad(
            lambda t: 1.0 - signal_cdf(c05, t),
            0.0,
            1.0,
            points=[c05.a],
            limit=200,
        )
        assert abs(val - c05.mu) < 1e-9 + 10 * err

    def test_density(self, c05):
        a = c05.a
        assert signal_pdf(c05, a / 2.0) == 0.0
        assert signal_pdf(c05, 0.5) == pytest.approx(a / 0.25, abs=1e-14)

    def test_nondecreasing_on_fine_grid(self, c05):
        x = np.linspace(0.0, 1.0, 10_001)
        g = signal_cdf(c05, x)
        assert np.all(np.diff(g) >= 0.0)

    def test_quantile_branches(self, c05):
        a = c05.a
        assert signal_quantile(c05, 0.0) == pytest.approx(a, abs=1e-15)
        assert signal_quantile(c05, 1.0 - a) == 1.0
        assert signal_quantile(c05, 1.0) == 1.0
        assert signal_quantile(c05, 0.5) == pytest.approx(
            oracles.SIGNAL_QUANTILE_HALF_MU_05, abs=1e-13
        )

    @settings(max_examples=200, deadline=None)
    @given(u=st.floats(min_value=0.0, max_value=1.0))
    def test_quantile_inverts_cdf(self, c05, u):
        x = signal_quantile(c05, u)
        assert signal_cdf(c05, x) >= u - 1e-12
        if x < 1.0:  # off the atom the inversion is exact
            assert signal_cdf(c05, x) == pytest.approx(u, abs=1e-12)
