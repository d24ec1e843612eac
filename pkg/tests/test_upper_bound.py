"""Quantile-grid LP cap and envelope payments."""

import numpy as np
import pytest

from maxmin_auction import (
    DomainError,
    ModelParams,
    MonotonicityError,
    analytic_bound,
    bic_bir_violations,
    discretize_truthful_mechanism,
    envelope_payments,
    lp_max_revenue,
    signal_quantile,
    solve_a,
    truthful_interim_allocation,
)

import oracles


class TestAnalyticBound:
    @pytest.mark.parametrize("mu", [0.1, 0.3, 0.5, 0.75, 0.9])
    def test_bitwise_equal_to_guarantee(self, mu):
        c = solve_a(ModelParams(mu=mu))
        assert analytic_bound(c) == c.revenue_guarantee

    def test_frozen_values(self, c05, c075):
        assert analytic_bound(c05) == pytest.approx(oracles.GUARANTEE_MU_05, abs=1e-13)
        assert analytic_bound(c075) == pytest.approx(
            oracles.GUARANTEE_MU_075, abs=1e-13
        )
        assert analytic_bound(c05) == pytest.approx(0.3385, abs=5e-4)


class TestLp:
    def test_optimum_near_bound(self, c05):
        opt, mech = lp_max_revenue(c05, 25)
        bound = analytic_bound(c05)
        assert bound - 0.03 <= opt <= bound + 0.03
        # the certificate is itself feasible
        viol = bic_bir_violations(mech)
        assert viol["max_bic_gain"] <= 1e-6
        assert viol["max_bir_violation"] <= 1e-6
        assert viol["max_feasibility_excess"] <= 1e-6

    def test_beats_every_feasible_mechanism(self, c05):
        opt, _ = lp_max_revenue(c05, 25)
        truthful = discretize_truthful_mechanism(c05, 25)
        assert opt >= truthful.expected_revenue() - 1e-7
        # and stays within O(1/n) of it (the saddle attains the cap)
        assert opt - truthful.expected_revenue() <= 2.0 / 25

    def test_fewer_constraints_weakly_raise_optimum(self, c05):
        all_pairs, _ = lp_max_revenue(c05, 20)
        adjacent, _ = lp_max_revenue(c05, 20, bic="adjacent")
        assert adjacent >= all_pairs - 1e-7

    def test_zero_mechanism_feasible_baseline(self, c05):
        mech = discretize_truthful_mechanism(c05, 15)
        zero = type(mech)(
            z=mech.z,
            types=mech.types,
            q1=np.zeros_like(mech.q1),
            q2=np.zeros_like(mech.q2),
            t1=np.zeros_like(mech.t1),
            t2=np.zeros_like(mech.t2),
        )
        viol = bic_bir_violations(zero)
        assert viol["max_bic_gain"] <= 0.0
        assert viol["max_bir_violation"] <= 0.0
        assert zero.expected_revenue() == 0.0
        opt, _ = lp_max_revenue(c05, 15)
        assert opt >= 0.0

    def test_grid_floor(self, c05):
        with pytest.raises(DomainError):
            lp_max_revenue(c05, 5)

    def test_unknown_bic_set(self, c05):
        with pytest.raises(DomainError):
            lp_max_revenue(c05, 20, bic="upward")

    def test_mechanism_json_dict(self, c05):
        _, mech = lp_max_revenue(c05, 12)
        d = mech.to_json_dict()
        assert set(d) == {"z", "types", "q1", "q2", "t1", "t2"}
        assert len(d["q1"]) == 12 and len(d["q1"][0]) == 12


class TestTruthfulDiscretization:
    def test_exactly_feasible(self, c05):
        mech = discretize_truthful_mechanism(c05, 40)
        viol = bic_bir_violations(mech)
        # truthful play is ex-post optimal, so grid feasibility is exact
        assert viol["max_bic_gain"] <= 1e-8
        assert viol["max_bir_violation"] <= 1e-8
        assert viol["max_feasibility_excess"] <= 1e-12

    def test_revenue_converges_to_guarantee(self, c05):
        revs = [
            discretize_truthful_mechanism(c05, n).expected_revenue()
            for n in (25, 50, 100)
        ]
        errs = [abs(r - c05.revenue_guarantee) for r in revs]
        assert errs[2] < errs[0]
        assert errs[2] < 1e-3

    def test_interim_allocation_closed_form(self, c05):
        mech = discretize_truthful_mechanism(c05, 200)
        Q1, _, _, _ = mech.interim()
        target = truthful_interim_allocation(c05, mech.z)
        # interim over the opponent grid vs the continuum closed form
        assert np.max(np.abs(Q1 - target)) < 5e-3


class TestEnvelopePayments:
    def test_zero_allocation_pays_nothing(self, c05):
        T = envelope_payments(np.zeros(100), c05)
        assert np.allclose(T, 0.0)

    def test_full_allocation_is_flat_posted_price(self, c05):
        # constant winning probability cancels the surplus growth exactly:
        # every type pays the lowest type value
        T = envelope_payments(np.ones(100), c05)
        assert np.max(np.abs(T - c05.a)) < 1e-12
        assert T.mean() == pytest.approx(c05.a, abs=1e-12)

    def test_truthful_allocation_recovers_guarantee(self, c05):
        n = 500
        z = (np.arange(n) + 0.5) / n
        Q = truthful_interim_allocation(c05, z)
        T = envelope_payments(Q, c05)
        assert 2.0 * T.mean() == pytest.approx(c05.revenue_guarantee, abs=1e-3)

    def test_payments_are_discretely_incentive_compatible(self, c05):
        n = 100
        z = (np.arange(n) + 0.5) / n
        s = signal_quantile(c05, z)
        rng = np.random.default_rng(11)
        Q = np.sort(rng.random(n))
        T = envelope_payments(Q, c05)
        truthful = s * Q - T
        deviation = s[:, None] * Q[None, :] - T[None, :]
        gain = deviation - truthful[:, None]
        np.fill_diagonal(gain, -np.inf)
        assert gain.max() <= 1e-12
        assert truthful.min() >= -1e-12

    def test_rejects_decreasing_allocation(self, c05):
        with pytest.raises(MonotonicityError):
            envelope_payments(np.array([0.5, 0.4, 0.6]), c05)
