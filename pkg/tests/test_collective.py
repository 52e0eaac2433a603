"""Collective estimation: total-spin distribution, Fisher quantities, Monte Carlo."""

import numpy as np
import pytest

from conftest import spin_level_joint
from qcrb.bounds import holevo_full_qubit
from qcrb.collective import (
    asymptotic_predictions,
    exact_bures_risk,
    exact_euclidean_risk,
    fisher_decomposition,
    fisher_pnr,
    origin_approx,
    origin_cov_fisher,
    origin_exact,
    origin_fisher_deficit,
    origin_fisher_deficit_approx,
    p_nr,
    predict_general_cov,
    score_pnr,
    simulate_covariant,
    telescoping_pnr,
    theta3_hat,
)
from qcrb.errors import SingularityError, ValidationError


class TestSpinDistribution:
    def test_single_copy(self):
        dist = p_nr(1, 0.3)
        np.testing.assert_allclose(dist.support, [0.5])
        np.testing.assert_allclose(dist.probs, [1.0])

    def test_two_copies_origin(self):
        dist = p_nr(2, 0.0)
        np.testing.assert_allclose(dist.support, [1.0, 0.0])
        np.testing.assert_allclose(dist.probs, [0.75, 0.25], atol=1e-14)

    def test_two_copies_mixed(self):
        dist = p_nr(2, 0.6)
        np.testing.assert_allclose(dist.probs, [0.84, 0.16], atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 7, 100, 2001, 10_000])
    @pytest.mark.parametrize("r", [0.0, 0.3, 0.8])
    def test_normalization(self, n, r):
        dist = p_nr(n, r)
        assert dist.normalization_drift < 1e-12
        assert dist.probs.min() >= 0
        assert abs(dist.probs.sum() - 1.0) < 1e-14  # after renormalization

    @pytest.mark.parametrize("n", [2, 3, 11, 24, 30])
    def test_matches_telescoping_oracle(self, n):
        for r in (0.05, 0.4, 0.9):
            probs = p_nr(n, r).probs
            oracle = telescoping_pnr(n, r)
            np.testing.assert_allclose(probs, oracle / oracle.sum(), rtol=1e-12)

    @pytest.mark.parametrize("n", [50, 200, 1000])
    def test_mean_concentrates(self, n):
        for r in (0.2, 0.5, 0.8):
            dist = p_nr(n, r)
            mean = float(np.sum(dist.probs * 2 * dist.support / n))
            assert abs(mean - r) < 3 / np.sqrt(n)

    def test_draw_deterministic_and_distributed(self):
        dist = p_nr(2, 0.6)
        draws = dist.draw(seed=5, count=200_000)
        np.testing.assert_array_equal(draws, dist.draw(seed=5, count=200_000))
        freq = np.mean(draws == 1.0)
        assert abs(freq - 0.84) < 4 * np.sqrt(0.84 * 0.16 / 200_000)


class TestFisherPnr:
    def test_single_copy_no_information(self):
        assert fisher_pnr(1, 0.5) == 0.0

    def test_origin_no_information(self):
        assert fisher_pnr(50, 0.0) == 0.0

    def test_finite_difference_cross_check(self):
        n, r, h = 50, 0.4, 1e-5
        dist = p_nr(n, r)
        fd = (np.log(p_nr(n, r + h).probs) - np.log(p_nr(n, r - h).probs)) / (2 * h)
        j_fd = float(np.sum(dist.probs * fd**2))
        j_an = fisher_pnr(n, r)
        assert abs(j_an - j_fd) < 1e-6 * j_an

    def test_score_has_zero_mean(self):
        for n, r in ((40, 0.5), (101, 0.25), (64, 0.003)):
            dist = p_nr(n, r)
            mean = float(np.sum(dist.probs * score_pnr(n, r)))
            assert abs(mean) < 1e-9

    def test_inverse_expansion(self):
        n, r = 1000, 0.5
        inv = 1.0 / fisher_pnr(n, r)
        approx = (1 - r * r) / n + (1 - r * r) / (r * r * n * n)
        assert abs(inv - approx) / inv < 0.01


class TestTheta3Hat:
    def test_exact_mean_and_variance(self):
        n, r0 = 40, 0.5
        dist = p_nr(n, r0)
        est = theta3_hat(n, r0, dist.support)
        mean = float(np.sum(dist.probs * est))
        var = float(np.sum(dist.probs * (est - r0) ** 2))
        assert mean == pytest.approx(r0, abs=1e-10)
        assert var == pytest.approx(1.0 / fisher_pnr(n, r0), rel=1e-10)

    def test_locally_unbiased_derivative(self):
        n, r0, h = 40, 0.5, 1e-5
        est = theta3_hat(n, r0, p_nr(n, r0).support)
        ep = float(np.sum(p_nr(n, r0 + h).probs * est))
        em = float(np.sum(p_nr(n, r0 - h).probs * est))
        assert (ep - em) / (2 * h) == pytest.approx(1.0, abs=1e-6)

    def test_degenerate_information_rejected(self):
        with pytest.raises(SingularityError):
            theta3_hat(1, 0.5, 0.5)

    def test_outcome_outside_support_rejected(self):
        with pytest.raises(ValidationError):
            theta3_hat(4, 0.5, 0.75)


class TestExactRisks:
    def test_origin_four_copies_exact_fraction(self):
        assert exact_euclidean_risk(4, 0.0) == pytest.approx(29.0 / 64.0, abs=1e-15)

    def test_euclidean_approaches_collective_bound(self):
        values = [n * exact_euclidean_risk(n, 0.6) for n in (100, 400, 1600, 6400)]
        target = 3.84  # tr G V for the optimal covariance at r = 0.6
        gaps = [abs(v - target) for v in values]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 0.002

    def test_bures_approaches_asymptote(self):
        values = [n * exact_bures_risk(n, 0.6) for n in (100, 400, 1600, 6400)]
        gaps = [abs(v - 1.05) for v in values]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 0.0005


class TestSimulateCovariant:
    def test_euclidean_matches_exact_oracle(self):
        n, r, trials = 50, 0.6, 200_000
        rep = simulate_covariant(n, (0, 0, r), "euclidean", trials, seed=17)
        assert abs(rep.risk_estimate - exact_euclidean_risk(n, r)) < 4 * rep.std_error

    def test_bures_matches_exact_oracle(self):
        n, r, trials = 50, 0.6, 200_000
        rep = simulate_covariant(n, (0, 0, r), "bures", trials, seed=17)
        assert abs(rep.risk_estimate - exact_bures_risk(n, r)) < 4 * rep.std_error

    def test_origin_matches_exact_sum(self):
        rep = simulate_covariant(4, (0, 0, 0.0), "euclidean", 200_000, seed=23)
        assert abs(rep.risk_estimate - 29.0 / 64.0) < 4 * rep.std_error
        assert rep.prediction_source == "origin_second_order"

    def test_full_vector_mode_agrees(self):
        theta = np.array([0.2, -0.3, 0.45])
        r = float(np.linalg.norm(theta))
        rep = simulate_covariant(60, theta, "euclidean", 100_000, seed=5, full_vector=True)
        assert abs(rep.risk_estimate - exact_euclidean_risk(60, r)) < 4 * rep.std_error

    def test_axis_independence(self):
        # rotation invariance: off-axis direction reproduces the on-axis risk
        rep_z = simulate_covariant(30, (0, 0, 0.5), "bures", 100_000, seed=31)
        direction = np.array([2.0, -1.0, 2.0]) / 3.0
        rep_d = simulate_covariant(30, 0.5 * direction, "bures", 100_000, seed=77, full_vector=True)
        sigma = np.hypot(rep_z.std_error, rep_d.std_error)
        assert abs(rep_z.risk_estimate - rep_d.risk_estimate) < 4 * sigma

    def test_deterministic(self):
        r1 = simulate_covariant(20, (0, 0, 0.4), "euclidean", 5000, seed=2)
        r2 = simulate_covariant(20, (0, 0, 0.4), "euclidean", 5000, seed=2)
        assert r1 == r2

    def test_invalid_risk_kind(self):
        with pytest.raises(ValidationError):
            simulate_covariant(10, (0, 0, 0.5), "hellinger", 10, seed=0)


class TestPredictGeneralCov:
    def test_smallest_copy_count_is_psd(self):
        pred = predict_general_cov(2, 0.5, np.eye(2))
        assert np.linalg.eigvalsh(pred).min() >= 0

    def test_isotropic_limit(self):
        pred = 400 * predict_general_cov(400, 0.5, np.eye(2))
        target = np.diag([1.5, 1.5, 0.75])
        assert np.max(np.abs(pred - target)) < 0.05 * np.max(target)

    def test_trace_approaches_holevo_bound(self):
        n, r = 400, 0.5
        gt = np.diag([4.0, 1.0])
        pred = predict_general_cov(n, r, gt)
        g = np.zeros((3, 3))
        g[:2, :2] = gt
        g[2, 2] = 2.0
        value, _, _ = holevo_full_qubit(r, g)
        assert abs(n * np.trace(g @ pred) - value) / value < 0.05

    def test_origin_rejected(self):
        with pytest.raises(SingularityError):
            predict_general_cov(100, 0.0, np.eye(2))


class TestAsymptotics:
    def test_origin_exact_small_case(self):
        pred = asymptotic_predictions(4, 0.0)
        assert pred.origin_exact == pytest.approx(29.0 / 64.0, abs=1e-15)
        assert pred.radial_mse_exact is None

    def test_origin_expansion_accuracy(self):
        pred = asymptotic_predictions(1000, 0.0)
        assert abs(pred.origin_exact - pred.origin_approx) / pred.origin_exact < 0.02

    def test_radial_expansion_accuracy(self):
        pred = asymptotic_predictions(400, 0.5)
        assert abs(pred.radial_mse_exact - pred.radial_mse_approx) / pred.radial_mse_exact < 0.02
        assert abs(pred.jnr_inv_exact - pred.jnr_inv_approx) / pred.jnr_inv_exact < 0.01


class TestOriginFisher:
    def test_two_copies(self):
        assert origin_cov_fisher(2) == pytest.approx(1.0, abs=1e-12)

    def test_four_copies(self):
        assert origin_cov_fisher(4) == pytest.approx(29.0 / 12.0, rel=1e-12)

    def test_deficit_expansion(self):
        n = 10_000
        exact = origin_fisher_deficit(n)
        approx = origin_fisher_deficit_approx(n)
        assert abs(exact - approx) / exact < 0.02

    def test_information_rate_approaches_one(self):
        rates = [origin_cov_fisher(n) / n for n in (100, 1000, 10_000)]
        assert all(b > a for a, b in zip(rates, rates[1:]))
        assert rates[-1] > 0.98


class TestFisherDecomposition:
    def test_product_family_marginal_carries_nothing(self):
        # theta enters only the second coordinate
        base = np.array([0.3, 0.7])

        def joint(theta):
            cond = np.array([0.5 + theta, 0.5 - theta])
            return np.outer(base, cond)

        dec = fisher_decomposition(joint, 0.1)
        assert dec.j_marginal == pytest.approx(0.0, abs=1e-8)
        assert dec.j_total == pytest.approx(dec.loss_by_omega1.sum(), rel=1e-8)

    def test_deterministic_second_outcome_no_loss(self):
        # omega2 is a function of omega1; conditionals are theta-free
        def joint(theta):
            marg = np.array([0.2 + theta, 0.8 - theta])
            return [np.array([row]) for row in marg]

        dec = fisher_decomposition(joint, 0.05)
        assert dec.loss_by_omega1.sum() == pytest.approx(0.0, abs=1e-10)
        assert dec.j_total == pytest.approx(dec.j_marginal, rel=1e-8)

    def test_spin_level_family_identity(self):
        n, theta = 20, 0.5
        dec = fisher_decomposition(spin_level_joint(n), theta)
        target = n / (1 - theta * theta)
        assert abs(dec.j_total - target) / target < 1e-6
        assert abs(dec.j_total - dec.j_marginal - dec.loss_by_omega1.sum()) < 1e-8 * dec.j_total
        assert dec.j_marginal == pytest.approx(fisher_pnr(n, theta), rel=1e-6)
        assert np.all(dec.loss_by_omega1 >= 0)

    def test_zero_probability_rejected(self):
        def joint(theta):
            return np.array([[0.5, 0.0], [0.25, 0.25]]) + 0 * theta

        with pytest.raises(ValidationError):
            fisher_decomposition(joint, 0.0)


class TestPredictionFormulas:
    def test_origin_expansion_values(self):
        n = 1000
        expected = 3.0 / n - 4 * np.sqrt(2) / (np.sqrt(np.pi) * n**1.5) + 2.0 / n**2
        assert origin_approx(n) == pytest.approx(expected, rel=1e-12)
        assert origin_exact(4) == pytest.approx(29.0 / 64.0)
