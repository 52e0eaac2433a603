"""Spin-j machinery: generators, coherent vectors, outcome law, limit residuals."""

import numpy as np
import pytest
from scipy.integrate import quad

from qcrb.errors import SingularityError, ValidationError
from qcrb.qubit import SIGMA
from qcrb.spin import (
    angular_density,
    cdf_cos_phi,
    coherent_vec,
    f_closed,
    limit_report,
    moment_matrices,
    rho_jp,
    sample_angles,
    spin_ops,
)


class TestSpinOps:
    def test_spin_half_is_pauli_over_two(self):
        ops = spin_ops(0.5)
        np.testing.assert_allclose(ops.j1, SIGMA[0])
        np.testing.assert_allclose(ops.j2, SIGMA[1])
        np.testing.assert_allclose(ops.j3, SIGMA[2])

    def test_spin_one_weights(self):
        np.testing.assert_allclose(np.diag(spin_ops(1).j3).real, [1.0, 0.0, -1.0])

    @pytest.mark.parametrize("j", [0.5, 1, 2.5, 25])
    def test_commutators(self, j):
        ops = spin_ops(j)
        pairs = [(ops.j1, ops.j2, ops.j3), (ops.j2, ops.j3, ops.j1), (ops.j3, ops.j1, ops.j2)]
        for a, b, c in pairs:
            residual = np.max(np.abs(a @ b - b @ a - 1j * c))
            assert residual < 1e-10

    def test_invalid_spin(self):
        with pytest.raises(ValidationError):
            spin_ops(0.3)


class TestCoherentVec:
    def test_zero_amplitude_is_highest_weight(self):
        vec = coherent_vec(3, 0.0)
        np.testing.assert_allclose(vec, np.eye(7)[0])

    def test_spin_half_real_amplitude(self):
        z = 0.3
        np.testing.assert_allclose(coherent_vec(0.5, z), [np.sqrt(1 - z * z), z])

    @pytest.mark.parametrize("z", [0.2, -0.5 + 0.3j, 0.9j])
    def test_unit_norm(self, z):
        assert np.linalg.norm(coherent_vec(8, z)) == pytest.approx(1.0, abs=1e-10)

    def test_amplitude_bound(self):
        with pytest.raises(ValidationError):
            coherent_vec(2, 1.0)

    def test_approaches_fock_coherent_vector(self):
        # scaled amplitudes converge to the boson coherent coefficients
        z = 0.5 + 0.25j
        gaps = [limit_report(j, 0.5, z_probe=z).coherent_vec_gap for j in (5, 20, 80)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 5e-3


class TestRhoJp:
    def test_pure_limit(self):
        np.testing.assert_allclose(np.diag(rho_jp(2, 0.0)).real, np.eye(5)[0])

    def test_spin_half_matches_bloch_diagonal(self):
        np.testing.assert_allclose(np.diag(rho_jp(0.5, 0.25)).real, [0.8, 0.2])

    @pytest.mark.parametrize("j,p", [(0.5, 0.1), (3, 0.6), (20, 0.9)])
    def test_unit_trace(self, j, p):
        assert np.trace(rho_jp(j, p)).real == pytest.approx(1.0, abs=1e-12)

    def test_invalid_p(self):
        with pytest.raises(ValidationError):
            rho_jp(1, 1.0)

    @pytest.mark.parametrize("j,p", [(5, 0.5), (12, 0.3)])
    def test_trace_distance_to_thermal_state_bound(self, j, p):
        rep = limit_report(j, p)
        assert rep.state_trace_gap <= rep.state_trace_gap_bound + 1e-15


class TestAngularDensity:
    def test_spin_half_pure_shape(self):
        phi = np.linspace(0.1, 3.0, 7)
        expected = 2 * np.cos(phi / 2) ** 2 * np.sin(phi) / (4 * np.pi)
        np.testing.assert_allclose(angular_density(0.5, 0.0, phi), expected, atol=1e-14)

    def test_normalization_by_quadrature(self):
        total, _ = quad(lambda ph: angular_density(10, 0.3, ph) * 2 * np.pi, 0, np.pi)
        assert total == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("j", [0.5, 1, 5, 20])
    @pytest.mark.parametrize("p", [0.0, 0.3, 0.7])
    def test_mean_matches_closed_form(self, j, p):
        mean, _ = quad(
            lambda ph: (1 - np.cos(ph)) * angular_density(j, p, ph) * 2 * np.pi,
            0,
            np.pi,
        )
        assert mean == pytest.approx(f_closed(j, p), abs=1e-8)


class TestFClosed:
    def test_pure_spin_half(self):
        assert f_closed(0.5, 0.0) == pytest.approx(2.0 / 3.0)

    def test_spin_one_half_thermal(self):
        assert f_closed(1, 0.5) == pytest.approx(11.0 / 14.0, rel=1e-12)

    def test_large_j_asymptote(self):
        assert f_closed(100, 0.3) == pytest.approx(1.0 / (0.7 * 101), rel=0.01)


class TestSampleAngles:
    def test_pure_spin_half_mean(self):
        s = sample_angles(0.5, 0.0, 10**6, seed=42)
        vals = 1 - np.cos(s.phi)
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        assert abs(vals.mean() - 2.0 / 3.0) < 4 * se

    def test_deterministic_stream(self):
        s1 = sample_angles(3, 0.4, 1000, seed=7)
        s2 = sample_angles(3, 0.4, 1000, seed=7)
        np.testing.assert_array_equal(s1.phi, s2.phi)
        np.testing.assert_array_equal(s1.psi, s2.psi)

    def test_kolmogorov_smirnov_against_analytic_cdf(self):
        j, p, count = 4, 0.35, 10**5
        s = sample_angles(j, p, count, seed=13)
        x = np.sort(np.cos(s.phi))
        empirical = np.arange(1, count + 1) / count
        ks = np.max(np.abs(cdf_cos_phi(j, p, x) - empirical))
        assert ks < 1.36 / np.sqrt(count)  # 5% critical value

    def test_weights_are_density_values(self):
        s = sample_angles(2, 0.2, 100, seed=1)
        np.testing.assert_allclose(s.weight, angular_density(2, 0.2, s.phi))


class TestLimitReport:
    def test_stated_bounds_hold(self):
        for j in (5, 20, 80):
            for p in (0.3, 0.5, 0.7):
                rep = limit_report(j, p)
                for name, residual, bound in rep.bound_pairs():
                    assert residual <= bound + 1e-12, (j, p, name)

    def test_annihilator_bound_value(self):
        # ((1-p)/2j) p(1+p)/(1-p)^3 at (20, 0.5), up to the tail factor
        rep = limit_report(20, 0.5)
        stated = (0.5 / 40) * (0.5 * 1.5 / 0.125)
        assert rep.annihilator_gap_bound == pytest.approx(stated, rel=1e-10)
        assert rep.annihilator_gap <= stated + 1e-12

    def test_moment_gap_decreases(self):
        gaps = [limit_report(j, 0.5).q_moment_gap for j in (5, 10, 20, 40)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_mixed_moment_exactly_zero(self):
        assert limit_report(10, 0.4).qp_moment_gap == 0.0

    def test_quadrature_sum_identity(self):
        # q-gap + p-gap equals annihilator-gap + creator-gap exactly
        rep = limit_report(12, 0.6)
        lhs = rep.q_quadrature_gap + rep.p_quadrature_gap
        rhs = rep.annihilator_gap + rep.creator_gap
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_p_zero_rejected(self):
        with pytest.raises(ValidationError):
            limit_report(5, 0.0)

    def test_weight_diagnostics_present(self):
        rep = limit_report(10, 0.5, gtilde=np.eye(2))
        assert rep.b_gap is not None and rep.v_gap is not None
        rep2 = limit_report(40, 0.5, gtilde=np.eye(2))
        assert rep2.b_gap < rep.b_gap
        assert rep2.v_gap < rep.v_gap


class TestMomentMatrices:
    def test_response_limit(self):
        b, _ = moment_matrices(200, 0.5, np.eye(2))
        target = 2 * np.eye(2)
        assert np.linalg.norm(b / np.sqrt(200) - target) < 0.05 * np.linalg.norm(target)

    @pytest.mark.parametrize("j", [0.5, 1, 5])
    def test_off_diagonal_exactly_zero(self, j):
        b, _ = moment_matrices(j, 0.4, np.eye(2))
        assert b[0, 1] == 0.0
        assert b[1, 0] == 0.0

    def test_scaled_covariance_limit(self):
        gt = np.diag([4.0, 1.0])
        r = 0.5
        target = (r / 2) * np.eye(2) + (r**2 * np.sqrt(np.linalg.det(gt)) / 2) * np.linalg.inv(gt)
        errors = []
        for j in (25, 100, 400):
            b, v = moment_matrices(j, r, gt)
            binv = np.linalg.inv(b)
            errors.append(np.linalg.norm(j * binv @ v @ binv.T - target))
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 0.01

    def test_origin_rejected(self):
        with pytest.raises(SingularityError):
            moment_matrices(5, 0.0, np.eye(2))
