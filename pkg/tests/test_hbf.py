"""Tests for the EVD-HBF design: objectives, analog updates, V_U and the solver."""

import numpy as np
import pytest

from schbf import hbf
from schbf.exceptions import ConfigurationError, DimensionError, SingularMatrixError
from schbf.numerics import complex_gaussian, random_para_unitary
from schbf.selftest import (
    ck_identity_suite,
    combiner_optimality_suite,
    evd_dominance_suite,
    lower_bound_suite,
    random_instance,
    substitution_suite,
)


def _unit_modulus(rng, shape):
    return np.exp(2j * np.pi * rng.uniform(size=shape))


class TestSystemConfig:
    def test_noise_variance_from_snr(self):
        assert hbf.SystemConfig(4, 4, 2, 2, snr_db=0.0).noise_var == 1.0
        np.testing.assert_allclose(hbf.SystemConfig(4, 4, 2, 2, snr_db=-10.0).noise_var, 10.0)

    @pytest.mark.parametrize("n_rf,n_streams", [(1, 2), (5, 2)])
    def test_rejects_inconsistent_sizes(self, n_rf, n_streams):
        with pytest.raises(ConfigurationError, match="n_rf"):
            hbf.SystemConfig(4, 4, n_rf, n_streams)

    def test_solver_config(self):
        with pytest.raises(ConfigurationError):
            hbf.SolverConfig(max_iters=0)


class TestDigitalCombiner:
    def test_single_tone_matches_stack(self, rng):
        inst = random_instance(rng, n_t=6, n_r=5, n_rf=2, n_s=2, n_tones=4)
        v_d = inst.v_u / np.sqrt(12)
        stacked = hbf.digital_combiners(inst.w_rf, inst.tones, inst.v_rf, v_d, inst.noise_var)
        single = hbf.digital_combiner(inst.w_rf, inst.tones[2], inst.v_rf, v_d, inst.noise_var)
        np.testing.assert_allclose(single, stacked[2], atol=1e-12)

    @pytest.mark.parametrize("noise_var,expected", [(0.0, 1.0), (1.0, 0.5)])
    def test_scalar_case(self, noise_var, expected):
        one = np.ones((1, 1), dtype=complex)
        np.testing.assert_allclose(hbf.digital_combiner(one, one, one, one, noise_var), [[expected]])

    def test_substitution_identity(self):
        """Sum-MSE with MMSE combiners equals the reduced closed form."""
        result = substitution_suite(count=20)
        assert result.passed, result.line()

    def test_local_optimality(self):
        result = combiner_optimality_suite(count=5, perturbations=40)
        assert result.passed, result.line()

    def test_dimension_mismatch(self, rng):
        inst = random_instance(rng, n_t=6, n_r=5)
        with pytest.raises(DimensionError):
            hbf.digital_combiners(inst.w_rf[:4], inst.tones, inst.v_rf, inst.v_u, inst.noise_var)


class TestObjectives:
    def test_ck_identity(self):
        result = ck_identity_suite(count=10)
        assert result.passed, result.line()

    def test_lower_bound(self):
        result = lower_bound_suite(count=20)
        assert result.passed, result.line()

    def test_zero_precoder_gives_stream_count(self, rng):
        inst = random_instance(rng, n_rf=3, n_s=2)
        np.testing.assert_allclose(
            hbf.reduced_mse(inst.v_rf, inst.w_rf, np.zeros((3, 2)), inst.tones, inst.noise_var), 2.0, rtol=1e-12
        )

    def test_zero_beamformers_give_stream_count(self, rng):
        inst = random_instance(rng, n_t=6, n_r=5, n_rf=3, n_s=2, n_tones=4)
        silent = hbf.HbfSolution(
            v_rf=inst.v_rf, v_d=np.zeros((3, 2)), w_rf=inst.w_rf, w_d=np.zeros((4, 3, 2)),
            gamma=1.0, v_u=inst.v_u,
        )
        np.testing.assert_allclose(hbf.sum_mse(silent, inst.tones, inst.noise_var), 2.0, rtol=1e-12)

    def test_larger_gamma_lowers_objective(self, rng):
        inst = random_instance(rng, n_rf=3, n_s=2)
        low = hbf.objective_ck(inst.v_rf, inst.w_rf, 0.02, inst.tones, inst.noise_var)
        high = hbf.objective_ck(inst.v_rf, inst.w_rf, 0.04, inst.tones, inst.noise_var)
        assert high < low

    def test_lower_bound_needs_enough_chains(self, rng):
        inst = random_instance(rng, n_rf=2, n_s=2)
        with pytest.raises(DimensionError):
            hbf.lower_bound_jl(inst.v_rf, inst.w_rf, 0.1, inst.tones, inst.noise_var, 3)

    def test_zero_noise_rejected(self, rng):
        inst = random_instance(rng)
        with pytest.raises(ConfigurationError, match="noise"):
            hbf.reduced_mse(inst.v_rf, inst.w_rf, inst.v_u, inst.tones, 0.0)

    def test_objective_bounded_by_rf_chains(self, rng):
        """Each tone contributes tr of an inverse of (PSD + I), so J lies in (0, N_RF]."""
        inst = random_instance(rng, n_rf=3, n_s=2)
        j = hbf.objective_ck(inst.v_rf, inst.w_rf, 0.05, inst.tones, inst.noise_var)
        assert 0.0 < j <= 3.0


class TestAnalogUpdate:
    def test_phase_extract(self):
        x = np.array([[3 + 4j, 0.0], [-2.0, 1j * 1e-300]])
        out = hbf.phase_extract(x)
        np.testing.assert_allclose(np.abs(out), 1.0)
        np.testing.assert_allclose(out[0, 0], 0.6 + 0.8j)
        assert out[0, 1] == 1.0
        np.testing.assert_allclose(out[1, 0], -1.0)

    def test_phase_extract_negative_zero(self):
        assert hbf.phase_extract(np.array([complex(-0.0, 0.0)]))[0] == 1.0

    def test_evd_isometry_picks_smallest(self):
        s = np.diag([4.0, 0.5, 2.0, 1.0]).astype(complex)
        r = hbf.evd_isometry(s, 2)
        np.testing.assert_allclose(np.real(np.trace(r.conj().T @ s @ r)), 1.5)

    def test_mk_eigenvalues_at_least_one(self, rng):
        inst = random_instance(rng, n_t=10, n_r=6, n_rf=3)
        for k in range(inst.tones.shape[0]):
            m_k = hbf.build_mk_precoder(inst.w_rf, inst.tones[k], 0.05, inst.noise_var, 6)
            assert np.linalg.eigvalsh(m_k).min() >= 1.0 - 1e-9

    def test_isometry_trace_chain_per_tone(self, rng):
        """tr((R^H M_k R)^{-1}) <= tr(R^H M_k^{-1} R) for the isometry before phase extraction."""
        inst = random_instance(rng, n_t=10, n_r=6, n_rf=3)
        gamma = 0.05
        r = hbf.evd_isometry(hbf.precoder_bound_matrix(inst.w_rf, inst.tones, gamma, inst.noise_var), 3)
        for k in range(inst.tones.shape[0]):
            m_k = hbf.build_mk_precoder(inst.w_rf, inst.tones[k], gamma, inst.noise_var, 6)
            compressed = np.real(np.trace(np.linalg.inv(r.conj().T @ m_k @ r)))
            bound = np.real(np.trace(r.conj().T @ np.linalg.inv(m_k) @ r))
            assert compressed <= bound + 1e-9 * max(1.0, bound)

    def test_evd_dominance(self):
        """The isometry beats random para-unitary candidates on the bound."""
        result = evd_dominance_suite(count=3, samples=100)
        assert result.passed, result.line()

    def test_bound_matrix_sums_mk_inverses(self, rng):
        inst = random_instance(rng, n_t=5, n_r=4, n_tones=3)
        gamma = 0.1
        expected = sum(
            np.linalg.inv(hbf.build_mk_precoder(inst.w_rf, inst.tones[k], gamma, inst.noise_var, 4)) for k in range(3)
        )
        np.testing.assert_allclose(
            hbf.precoder_bound_matrix(inst.w_rf, inst.tones, gamma, inst.noise_var), expected, atol=1e-10
        )

    def test_precoder_update_unit_modulus(self, rng):
        inst = random_instance(rng, n_t=10, n_r=6, n_rf=3)
        v_rf = hbf.analog_precoder_update(inst.w_rf, inst.tones, 0.05, inst.noise_var)
        assert v_rf.shape == (10, 3)
        np.testing.assert_allclose(np.abs(v_rf), 1.0, atol=1e-12)

    def test_combiner_is_reverse_link_precoder(self, rng):
        """On a square system the combiner update is the precoder update on H^H."""
        inst = random_instance(rng, n_t=8, n_r=8)
        reverse = np.conj(np.swapaxes(inst.tones, -1, -2))
        np.testing.assert_allclose(
            hbf.analog_combiner_update(inst.v_rf, inst.tones, 0.05, inst.noise_var),
            hbf.analog_precoder_update(inst.v_rf, reverse, 0.05, inst.noise_var, n_r=8),
        )

    def test_combiner_update_shape(self, rng):
        inst = random_instance(rng, n_t=10, n_r=6, n_rf=3)
        w_rf = hbf.analog_combiner_update(inst.v_rf, inst.tones, 0.05, inst.noise_var)
        assert w_rf.shape == (6, 3)
        np.testing.assert_allclose(np.abs(w_rf), 1.0, atol=1e-12)


class TestDigitalPrecoder:
    def test_unitary_update_para_unitary(self, rng):
        inst = random_instance(rng, n_rf=4, n_s=2)
        v_u = hbf.digital_precoder_unitary_update(inst.v_rf, inst.w_rf, inst.tones, 0.03, inst.noise_var, 2)
        np.testing.assert_allclose(v_u.conj().T @ v_u, np.eye(2), atol=1e-10)

    def test_unitary_update_minimizes_bound(self, rng):
        inst = random_instance(rng, n_rf=4, n_s=2)
        t = hbf.unitary_bound_matrix(inst.v_rf, inst.w_rf, inst.tones, 0.03, inst.noise_var)
        v_u = hbf.digital_precoder_unitary_update(inst.v_rf, inst.w_rf, inst.tones, 0.03, inst.noise_var, 2)
        best = np.real(np.trace(v_u.conj().T @ t @ v_u))
        for _ in range(200):
            q = random_para_unitary(4, 2, rng)
            assert best <= np.real(np.trace(q.conj().T @ t @ q)) + 1e-9 * max(1.0, abs(best))

    def test_unitary_update_beats_typical_choice(self, rng):
        inst = random_instance(rng, n_rf=4, n_s=2)
        args = (inst.v_rf, inst.w_rf, inst.tones, 0.03, inst.noise_var)
        v_u = hbf.digital_precoder_unitary_update(*args, 2)
        samples = [hbf.unitary_subproblem_objective(random_para_unitary(4, 2, rng), *args) for _ in range(200)]
        assert hbf.unitary_subproblem_objective(v_u, *args) <= np.median(samples)

    def test_too_many_streams(self, rng):
        inst = random_instance(rng, n_rf=2, n_s=2)
        with pytest.raises(DimensionError):
            hbf.digital_precoder_unitary_update(inst.v_rf, inst.w_rf, inst.tones, 0.03, inst.noise_var, 3)

    def test_gamma_recovered_for_orthogonal_analog(self, rng):
        """With V_RF^H V_RF = N_t I, gamma is exactly 1/(N_t N_s)."""
        n_t = 8
        v_rf = np.exp(-2j * np.pi * np.outer(np.arange(n_t), np.arange(3)) / n_t)
        v_u = random_para_unitary(3, 2, rng)
        v_d, gamma = hbf.normalize_digital_precoder(v_rf, v_u)
        np.testing.assert_allclose(gamma, 1.0 / (n_t * 2), rtol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(v_rf @ v_d) ** 2, 1.0, rtol=1e-12)

    def test_zero_power_rejected(self):
        with pytest.raises(SingularMatrixError, match="zero power"):
            hbf.normalize_digital_precoder(np.zeros((4, 2)), np.eye(2))


class TestSolver:
    def test_invariants(self, small_channel, small_system):
        _, _, response = small_channel
        solution, diagnostics = hbf.solve_hbf(response, small_system, hbf.SolverConfig(seed=3))
        np.testing.assert_allclose(np.abs(solution.v_rf), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.abs(solution.w_rf), 1.0, atol=1e-12)
        np.testing.assert_allclose(solution.transmit_power, 1.0, atol=1e-9)
        np.testing.assert_allclose(solution.v_u, np.eye(2))
        assert solution.w_d.shape == (16, 2, 2)
        assert diagnostics.iterations == len(diagnostics.objective_trace)
        assert diagnostics.stop_reason in (hbf.STOP_TOLERANCE, hbf.STOP_MAX_ITERS)

    def test_equality_case_bound_is_tight(self, small_channel, small_system):
        _, _, response = small_channel
        _, diagnostics = hbf.solve_hbf(response, small_system)
        np.testing.assert_allclose(diagnostics.lower_bound, diagnostics.final_mse, rtol=1e-9)

    def test_final_mse_matches_sum_mse(self, small_channel, small_system):
        _, _, response = small_channel
        solution, diagnostics = hbf.solve_hbf(response, small_system)
        np.testing.assert_allclose(
            hbf.sum_mse(solution, response, small_system.noise_var), diagnostics.final_mse, rtol=1e-9
        )

    def test_general_case(self, small_channel):
        _, _, response = small_channel
        system = hbf.SystemConfig(8, 8, 4, 2, 16, snr_db=-5.0)
        solution, diagnostics = hbf.solve_hbf(response, system)
        assert solution.v_u.shape == (4, 2)
        np.testing.assert_allclose(solution.v_u.conj().T @ solution.v_u, np.eye(2), atol=1e-10)
        np.testing.assert_allclose(solution.transmit_power, 1.0, atol=1e-9)
        assert diagnostics.lower_bound <= diagnostics.final_mse + 1e-9

    def test_deterministic(self, small_channel, small_system):
        _, _, response = small_channel
        first, d1 = hbf.solve_hbf(response, small_system, hbf.SolverConfig(seed=11))
        second, d2 = hbf.solve_hbf(response, small_system, hbf.SolverConfig(seed=11))
        np.testing.assert_array_equal(first.v_rf, second.v_rf)
        np.testing.assert_array_equal(first.w_d, second.w_d)
        assert d1.objective_trace == d2.objective_trace

    def test_single_iteration(self, small_channel, small_system):
        _, _, response = small_channel
        _, diagnostics = hbf.solve_hbf(response, small_system, hbf.SolverConfig(max_iters=1))
        assert diagnostics.iterations == 1
        assert diagnostics.stop_reason == hbf.STOP_MAX_ITERS

    def test_beats_random_analog_beams(self, small_channel, small_system, rng):
        _, _, response = small_channel
        _, diagnostics = hbf.solve_hbf(response, small_system)
        random_mse = []
        for _ in range(30):
            v_rf = _unit_modulus(rng, (8, 2))
            w_rf = _unit_modulus(rng, (8, 2))
            v_d, _ = hbf.normalize_digital_precoder(v_rf, np.eye(2))
            random_mse.append(hbf.reduced_mse(v_rf, w_rf, v_d, response, small_system.noise_var))
        assert diagnostics.final_mse < np.median(random_mse)

    def test_rejects_mismatched_channel(self, rng):
        tones = complex_gaussian(rng, (4, 6, 8))
        with pytest.raises(DimensionError, match="system expects"):
            hbf.solve_hbf(tones, hbf.SystemConfig(8, 8, 2, 2, 4))
