"""Tests for the property suites behind ``schbf selftest``."""

import numpy as np

from schbf import hbf, selftest


def _combiner_without_noise_term(w_rf, channel_freq, v_rf, v_d, noise_var):
    return hbf.digital_combiners(w_rf, channel_freq, v_rf, v_d, 0.5 * noise_var)


class TestSuites:
    def test_suite_result_line(self):
        result = selftest.SuiteResult("demo", True, 10, 0, 0.5, "worst 1e-12")
        assert result.line() == "[PASS] demo: 10/10 checks in 0.50s (worst 1e-12)"
        failed = selftest.SuiteResult("demo", False, 10, 3, 0.5)
        assert failed.line().startswith("[FAIL] demo: 7/10")

    def test_corrupted_combiner_is_caught(self):
        """A wrong noise term in the combiner breaks the substitution identity."""
        result = selftest.substitution_suite(count=10, combiner=_combiner_without_noise_term)
        assert not result.passed
        assert result.failures == 10

    def test_clean_combiner_passes(self):
        assert selftest.substitution_suite(count=10).passed

    def test_solution_invariants(self):
        result = selftest.solution_invariants_suite(count=2)
        assert result.passed, result.line()

    def test_empirical_mse(self):
        result = selftest.empirical_mse_suite(count=1, symbols=20_000)
        assert result.passed, result.line()

    def test_random_instance_shapes(self):
        inst = selftest.random_instance(np.random.default_rng(0), n_t=6, n_r=5, n_rf=3, n_s=2, n_tones=4)
        assert inst.tones.shape == (4, 5, 6)
        assert (inst.n_rf, inst.n_streams) == (3, 2)
        np.testing.assert_allclose(np.abs(inst.v_rf), 1.0)

    def test_run_selftest_reports_every_suite(self, monkeypatch):
        quick = [lambda: selftest.eigenvalue_bound_suite(count=3), lambda: selftest.lower_bound_suite(count=3)]
        monkeypatch.setattr(selftest, "SUITES", quick)
        lines = []
        results = selftest.run_selftest(print_fn=lines.append)
        assert len(results) == len(lines) == 2
        assert all(line.startswith("[PASS]") for line in lines)
