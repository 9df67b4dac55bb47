"""
Property suites run by ``schbf selftest``.

Every suite draws its instances from a fixed seed and returns a
:class:`SuiteResult`; counts default to the acceptance sizes and can be scaled
down for quick runs.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from schbf import hbf
from schbf.channel import ChannelModelConfig, frequency_response, sample_channel, tap_matrices
from schbf.link import QamConstellation, random_frame, receive_block, run_ber_point, transmit_block, apply_channel
from schbf.numerics import (
    complex_gaussian,
    hermitian_eig,
    inverse,
    random_para_unitary,
    random_positive_definite,
    unitary_dft,
)

logger = logging.getLogger(__name__)

Combiner = Callable[..., np.ndarray]


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    failures: int
    seconds: float
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        text = f"[{verdict}] {self.name}: {self.checks - self.failures}/{self.checks} checks in {self.seconds:.2f}s"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass
class RandomInstance:
    tones: np.ndarray
    v_rf: np.ndarray
    w_rf: np.ndarray
    v_u: np.ndarray
    noise_var: float

    @property
    def n_streams(self) -> int:
        return self.v_u.shape[1]

    @property
    def n_rf(self) -> int:
        return self.v_rf.shape[1]


def random_instance(
    rng: np.random.Generator, n_t: int = 16, n_r: int = 16, n_rf: int = 2, n_s: int = 2,
    n_tones: int = 16, noise_var: Optional[float] = None,
) -> RandomInstance:
    """Rich-scattering per-tone channels with random unit-modulus analog parts."""
    tones = complex_gaussian(rng, (n_tones, n_r, n_t))
    return RandomInstance(
        tones=tones,
        v_rf=np.exp(2j * np.pi * rng.uniform(size=(n_t, n_rf))),
        w_rf=np.exp(2j * np.pi * rng.uniform(size=(n_r, n_rf))),
        v_u=random_para_unitary(n_rf, n_s, rng),
        noise_var=float(10 ** rng.uniform(-1, 1)) if noise_var is None else noise_var,
    )


def _relative_gap(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _timed(name: str, body) -> SuiteResult:
    start = time.perf_counter()
    checks, failures, detail = body()
    return SuiteResult(name, failures == 0, checks, failures, time.perf_counter() - start, detail)


def eigenvalue_bound_suite(count: int = 200, seed: int = 1) -> SuiteResult:
    """Ascending eigenvalues of (R^H M R)^{-1} never exceed those of R^H M^{-1} R."""
    def body():
        rng = np.random.default_rng(seed)
        failures = 0
        for _ in range(count):
            m = int(rng.integers(2, 17))
            n = int(rng.integers(1, m))
            mat = random_positive_definite(m, rng)
            r = random_para_unitary(m, n, rng)
            mu = hermitian_eig(inverse(r.conj().T @ mat @ r)).eigenvalues
            lam = hermitian_eig(r.conj().T @ inverse(mat) @ r).eigenvalues
            if np.any(mu > lam + 1e-9 * np.maximum(1.0, np.abs(lam))):
                failures += 1
        return count, failures, ""
    return _timed("compressed-inverse eigenvalue bound", body)


def substitution_suite(count: int = 100, seed: int = 2, combiner: Combiner = hbf.digital_combiners) -> SuiteResult:
    """Sum-MSE with the MMSE combiners equals the reduced closed form."""
    def body():
        rng = np.random.default_rng(seed)
        failures, worst = 0, 0.0
        for _ in range(count):
            n_rf = int(rng.integers(1, 5))
            inst = random_instance(rng, n_t=int(rng.integers(n_rf, 17)), n_r=int(rng.integers(n_rf, 17)),
                                   n_rf=n_rf, n_s=int(rng.integers(1, n_rf + 1)))
            v_d = inst.v_u / np.sqrt(inst.v_rf.shape[0] * inst.n_streams)
            w_d = combiner(inst.w_rf, inst.tones, inst.v_rf, v_d, inst.noise_var)
            solution = hbf.HbfSolution(inst.v_rf, v_d, inst.w_rf, w_d, 1.0, inst.v_u)
            gap = _relative_gap(hbf.sum_mse(solution, inst.tones, inst.noise_var),
                                hbf.reduced_mse(inst.v_rf, inst.w_rf, v_d, inst.tones, inst.noise_var))
            worst = max(worst, gap)
            failures += gap > 1e-10
        return count, failures, f"worst relative gap {worst:.1e}"
    return _timed("substitution identity", body)


def combiner_optimality_suite(count: int = 50, perturbations: int = 100, seed: int = 3) -> SuiteResult:
    """No random perturbation of size 1e-3 improves on the MMSE combiners."""
    def body():
        rng = np.random.default_rng(seed)
        failures = 0
        for _ in range(count):
            inst = random_instance(rng, n_t=8, n_r=8, n_rf=2, n_s=2, n_tones=4)
            v_d = inst.v_u / np.sqrt(8 * 2)
            precoders = np.broadcast_to(inst.v_rf @ v_d, (4, 8, 2))
            w_d = hbf.digital_combiners(inst.w_rf, inst.tones, inst.v_rf, v_d, inst.noise_var)
            best = np.sum(hbf.tone_mse(precoders, inst.w_rf @ w_d, inst.tones, inst.noise_var))
            for _ in range(perturbations):
                delta = complex_gaussian(rng, w_d.shape)
                delta *= 1e-3 / np.linalg.norm(delta)
                trial = np.sum(hbf.tone_mse(precoders, inst.w_rf @ (w_d + delta), inst.tones, inst.noise_var))
                failures += trial < best - 1e-12
        return count * perturbations, failures, ""
    return _timed("combiner local optimality", body)


def ck_identity_suite(count: int = 50, seed: int = 4) -> SuiteResult:
    """With N_RF = N_s and V_D = sqrt(gamma) V_U, the reduced MSE equals the C_k form."""
    def body():
        rng = np.random.default_rng(seed)
        failures, worst = 0, 0.0
        for _ in range(count):
            inst = random_instance(rng, n_rf=2, n_s=2)
            gamma = float(rng.uniform(0.01, 0.1))
            gap = _relative_gap(
                hbf.reduced_mse(inst.v_rf, inst.w_rf, np.sqrt(gamma) * inst.v_u, inst.tones, inst.noise_var),
                hbf.objective_ck(inst.v_rf, inst.w_rf, gamma, inst.tones, inst.noise_var),
            )
            worst = max(worst, gap)
            failures += gap > 1e-10
        return count, failures, f"worst relative gap {worst:.1e}"
    return _timed("C_k objective identity", body)


def evd_dominance_suite(count: int = 20, samples: int = 500, seed: int = 5) -> SuiteResult:
    """The EVD isometry minimizes tr(R^H (sum_k M_k^{-1}) R) over para-unitary R."""
    def body():
        rng = np.random.default_rng(seed)
        failures = 0
        for _ in range(count):
            inst = random_instance(rng, n_rf=2, n_s=2)
            gamma = 1.0 / (16 * 2)
            s = hbf.precoder_bound_matrix(inst.w_rf, inst.tones, gamma, inst.noise_var)
            r = hbf.evd_isometry(s, inst.n_rf)
            best = np.real(np.trace(r.conj().T @ s @ r))
            for _ in range(samples):
                q = random_para_unitary(s.shape[0], inst.n_rf, rng)
                failures += np.real(np.trace(q.conj().T @ s @ q)) < best - 1e-9 * max(1.0, abs(best))
        return count * samples, failures, ""
    return _timed("EVD minimizer dominance", body)


def lower_bound_suite(count: int = 100, seed: int = 6) -> SuiteResult:
    """J_L never exceeds the reduced MSE of any V_D = sqrt(gamma) V_U."""
    def body():
        rng = np.random.default_rng(seed)
        failures = 0
        for _ in range(count):
            n_rf = int(rng.choice([3, 4]))
            inst = random_instance(rng, n_rf=n_rf, n_s=2)
            gamma = float(rng.uniform(0.01, 0.1))
            bound = hbf.lower_bound_jl(inst.v_rf, inst.w_rf, gamma, inst.tones, inst.noise_var, 2)
            value = hbf.reduced_mse(inst.v_rf, inst.w_rf, np.sqrt(gamma) * inst.v_u, inst.tones, inst.noise_var)
            failures += bound > value + 1e-9
        return count, failures, ""
    return _timed("lower bound validity", body)


def cp_equivalence_suite(count: int = 50, seed: int = 7) -> SuiteResult:
    """Noiseless time-domain simulation with CP equals the per-tone model."""
    def body():
        rng = np.random.default_rng(seed)
        failures, worst = 0, 0.0
        constellation = QamConstellation(4)
        model = ChannelModelConfig(n_tx=8, n_rx=8, n_clusters=4, n_rays=3, cp_length=8)
        n = 32
        for _ in range(count):
            taps = tap_matrices(sample_channel(model, rng), 8, 8)
            tones = frequency_response(taps, n).tones
            inst = random_instance(rng, n_t=8, n_r=8, n_rf=2, n_s=2, n_tones=n)
            v_d = inst.v_u / 4.0
            w_d = complex_gaussian(rng, (n, 2, 2))
            frame = random_frame(2, n, constellation, rng)
            rx = apply_channel(transmit_block(frame, inst.v_rf, v_d, 8), taps, 0.0, None, 8)
            _, y_freq = receive_block(rx, inst.w_rf, w_d, 8, n)
            s_freq = unitary_dft(frame.symbols)
            expected = np.stack([
                w_d[k].conj().T @ inst.w_rf.conj().T @ tones[k] @ inst.v_rf @ v_d @ s_freq[:, k] for k in range(n)
            ], axis=1)
            gap = np.linalg.norm(y_freq - expected) / np.linalg.norm(expected)
            worst = max(worst, gap)
            failures += gap > 1e-10
        return count, failures, f"worst relative gap {worst:.1e}"
    return _timed("CP / per-tone equivalence", body)


def empirical_mse_suite(count: int = 10, symbols: int = 100_000, seed: int = 8) -> SuiteResult:
    """Monte Carlo MSE of solved systems lands within 3% of the analytic sum-MSE."""
    def body():
        rng = np.random.default_rng(seed)
        failures, worst = 0, 0.0
        model = ChannelModelConfig(n_tx=16, n_rx=16, cp_length=16)
        n = 64
        n_blocks = -(-symbols // n)
        for i in range(count):
            taps = tap_matrices(sample_channel(model, rng), 16, 16)
            channel_freq = frequency_response(taps, n)
            sys = hbf.SystemConfig(16, 16, 2, 2, n, snr_db=float(rng.uniform(-20, 0)))
            solution, _ = hbf.solve_hbf(channel_freq, sys, hbf.SolverConfig(seed=i))
            analytic = hbf.sum_mse(solution, channel_freq, sys.noise_var)
            result = run_ber_point(solution, taps, sys.noise_var, n_blocks, seed + i, cp_len=16, min_errors=None)
            gap = _relative_gap(result.mse, analytic)
            worst = max(worst, gap)
            failures += gap > 0.03
        return count, failures, f"worst relative gap {worst:.2%}"
    return _timed("analytic vs empirical MSE", body)


def solution_invariants_suite(count: int = 20, seed: int = 9) -> SuiteResult:
    """Unit modulus, para-unitary V_U and unit power on solver outputs."""
    def body():
        rng = np.random.default_rng(seed)
        model = ChannelModelConfig(n_tx=16, n_rx=16, cp_length=16)
        failures = 0
        for i in range(count):
            n_rf = int(rng.choice([2, 3, 4]))
            channel_freq = frequency_response(tap_matrices(sample_channel(model, rng), 16, 16), 32)
            sys = hbf.SystemConfig(16, 16, n_rf, 2, 32, snr_db=-10.0)
            solution, _ = hbf.solve_hbf(channel_freq, sys, hbf.SolverConfig(seed=i))
            ok = (
                np.allclose(np.abs(solution.v_rf), 1.0, atol=1e-12)
                and np.allclose(np.abs(solution.w_rf), 1.0, atol=1e-12)
                and np.allclose(solution.v_u.conj().T @ solution.v_u, np.eye(2), atol=1e-10)
                and abs(solution.transmit_power - 1.0) < 1e-9
            )
            failures += not ok
        return count, failures, ""
    return _timed("solution invariants", body)


SUITES = [
    eigenvalue_bound_suite,
    substitution_suite,
    combiner_optimality_suite,
    ck_identity_suite,
    evd_dominance_suite,
    lower_bound_suite,
    cp_equivalence_suite,
    empirical_mse_suite,
    solution_invariants_suite,
]


def run_selftest(print_fn=print) -> List[SuiteResult]:
    results = []
    for suite in SUITES:
        result = suite()
        logger.info(result.line(), extra={"suite": result.name, "passed": result.passed})
        print_fn(result.line())
        results.append(result)
    return results
