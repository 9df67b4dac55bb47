"""
EVD-based hybrid beamforming (EVD-HBF) for single-carrier broadband MIMO.

The transmitter applies a frequency-flat digital precoder V_D (N_RF x N_s)
followed by a phase-only analog precoder V_RF (N_t x N_RF). The receiver
applies a phase-only analog combiner W_RF (N_r x N_RF) and a per-tone digital
combiner W_D,k (N_RF x N_s). The design minimizes the streams' sum-MSE

    J = (1/N) sum_k ||I - G_k||_F^2 + sigma^2 ||W_RF W_D,k||_F^2,
    G_k = W_D,k^H W_RF^H H_k V_RF V_D,

under ||V_RF V_D||_F^2 <= 1 and unit-modulus analog entries.

Channel arguments accept a :class:`ChannelFrequencyResponse` or a raw array of
per-tone matrices with shape (N, N_r, N_t). Every sum over tones runs in tone
order, so results are bitwise reproducible.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from schbf import config
from schbf.channel import ChannelFrequencyResponse
from schbf.exceptions import ConfigurationError, DimensionError, SingularMatrixError
from schbf.numerics import hermitian_eig, hermitian_part, inverse

logger = logging.getLogger(__name__)

ChannelLike = Union[ChannelFrequencyResponse, np.ndarray]

STOP_TOLERANCE = "tolerance"
STOP_MAX_ITERS = "max_iters"


def _tones(channel_freq: ChannelLike) -> np.ndarray:
    tones = channel_freq.tones if isinstance(channel_freq, ChannelFrequencyResponse) else np.asarray(channel_freq)
    if tones.ndim == 2:
        tones = tones[np.newaxis]
    if tones.ndim != 3:
        raise DimensionError(f"expected per-tone matrices of shape (N, N_r, N_t), got {tones.shape}")
    return tones.astype(complex, copy=False)


def _h(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def _trace(x: np.ndarray) -> np.ndarray:
    return np.real(np.trace(x, axis1=-2, axis2=-1))


def _require_noise(noise_var: float) -> None:
    if not noise_var > 0:
        raise ConfigurationError(f"noise variance must be positive, got {noise_var}")


@dataclass(frozen=True)
class SystemConfig:
    """Antenna, RF-chain, stream and block sizes plus the operating SNR.

    SNR is 1/sigma^2 under unit total transmit power.
    """

    n_tx: int
    n_rx: int
    n_rf: int
    n_streams: int
    block_length: int = config.DEFAULT_BLOCK_LENGTH
    snr_db: float = 0.0

    def __post_init__(self):
        if not min(self.n_tx, self.n_rx) >= self.n_rf >= self.n_streams >= 1:
            raise ConfigurationError(
                "need min(n_tx, n_rx) >= n_rf >= n_streams >= 1, got "
                f"n_tx={self.n_tx}, n_rx={self.n_rx}, n_rf={self.n_rf}, n_streams={self.n_streams}"
            )
        if self.block_length < 1:
            raise ConfigurationError("block_length must be at least 1")

    @property
    def noise_var(self) -> float:
        return float(10.0 ** (-self.snr_db / 10.0))

    @property
    def equality_case(self) -> bool:
        return self.n_rf == self.n_streams


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = config.DEFAULT_MAX_ITERS
    rel_tol: float = config.DEFAULT_REL_TOL
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be at least 1")
        if not self.rel_tol > 0:
            raise ConfigurationError("rel_tol must be positive")


@dataclass(frozen=True)
class SolverDiagnostics:
    """Trace of the alternating stage and the quality of the returned solution.

    ``objective_trace[i]`` is the analog-stage objective (the C_k form with the
    fixed gamma = 1/(N_t N_s)) after outer iteration i + 1.
    """

    objective_trace: Tuple[float, ...]
    lower_bound: float
    iterations: int
    stop_reason: str
    final_mse: float
    non_monotone_steps: int = 0

    def to_dict(self) -> dict:
        return {
            "objective_trace": list(self.objective_trace),
            "lower_bound": self.lower_bound,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "final_mse": self.final_mse,
            "non_monotone_steps": self.non_monotone_steps,
        }


@dataclass(frozen=True)
class HbfSolution:
    v_rf: np.ndarray
    v_d: np.ndarray
    w_rf: np.ndarray
    w_d: np.ndarray
    gamma: float
    v_u: np.ndarray
    scheme: str = field(default="evd-hbf")

    frequency_flat = True

    @property
    def transmit_power(self) -> float:
        return float(np.linalg.norm(self.v_rf @ self.v_d) ** 2)

    @property
    def precoder(self) -> np.ndarray:
        return self.v_rf @ self.v_d

    def tone_precoders(self, n_tones: int) -> np.ndarray:
        return np.broadcast_to(self.precoder, (n_tones,) + self.precoder.shape)

    def tone_combiners(self) -> np.ndarray:
        return self.w_rf[np.newaxis] @ self.w_d


@dataclass(frozen=True)
class EffectiveChannelWork:
    """Per-tone intermediate matrices of one evaluation.

    ``a`` = (W_RF^H W_RF)^{-1}; ``c[k]`` = W_RF^H H_k V_RF; ``b[k]`` = C_k V_D
    when V_D is known.
    """

    a: np.ndarray
    c: np.ndarray
    b: Optional[np.ndarray] = None

    @classmethod
    def build(cls, w_rf, channel_freq: ChannelLike, v_rf, v_d=None) -> "EffectiveChannelWork":
        tones = _tones(channel_freq)
        w_rf, v_rf = np.asarray(w_rf, dtype=complex), np.asarray(v_rf, dtype=complex)
        if tones.shape[1] != w_rf.shape[0] or tones.shape[2] != v_rf.shape[0]:
            raise DimensionError(
                f"channel {tones.shape[1:]} does not match W_RF {w_rf.shape} and V_RF {v_rf.shape}"
            )
        a = inverse(w_rf.conj().T @ w_rf)
        c = w_rf.conj().T[np.newaxis] @ tones @ v_rf[np.newaxis]
        b = None if v_d is None else c @ np.asarray(v_d, dtype=complex)[np.newaxis]
        return cls(a=a, c=c, b=b)


# Digital beamformers


def digital_combiners(w_rf, channel_freq: ChannelLike, v_rf, v_d, noise_var: float) -> np.ndarray:
    """MMSE digital combiners W_D,k = (B_k B_k^H + sigma^2 A^{-1})^{-1} B_k for every tone."""
    work = EffectiveChannelWork.build(w_rf, channel_freq, v_rf, v_d)
    w_rf = np.asarray(w_rf, dtype=complex)
    gram = w_rf.conj().T @ w_rf  # A^{-1}
    system = work.b @ _h(work.b) + noise_var * gram[np.newaxis]
    return inverse(system) @ work.b


def digital_combiner(w_rf, h_k, v_rf, v_d, noise_var: float) -> np.ndarray:
    """Single-tone form of :func:`digital_combiners`."""
    return digital_combiners(w_rf, np.asarray(h_k)[np.newaxis], v_rf, v_d, noise_var)[0]


def tone_mse(precoders: np.ndarray, combiners: np.ndarray, channel_freq: ChannelLike, noise_var: float) -> np.ndarray:
    """Per-tone ||I - U_k^H H_k F_k||_F^2 + sigma^2 ||U_k||_F^2.

    ``precoders`` (N, N_t, N_s) and ``combiners`` (N, N_r, N_s) are the full
    effective beamformers, i.e. V_RF V_D and W_RF W_D,k for a hybrid design.
    """
    tones = _tones(channel_freq)
    g = _h(combiners) @ tones @ precoders
    eye = np.eye(g.shape[-1])
    err = np.sum(np.abs(eye - g) ** 2, axis=(-2, -1))
    noise = noise_var * np.sum(np.abs(combiners) ** 2, axis=(-2, -1))
    return err + noise


def sum_mse(solution, channel_freq: ChannelLike, noise_var: float) -> float:
    """Sum-MSE J of any solution exposing ``tone_precoders`` / ``tone_combiners``."""
    tones = _tones(channel_freq)
    per_tone = tone_mse(solution.tone_precoders(tones.shape[0]), solution.tone_combiners(), tones, noise_var)
    return float(np.mean(per_tone))


def reduced_mse(v_rf, w_rf, v_d, channel_freq: ChannelLike, noise_var: float) -> float:
    """J after substituting the MMSE combiners: (1/N) tr sum_k (B_k^H A B_k / sigma^2 + I)^{-1}."""
    _require_noise(noise_var)
    work = EffectiveChannelWork.build(w_rf, channel_freq, v_rf, v_d)
    n_s = work.b.shape[-1]
    x = hermitian_part(_h(work.b) @ work.a[np.newaxis] @ work.b) / noise_var + np.eye(n_s)
    return float(np.mean(_trace(inverse(x))))


def objective_ck(v_rf, w_rf, gamma: float, channel_freq: ChannelLike, noise_var: float) -> float:
    """(1/N) tr sum_k (gamma/sigma^2 C_k^H A C_k + I_{N_RF})^{-1}; independent of V_U."""
    _require_noise(noise_var)
    work = EffectiveChannelWork.build(w_rf, channel_freq, v_rf)
    n_rf = work.c.shape[-1]
    x = (gamma / noise_var) * hermitian_part(_h(work.c) @ work.a[np.newaxis] @ work.c) + np.eye(n_rf)
    return float(np.mean(_trace(inverse(x))))


def lower_bound_jl(v_rf, w_rf, gamma: float, channel_freq: ChannelLike, noise_var: float, n_streams: int) -> float:
    """Lower bound of the reduced MSE over all V_D = sqrt(gamma) V_U with V_U para-unitary."""
    n_rf = np.asarray(v_rf).shape[1]
    if n_rf < n_streams:
        raise DimensionError("lower bound needs n_rf >= n_streams")
    return objective_ck(v_rf, w_rf, gamma, channel_freq, noise_var) + n_streams - n_rf


# Analog beamformers


def build_mk_precoder(w_rf, h_k, gamma: float, noise_var: float, n_r: int) -> np.ndarray:
    """M_k = gamma/(N_r sigma^2) H_k^H W_RF W_RF^H H_k + I_{N_t}."""
    return _mk_stack(np.asarray(w_rf, dtype=complex), np.asarray(h_k, dtype=complex)[np.newaxis], gamma, noise_var, n_r)[0]


def _mk_stack(w_rf: np.ndarray, tones: np.ndarray, gamma: float, noise_var: float, n_r: int) -> np.ndarray:
    _require_noise(noise_var)
    projected = w_rf.conj().T[np.newaxis] @ tones  # W_RF^H H_k
    gram = hermitian_part(_h(projected) @ projected)
    return (gamma / (n_r * noise_var)) * gram + np.eye(tones.shape[-1])


def phase_extract(x) -> np.ndarray:
    """Unit-modulus matrix with the phases of ``x``; zero entries map to 1."""
    x = np.asarray(x, dtype=complex)
    magnitude = np.abs(x)
    return np.where(magnitude > 0, x / np.where(magnitude > 0, magnitude, 1.0), 1.0 + 0j)


def evd_isometry(s: np.ndarray, n: int) -> np.ndarray:
    """Eigenvectors of the ``n`` smallest eigenvalues of Hermitian ``s`` (index order on ties)."""
    return hermitian_eig(s).smallest(n)


def precoder_bound_matrix(w_rf, channel_freq: ChannelLike, gamma: float, noise_var: float, n_r: Optional[int] = None) -> np.ndarray:
    """sum_k M_k^{-1}, whose quadratic form upper-bounds the analog objective."""
    tones = _tones(channel_freq)
    n_r = tones.shape[1] if n_r is None else n_r
    inverses = inverse(_mk_stack(np.asarray(w_rf, dtype=complex), tones, gamma, noise_var, n_r))
    total = np.zeros(inverses.shape[1:], dtype=complex)
    for k in range(inverses.shape[0]):
        total += inverses[k]
    return hermitian_part(total)


def analog_precoder_update(
    w_rf, channel_freq: ChannelLike, gamma: float, noise_var: float,
    n_r: Optional[int] = None, n_rf: Optional[int] = None,
) -> np.ndarray:
    """V_RF from the smallest-eigenvalue eigenvectors of sum_k M_k^{-1}, phase extracted.

    ``n_r`` defaults to the receive dimension of the channel and ``n_rf`` to
    the column count of ``w_rf``.
    """
    tones = _tones(channel_freq)
    n_rf = np.asarray(w_rf).shape[1] if n_rf is None else n_rf
    s = precoder_bound_matrix(w_rf, tones, gamma, noise_var, n_r)
    isometry = evd_isometry(s, n_rf)
    return phase_extract(np.sqrt(tones.shape[2]) * isometry)


def analog_combiner_update(v_rf, channel_freq: ChannelLike, gamma: float, noise_var: float) -> np.ndarray:
    """W_RF by the same EVD procedure on the reverse link.

    tr(Z^H Z + I)^{-1} = tr(Z Z^H + I)^{-1}, so the combiner subproblem is the
    precoder subproblem with H_k replaced by H_k^H and the roles of V_RF and
    W_RF swapped (M'_k = gamma/(N_r sigma^2) H_k V_RF V_RF^H H_k^H + I).
    """
    forward = ChannelFrequencyResponse(_tones(channel_freq))
    return analog_precoder_update(v_rf, forward.conj_transpose(), gamma, noise_var, n_r=forward.n_rx)


# Digital precoder


def unitary_bound_matrix(v_rf, w_rf, channel_freq: ChannelLike, gamma: float, noise_var: float) -> np.ndarray:
    """sum_k (gamma/(N_r sigma^2) C_k^H C_k + I_{N_RF})^{-1}"""
    _require_noise(noise_var)
    tones = _tones(channel_freq)
    work = EffectiveChannelWork.build(w_rf, tones, v_rf)
    n_rf = work.c.shape[-1]
    x = (gamma / (tones.shape[1] * noise_var)) * hermitian_part(_h(work.c) @ work.c) + np.eye(n_rf)
    inverses = inverse(x)
    total = np.zeros((n_rf, n_rf), dtype=complex)
    for k in range(inverses.shape[0]):
        total += inverses[k]
    return hermitian_part(total)


def digital_precoder_unitary_update(
    v_rf, w_rf, channel_freq: ChannelLike, gamma: float, noise_var: float, n_streams: int,
) -> np.ndarray:
    """V_U (N_RF x N_s, para-unitary) from the EVD of :func:`unitary_bound_matrix`."""
    n_rf = np.asarray(v_rf).shape[1]
    if n_streams > n_rf:
        raise DimensionError("n_streams cannot exceed n_rf")
    return evd_isometry(unitary_bound_matrix(v_rf, w_rf, channel_freq, gamma, noise_var), n_streams)


def unitary_subproblem_objective(v_u, v_rf, w_rf, channel_freq: ChannelLike, gamma: float, noise_var: float) -> float:
    """sum_k tr(gamma/(N_r sigma^2) V_U^H C_k^H C_k V_U + I_{N_s})^{-1}"""
    _require_noise(noise_var)
    tones = _tones(channel_freq)
    work = EffectiveChannelWork.build(w_rf, tones, v_rf)
    cv = work.c @ np.asarray(v_u, dtype=complex)[np.newaxis]
    x = (gamma / (tones.shape[1] * noise_var)) * hermitian_part(_h(cv) @ cv) + np.eye(cv.shape[-1])
    return float(np.sum(_trace(inverse(x))))


def normalize_digital_precoder(v_rf, v_u) -> Tuple[np.ndarray, float]:
    """gamma = 1 / tr(V_RF V_U V_U^H V_RF^H) and V_D = sqrt(gamma) V_U."""
    v_u = np.asarray(v_u, dtype=complex)
    power = float(np.linalg.norm(np.asarray(v_rf, dtype=complex) @ v_u) ** 2)
    if not power > 0:
        raise SingularMatrixError("analog precoder annihilates the digital precoder (zero power trace)")
    gamma = 1.0 / power
    return np.sqrt(gamma) * v_u, gamma


# Solver


def _random_phases(rng: np.random.Generator, shape) -> np.ndarray:
    return np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=shape))


def solve_hbf(channel_freq: ChannelLike, sys: SystemConfig, solver: SolverConfig = SolverConfig()) -> Tuple[HbfSolution, SolverDiagnostics]:
    """Run EVD-HBF: alternate analog updates, then pick V_U, normalize and equalize.

    gamma is held at 1/(N_t N_s) while the analog beamformers and V_U are
    designed and only becomes the power-normalizing factor at the end.
    """
    tones = _tones(channel_freq)
    if tones.shape[1:] != (sys.n_rx, sys.n_tx):
        raise DimensionError(f"channel is {tones.shape[1:]}, system expects {(sys.n_rx, sys.n_tx)}")
    noise_var = sys.noise_var
    gamma0 = 1.0 / (sys.n_tx * sys.n_streams)

    rng = np.random.default_rng(solver.seed)
    v_rf = _random_phases(rng, (sys.n_tx, sys.n_rf))
    w_rf = _random_phases(rng, (sys.n_rx, sys.n_rf))

    trace = []
    non_monotone = 0
    stop_reason = STOP_MAX_ITERS
    for i in range(1, solver.max_iters + 1):
        v_rf = analog_precoder_update(w_rf, tones, gamma0, noise_var)
        w_rf = analog_combiner_update(v_rf, tones, gamma0, noise_var)
        j = objective_ck(v_rf, w_rf, gamma0, tones, noise_var)
        logger.debug("iteration %d objective %.12g", i, j)
        if trace:
            previous = trace[-1]
            if j > previous * (1 + 1e-12):
                non_monotone += 1
                logger.warning("objective increased at iteration %d: %.6g -> %.6g", i, previous, j)
            trace.append(j)
            if abs(j - previous) / previous < solver.rel_tol:
                stop_reason = STOP_TOLERANCE
                break
        else:
            trace.append(j)

    if sys.equality_case:
        v_u = np.eye(sys.n_rf, dtype=complex)
    else:
        v_u = digital_precoder_unitary_update(v_rf, w_rf, tones, gamma0, noise_var, sys.n_streams)
    v_d, gamma = normalize_digital_precoder(v_rf, v_u)
    w_d = digital_combiners(w_rf, tones, v_rf, v_d, noise_var)

    solution = HbfSolution(v_rf=v_rf, v_d=v_d, w_rf=w_rf, w_d=w_d, gamma=gamma, v_u=v_u)
    diagnostics = SolverDiagnostics(
        objective_trace=tuple(trace),
        lower_bound=lower_bound_jl(v_rf, w_rf, gamma, tones, noise_var, sys.n_streams),
        iterations=len(trace),
        stop_reason=stop_reason,
        final_mse=reduced_mse(v_rf, w_rf, v_d, tones, noise_var),
        non_monotone_steps=non_monotone,
    )
    logger.info(
        "EVD-HBF finished after %d iterations (%s), J=%.6g",
        diagnostics.iterations, stop_reason, diagnostics.final_mse,
        extra={"iterations": diagnostics.iterations, "stop_reason": stop_reason, "final_mse": diagnostics.final_mse},
    )
    return solution, diagnostics
