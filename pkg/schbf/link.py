"""
Single-carrier block transmission with cyclic prefix and frequency-domain equalization.

Transmit chain: bits -> Gray QAM -> precoding -> CP insertion.
Channel: tap-domain convolution plus complex AWGN.
Receive chain: CP removal -> analog combining -> unitary DFT -> per-tone
digital combining -> unitary IDFT -> hard decisions.

Each simulated block draws payload and noise from its own generator, spawned
from the root seed, so results do not depend on scheduling.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from schbf import config
from schbf.channel import Tap, max_delay
from schbf.exceptions import ConfigurationError, DimensionError, FramingError, UndefinedMetricError
from schbf.numerics import complex_gaussian, unitary_dft, unitary_idft

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence]


def _inverse_gray(g: int) -> int:
    value = 0
    while g:
        value ^= g
        g >>= 1
    return value


@dataclass(frozen=True)
class QamConstellation:
    """Square Gray-mapped QAM with unit average energy.

    A symbol label is the integer formed by its bits (MSB first); the first
    half of the bits picks the in-phase level and the second half the
    quadrature level, each Gray coded. Bit 0 maps to the positive half-axis,
    so for 4QAM the labels 00, 01, 10, 11 map to (1+j), (1-j), (-1+j), (-1-j),
    all divided by sqrt(2).
    """

    order: int = config.DEFAULT_QAM_ORDER
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order not in config.SUPPORTED_QAM_ORDERS:
            raise ConfigurationError(f"QAM order must be one of {config.SUPPORTED_QAM_ORDERS}, got {self.order}")
        side = int(round(np.sqrt(self.order)))
        half = self.bits_per_symbol // 2
        labels = np.arange(self.order)
        i_level = np.array([_inverse_gray(int(g)) for g in labels >> half])
        q_level = np.array([_inverse_gray(int(g)) for g in labels & (side - 1)])
        raw = (side - 1 - 2 * i_level) + 1j * (side - 1 - 2 * q_level)
        scale = np.sqrt(2.0 * (self.order - 1) / 3.0)
        object.__setattr__(self, "points", raw / scale)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))


@dataclass
class BlockFrame:
    """One block: ``symbols`` is N_s x N (column n is s~_n), ``bits`` the payload in stream-major order."""

    symbols: np.ndarray
    bits: np.ndarray


@dataclass
class SimulationResult:
    errors: int = 0
    bits: int = 0
    blocks: int = 0
    symbols: int = 0
    squared_error: float = 0.0
    papr_db: List[float] = field(default_factory=list)
    early_stopped: bool = False

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else float("nan")

    @property
    def mse(self) -> float:
        """Mean of ||y~_n - s~_n||^2 over the simulated time instants."""
        return self.squared_error / self.symbols if self.symbols else float("nan")

    def papr_percentile(self, q: float) -> float:
        return float(np.percentile(self.papr_db, q)) if self.papr_db else float("nan")

    def merge(self, other: "SimulationResult") -> "SimulationResult":
        return SimulationResult(
            errors=self.errors + other.errors,
            bits=self.bits + other.bits,
            blocks=self.blocks + other.blocks,
            symbols=self.symbols + other.symbols,
            squared_error=self.squared_error + other.squared_error,
            papr_db=self.papr_db + other.papr_db,
            early_stopped=self.early_stopped or other.early_stopped,
        )


def qam_modulate(bits, constellation: QamConstellation) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).ravel()
    k = constellation.bits_per_symbol
    if bits.size % k:
        raise FramingError(f"{bits.size} bits do not split into {k}-bit symbols")
    labels = bits.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
    return constellation.points[labels]


def qam_demodulate(symbols, constellation: QamConstellation) -> np.ndarray:
    """Hard minimum-distance decisions; ties go to the lower label."""
    symbols = np.asarray(symbols, dtype=complex).ravel()
    distances = np.abs(symbols[:, np.newaxis] - constellation.points[np.newaxis, :]) ** 2
    labels = np.argmin(distances, axis=1)
    k = constellation.bits_per_symbol
    return ((labels[:, np.newaxis] >> np.arange(k - 1, -1, -1)) & 1).astype(np.int8).ravel()


def random_frame(n_streams: int, n: int, constellation: QamConstellation, rng: np.random.Generator) -> BlockFrame:
    bits = rng.integers(0, 2, size=n_streams * n * constellation.bits_per_symbol, dtype=np.int8)
    symbols = qam_modulate(bits, constellation).reshape(n_streams, n)
    return BlockFrame(symbols=symbols, bits=bits)


def add_cyclic_prefix(x: np.ndarray, cp_len: int) -> np.ndarray:
    n = x.shape[1]
    if cp_len >= n:
        raise ConfigurationError(f"CP length {cp_len} must be shorter than the block ({n})")
    if cp_len == 0:
        return x.copy()
    return np.concatenate([x[:, n - cp_len:], x], axis=1)


def transmit_block(frame: BlockFrame, v_rf: np.ndarray, v_d: np.ndarray, cp_len: int) -> np.ndarray:
    """x~_n = V_RF V_D s~_n with the last ``cp_len`` samples prepended; N_t x (N + L)."""
    return add_cyclic_prefix(np.asarray(v_rf) @ np.asarray(v_d) @ frame.symbols, cp_len)


def transmit_block_per_tone(frame: BlockFrame, precoders: np.ndarray, cp_len: int) -> np.ndarray:
    """Precode s_k with F_k on every tone, return to time domain and add the CP."""
    s_freq = unitary_dft(frame.symbols)
    x_freq = np.einsum("kts,sk->tk", precoders, s_freq)
    return add_cyclic_prefix(unitary_idft(x_freq), cp_len)


def apply_channel(
    tx: np.ndarray, taps: List[Tap], noise_var: float, rng: Optional[np.random.Generator], cp_len: int,
) -> np.ndarray:
    """Linear convolution with the tap matrices plus CN(0, sigma^2) noise per antenna and sample.

    Samples before the block are taken as zero; the CP absorbs that transient.
    """
    if max_delay(taps) > cp_len:
        raise ConfigurationError(f"delay spread {max_delay(taps)} exceeds the cyclic prefix {cp_len}")
    n_samples = tx.shape[1]
    n_rx = taps[0][1].shape[0]
    rx = np.zeros((n_rx, n_samples), dtype=complex)
    for delay, h in taps:
        if delay < n_samples:
            rx[:, delay:] += h @ tx[:, : n_samples - delay]
    if noise_var > 0:
        rx += complex_gaussian(rng, rx.shape, noise_var)
    return rx


def receive_block(
    rx: np.ndarray, w_rf: np.ndarray, w_d: np.ndarray, cp_len: int, n: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Return (y~ in time, y_k per tone), both N_s x N."""
    if rx.shape[1] < cp_len + n:
        raise DimensionError(f"received {rx.shape[1]} samples, need {cp_len + n}")
    if w_d.shape[0] != n:
        raise DimensionError(f"{w_d.shape[0]} digital combiners for {n} tones")
    z = np.conj(w_rf).T @ rx[:, cp_len: cp_len + n]
    z_freq = unitary_dft(z)
    y_freq = np.einsum("krs,rk->sk", np.conj(w_d), z_freq)
    return unitary_idft(y_freq), y_freq


def measure_papr(tx: np.ndarray) -> np.ndarray:
    """10 log10(max |x|^2 / mean |x|^2) for each antenna row, in dB."""
    power = np.abs(np.atleast_2d(tx)) ** 2
    if power.size == 0:
        raise DimensionError("cannot measure PAPR of an empty block")
    mean = power.mean(axis=1)
    if np.any(mean == 0):
        raise UndefinedMetricError("PAPR is undefined for a zero-power antenna stream")
    return 10.0 * np.log10(power.max(axis=1) / mean)


def transmit(frame: BlockFrame, solution, cp_len: int) -> np.ndarray:
    if solution.frequency_flat:
        return add_cyclic_prefix(solution.precoder @ frame.symbols, cp_len)
    return transmit_block_per_tone(frame, solution.precoders, cp_len)


def simulate_block(
    solution, taps: List[Tap], noise_var: float, cp_len: int, n: int,
    constellation: QamConstellation, rng: np.random.Generator,
) -> SimulationResult:
    """One block end to end."""
    n_streams = solution.w_d.shape[-1]
    frame = random_frame(n_streams, n, constellation, rng)
    tx = transmit(frame, solution, cp_len)
    rx = apply_channel(tx, taps, noise_var, rng, cp_len)
    y_time, _ = receive_block(rx, solution.w_rf, solution.w_d, cp_len, n)
    decided = qam_demodulate(y_time.ravel(), constellation)
    # only antennas that radiate contribute a PAPR sample
    active = np.abs(tx).max(axis=1) > 0
    return SimulationResult(
        errors=int(np.count_nonzero(decided != frame.bits)),
        bits=int(frame.bits.size),
        blocks=1,
        symbols=n,
        squared_error=float(np.sum(np.abs(y_time - frame.symbols) ** 2)),
        papr_db=measure_papr(tx[active]).tolist() if np.any(active) else [],
    )


def run_ber_point(
    solution, taps: List[Tap], noise_var: float, n_blocks: int, seed: SeedLike,
    cp_len: int = config.DEFAULT_CP_LENGTH, n: Optional[int] = None,
    constellation: Optional[QamConstellation] = None,
    min_errors: Optional[int] = config.DEFAULT_MIN_ERRORS,
) -> SimulationResult:
    """Monte Carlo over up to ``n_blocks`` blocks, stopping once ``min_errors`` bit errors are seen.

    Block i is seeded by ``seed`` extended with spawn key i, so ``seed`` itself
    is never advanced; ``min_errors=None`` always runs every block.
    """
    n = solution.w_d.shape[0] if n is None else n
    constellation = constellation or QamConstellation()
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    result = SimulationResult()
    for i in range(n_blocks):
        child = np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (i,), pool_size=root.pool_size)
        block = simulate_block(solution, taps, noise_var, cp_len, n, constellation, np.random.default_rng(child))
        result = result.merge(block)
        if min_errors is not None and result.errors >= min_errors:
            result.early_stopped = result.blocks < n_blocks
            break
    logger.debug("simulated %d blocks: %d errors in %d bits", result.blocks, result.errors, result.bits)
    return result
