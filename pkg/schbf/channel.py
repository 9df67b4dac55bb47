"""
Geometry-based cluster-ray mmWave MIMO channel.

A realization has N_C clusters of N_R rays. Every ray carries a complex gain
and a (departure, arrival) angle pair for uniform linear arrays with
half-wavelength spacing; every cluster has an integer tap delay shorter than
the cyclic prefix, so the block model with CP is exactly circular.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from schbf import config
from schbf.exceptions import ConfigurationError, DimensionError
from schbf.numerics import complex_gaussian

logger = logging.getLogger(__name__)

Tap = Tuple[int, np.ndarray]


@dataclass(frozen=True)
class ChannelModelConfig:
    n_tx: int = config.DEFAULT_N_TX
    n_rx: int = config.DEFAULT_N_RX
    n_clusters: int = config.DEFAULT_N_CLUSTERS
    n_rays: int = config.DEFAULT_N_RAYS
    angle_spread: float = np.deg2rad(config.DEFAULT_ANGLE_SPREAD_DEG)
    cp_length: int = config.DEFAULT_CP_LENGTH

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ConfigurationError("n_clusters and n_rays must be at least 1")
        if self.n_tx < 1 or self.n_rx < 1:
            raise ConfigurationError("antenna counts must be at least 1")
        if self.cp_length < 1:
            raise ConfigurationError("cp_length must be at least 1")
        if not self.angle_spread > 0:
            raise ConfigurationError("angle_spread must be positive")


@dataclass(frozen=True)
class ClusterRayChannel:
    """One channel realization.

    ``gains``, ``tx_angles`` and ``rx_angles`` have shape (n_clusters, n_rays);
    ``delays`` has one integer sample delay per cluster.
    """

    gains: np.ndarray
    tx_angles: np.ndarray
    rx_angles: np.ndarray
    delays: np.ndarray

    @property
    def n_clusters(self) -> int:
        return self.gains.shape[0]

    @property
    def n_rays(self) -> int:
        return self.gains.shape[1]

    def to_dict(self) -> dict:
        return {
            "gains_real": self.gains.real.tolist(),
            "gains_imag": self.gains.imag.tolist(),
            "tx_angles": self.tx_angles.tolist(),
            "rx_angles": self.rx_angles.tolist(),
            "delays": [int(d) for d in self.delays],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClusterRayChannel":
        gains = np.asarray(data["gains_real"], dtype=float) + 1j * np.asarray(data["gains_imag"], dtype=float)
        return cls(
            gains=np.atleast_2d(gains),
            tx_angles=np.atleast_2d(np.asarray(data["tx_angles"], dtype=float)),
            rx_angles=np.atleast_2d(np.asarray(data["rx_angles"], dtype=float)),
            delays=np.asarray(data["delays"], dtype=int),
        )


@dataclass(frozen=True)
class ChannelFrequencyResponse:
    """Per-tone channel matrices, ``tones`` has shape (N, n_rx, n_tx)."""

    tones: np.ndarray

    @property
    def n_tones(self) -> int:
        return self.tones.shape[0]

    @property
    def n_rx(self) -> int:
        return self.tones.shape[1]

    @property
    def n_tx(self) -> int:
        return self.tones.shape[2]

    def __getitem__(self, k: int) -> np.ndarray:
        return self.tones[k]

    def conj_transpose(self) -> "ChannelFrequencyResponse":
        """The reverse-link response H_k^H at every tone."""
        return ChannelFrequencyResponse(np.conj(np.swapaxes(self.tones, -1, -2)))

    def mean_energy(self) -> float:
        """(1/N) sum_k ||H_k||_F^2"""
        return float(np.sum(np.abs(self.tones) ** 2) / self.n_tones)


def array_response(theta: float, n: int) -> np.ndarray:
    """Normalized ULA response (1/sqrt(n)) [1, e^{j pi sin(theta)}, ..., e^{j pi (n-1) sin(theta)}]."""
    if n < 1:
        raise DimensionError("array needs at least one element")
    return np.exp(1j * np.pi * np.arange(n) * np.sin(theta)) / np.sqrt(n)


def sample_channel(cfg: ChannelModelConfig, rng: np.random.Generator) -> ClusterRayChannel:
    """Draw one realization.

    Gains are CN(0, 1/(N_C N_R)), cluster centre angles are uniform on
    [-pi/2, pi/2] at both ends, rays are Laplacian around their centre and the
    cluster delays are distinct integers in [0, L-1] with the first at 0.
    """
    n_c, n_r = cfg.n_clusters, cfg.n_rays
    if n_c > cfg.cp_length:
        raise ConfigurationError(
            f"cannot place {n_c} clusters on distinct delays shorter than the CP ({cfg.cp_length})"
        )

    gains = complex_gaussian(rng, (n_c, n_r), variance=1.0 / (n_c * n_r))
    tx_centres = rng.uniform(-np.pi / 2, np.pi / 2, size=(n_c, 1))
    rx_centres = rng.uniform(-np.pi / 2, np.pi / 2, size=(n_c, 1))
    tx_angles = tx_centres + rng.laplace(0.0, cfg.angle_spread, size=(n_c, n_r))
    rx_angles = rx_centres + rng.laplace(0.0, cfg.angle_spread, size=(n_c, n_r))

    delays = np.zeros(n_c, dtype=int)
    if n_c > 1:
        delays[1:] = rng.choice(np.arange(1, cfg.cp_length), size=n_c - 1, replace=False)

    return ClusterRayChannel(gains=gains, tx_angles=tx_angles, rx_angles=rx_angles, delays=delays)


def steering_matrix(angles: np.ndarray, n: int) -> np.ndarray:
    """Columns are array responses for each angle of the flattened input."""
    angles = np.ravel(angles)
    return np.exp(1j * np.pi * np.outer(np.arange(n), np.sin(angles))) / np.sqrt(n)


def tap_matrices(ch: ClusterRayChannel, n_tx: int, n_rx: int) -> List[Tap]:
    """H(tau_i) = sqrt(N_t N_r) sum_j alpha_ij a_r(theta^r_ij) a_t(theta^t_ij)^H.

    Clusters sharing a delay are merged into one tap; taps come sorted by delay.
    """
    scale = np.sqrt(n_tx * n_rx)
    merged = {}
    for i in range(ch.n_clusters):
        a_r = steering_matrix(ch.rx_angles[i], n_rx)
        a_t = steering_matrix(ch.tx_angles[i], n_tx)
        h = scale * (a_r * ch.gains[i][np.newaxis, :]) @ a_t.conj().T
        delay = int(ch.delays[i])
        merged[delay] = merged[delay] + h if delay in merged else h
    return [(delay, merged[delay]) for delay in sorted(merged)]


def frequency_response(taps: List[Tap], n_tones: int) -> ChannelFrequencyResponse:
    """H_k = sum_i H(tau_i) exp(-j 2 pi k tau_i / N) for k = 0..N-1."""
    if not taps:
        raise DimensionError("channel has no taps")
    k = np.arange(n_tones)
    n_rx, n_tx = taps[0][1].shape
    tones = np.zeros((n_tones, n_rx, n_tx), dtype=complex)
    for delay, h in taps:
        if delay < 0 or delay >= n_tones:
            raise DimensionError(f"tap delay {delay} does not fit a block of {n_tones} tones")
        tones += np.exp(-2j * np.pi * k * delay / n_tones)[:, np.newaxis, np.newaxis] * h[np.newaxis]
    return ChannelFrequencyResponse(tones)


def max_delay(taps: List[Tap]) -> int:
    return max(delay for delay, _ in taps)


def save_channel(ch: ClusterRayChannel, path: Union[str, Path]) -> None:
    """Write a realization as indented JSON (gains split into real/imag parts)."""
    Path(path).write_text(json.dumps(ch.to_dict(), indent=2), encoding="utf-8")


def load_channel(path: Union[str, Path]) -> ClusterRayChannel:
    return ClusterRayChannel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
