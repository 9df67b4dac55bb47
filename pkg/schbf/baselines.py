"""
Reference schemes for the BER comparisons.

- ``ifd``: ideal full-digital design with an SVD precoder at every tone and
  per-tone MMSE combining (unconstrained benchmark, ignores PAPR).
- ``fd-strongest-approx``: one full-digital precoder for the whole band built
  from the steering vectors of the strongest rays.
- ``hbf-strongest-approx``: hybrid design whose analog beams point at the
  strongest rays.

The two strongest-path schemes are approximations reconstructed from a
one-line description of the published designs; their names carry the
``-approx`` suffix wherever they are reported.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from schbf.channel import ChannelFrequencyResponse, ClusterRayChannel, steering_matrix
from schbf.exceptions import ConfigurationError
from schbf.hbf import (
    ChannelLike,
    SystemConfig,
    _h,
    _tones,
    digital_combiners,
    normalize_digital_precoder,
    phase_extract,
)
from schbf.numerics import inverse

IFD = "ifd"
FD_STRONGEST = "fd-strongest-approx"
HBF_STRONGEST = "hbf-strongest-approx"


@dataclass(frozen=True)
class BaselineSolution:
    """Beamformers of a reference scheme.

    ``precoders`` holds one N_t x N_s matrix per tone for IFD, otherwise the
    single wideband precoder is ``v_rf @ v_d`` (``v_rf`` is the identity for
    the full-digital scheme). ``w_rf`` is the identity for full-digital
    receivers, so ``w_rf @ w_d[k]`` is always the effective combiner.
    """

    scheme: str
    w_rf: np.ndarray
    w_d: np.ndarray
    v_rf: Optional[np.ndarray] = None
    v_d: Optional[np.ndarray] = None
    precoders: Optional[np.ndarray] = field(default=None)

    @property
    def frequency_flat(self) -> bool:
        return self.precoders is None

    @property
    def precoder(self) -> np.ndarray:
        if not self.frequency_flat:
            raise ConfigurationError(f"{self.scheme} precodes every tone separately")
        return self.v_rf @ self.v_d

    def tone_precoders(self, n_tones: int) -> np.ndarray:
        if self.frequency_flat:
            return np.broadcast_to(self.precoder, (n_tones,) + self.precoder.shape)
        return self.precoders

    def tone_combiners(self) -> np.ndarray:
        return self.w_rf[np.newaxis] @ self.w_d

    def transmit_power(self) -> np.ndarray:
        """||precoder||_F^2 per tone (IFD) or a single value."""
        if self.frequency_flat:
            return np.array([np.linalg.norm(self.precoder) ** 2])
        return np.sum(np.abs(self.precoders) ** 2, axis=(-2, -1))


def full_digital_combiners(precoders: np.ndarray, tones: np.ndarray, noise_var: float) -> np.ndarray:
    """U_k = (H_k F_k F_k^H H_k^H + sigma^2 I)^{-1} H_k F_k (MMSE with W_RF = I)."""
    effective = tones @ precoders
    n_r = tones.shape[1]
    return inverse(effective @ _h(effective) + noise_var * np.eye(n_r)) @ effective


def ifd_solution(channel_freq: ChannelLike, sys: SystemConfig) -> BaselineSolution:
    """Equal-power SVD precoding on every tone, no water-filling."""
    tones = _tones(channel_freq)
    _, _, vh = np.linalg.svd(tones)
    precoders = np.sqrt(1.0 / sys.n_streams) * _h(vh[:, : sys.n_streams, :])
    combiners = full_digital_combiners(precoders, tones, sys.noise_var)
    return BaselineSolution(
        scheme=IFD,
        w_rf=np.eye(sys.n_rx, dtype=complex),
        w_d=combiners,
        precoders=np.ascontiguousarray(precoders),
    )


def strongest_rays(channel: ClusterRayChannel, count: int) -> np.ndarray:
    """Flat (cluster-major) indices of the ``count`` largest-|alpha| rays.

    Ties keep (cluster, ray) index order.
    """
    magnitudes = np.abs(channel.gains).ravel()
    if magnitudes.size < count:
        raise ConfigurationError(f"channel has {magnitudes.size} rays, {count} needed")
    return np.argsort(-magnitudes, kind="stable")[:count]


def strongest_path_hbf(
    channel: ClusterRayChannel, channel_freq: ChannelLike, sys: SystemConfig,
) -> BaselineSolution:
    """Analog beams steered at the N_RF strongest rays, V_D from the truncated identity."""
    tones = _tones(channel_freq)
    picked = strongest_rays(channel, sys.n_rf)
    v_rf = phase_extract(steering_matrix(channel.tx_angles.ravel()[picked], sys.n_tx))
    w_rf = phase_extract(steering_matrix(channel.rx_angles.ravel()[picked], sys.n_rx))
    v_d, _ = normalize_digital_precoder(v_rf, np.eye(sys.n_rf, sys.n_streams, dtype=complex))
    w_d = digital_combiners(w_rf, tones, v_rf, v_d, sys.noise_var)
    return BaselineSolution(scheme=HBF_STRONGEST, w_rf=w_rf, w_d=w_d, v_rf=v_rf, v_d=v_d)


def strongest_path_fd(
    channel: ClusterRayChannel, channel_freq: ChannelLike, sys: SystemConfig,
) -> BaselineSolution:
    """One wideband full-digital precoder spanning the N_s strongest transmit steering vectors."""
    tones = _tones(channel_freq)
    picked = strongest_rays(channel, sys.n_streams)
    steering = steering_matrix(channel.tx_angles.ravel()[picked], sys.n_tx)
    q, _ = linalg.qr(steering, mode="economic")
    precoder = q / np.sqrt(sys.n_streams)
    combiners = full_digital_combiners(np.broadcast_to(precoder, (tones.shape[0],) + precoder.shape), tones, sys.noise_var)
    return BaselineSolution(
        scheme=FD_STRONGEST,
        w_rf=np.eye(sys.n_rx, dtype=complex),
        w_d=combiners,
        v_rf=np.eye(sys.n_tx, dtype=complex),
        v_d=precoder,
    )
