"""Tests for the cluster-ray channel model."""

import numpy as np
import pytest

from schbf.channel import (
    ChannelModelConfig,
    ClusterRayChannel,
    array_response,
    frequency_response,
    load_channel,
    max_delay,
    sample_channel,
    save_channel,
    steering_matrix,
    tap_matrices,
)
from schbf.exceptions import ConfigurationError, DimensionError


def _two_ray_channel(delays):
    return ClusterRayChannel(
        gains=np.array([[0.5 + 0.5j], [0.25 - 0.1j]]),
        tx_angles=np.array([[0.1], [-0.4]]),
        rx_angles=np.array([[0.3], [0.7]]),
        delays=np.asarray(delays),
    )


class TestArrayResponse:
    def test_broadside(self):
        np.testing.assert_allclose(array_response(0.0, 4), np.full(4, 0.5))

    def test_unit_norm(self):
        for theta in (-1.2, 0.3, np.pi / 2):
            np.testing.assert_allclose(np.linalg.norm(array_response(theta, 16)), 1.0)

    def test_steering_matrix_columns(self):
        angles = np.array([0.2, -0.5])
        s = steering_matrix(angles, 8)
        np.testing.assert_allclose(s[:, 1], array_response(-0.5, 8))


class TestSampleChannel:
    def test_delays(self, rng):
        cfg = ChannelModelConfig(n_tx=4, n_rx=4, n_clusters=5, n_rays=3, cp_length=16)
        for _ in range(20):
            ch = sample_channel(cfg, rng)
            assert ch.delays[0] == 0
            assert len(set(ch.delays.tolist())) == 5
            assert ch.delays.max() < 16

    def test_shapes(self, rng, small_model):
        ch = sample_channel(small_model, rng)
        assert ch.gains.shape == (3, 4)
        assert ch.tx_angles.shape == ch.rx_angles.shape == (3, 4)

    def test_too_many_clusters(self, rng):
        cfg = ChannelModelConfig(n_tx=4, n_rx=4, n_clusters=6, n_rays=2, cp_length=4)
        with pytest.raises(ConfigurationError, match="clusters"):
            sample_channel(cfg, rng)

    def test_fixed_seed_is_repeatable(self, small_model):
        first = sample_channel(small_model, np.random.default_rng(77))
        second = sample_channel(small_model, np.random.default_rng(77))
        np.testing.assert_array_equal(first.gains, second.gains)
        np.testing.assert_array_equal(first.tx_angles, second.tx_angles)
        np.testing.assert_array_equal(first.rx_angles, second.rx_angles)
        np.testing.assert_array_equal(first.delays, second.delays)

    def test_gain_power_averages_to_one(self, rng):
        cfg = ChannelModelConfig(n_tx=4, n_rx=4, n_clusters=5, n_rays=10, cp_length=16)
        powers = [np.sum(np.abs(sample_channel(cfg, rng).gains) ** 2) for _ in range(2000)]
        np.testing.assert_allclose(np.mean(powers), 1.0, atol=0.02)

    def test_average_energy(self, rng):
        """(1/N) sum_k ||H_k||_F^2 averages to N_t N_r."""
        cfg = ChannelModelConfig(n_tx=8, n_rx=8, n_clusters=5, n_rays=10, cp_length=16)
        energies = [
            frequency_response(tap_matrices(sample_channel(cfg, rng), 8, 8), 32).mean_energy()
            for _ in range(400)
        ]
        np.testing.assert_allclose(np.mean(energies) / 64.0, 1.0, atol=0.1)


class TestTaps:
    def test_single_ray_tap(self):
        ch = _two_ray_channel([0, 3])
        taps = tap_matrices(ch, 4, 6)
        assert [delay for delay, _ in taps] == [0, 3]
        expected = np.sqrt(24) * 0.5 * (1 + 1j) * np.outer(array_response(0.3, 6), array_response(0.1, 4).conj())
        np.testing.assert_allclose(taps[0][1], expected, atol=1e-12)

    def test_shared_delay_merged(self):
        taps = tap_matrices(_two_ray_channel([2, 2]), 4, 4)
        assert len(taps) == 1
        assert max_delay(taps) == 2

    def test_frequency_response_flat_for_zero_delay(self):
        taps = tap_matrices(_two_ray_channel([0, 0]), 4, 4)
        response = frequency_response(taps, 8)
        for k in range(8):
            np.testing.assert_allclose(response[k], taps[0][1])

    def test_frequency_response_phase(self):
        taps = tap_matrices(_two_ray_channel([0, 1]), 4, 4)
        response = frequency_response(taps, 4)
        np.testing.assert_allclose(response[1], taps[0][1] - 1j * taps[1][1], atol=1e-12)

    def test_delay_longer_than_block(self):
        taps = tap_matrices(_two_ray_channel([0, 8]), 4, 4)
        with pytest.raises(DimensionError):
            frequency_response(taps, 8)

    def test_conj_transpose(self, small_channel):
        _, _, response = small_channel
        reverse = response.conj_transpose()
        assert (reverse.n_rx, reverse.n_tx) == (response.n_tx, response.n_rx)
        np.testing.assert_allclose(reverse[3], response[3].conj().T)


class TestChannelFile:
    def test_round_trip_is_exact(self, tmp_path, small_channel):
        channel, _, _ = small_channel
        save_channel(channel, tmp_path / "channel.json")
        loaded = load_channel(tmp_path / "channel.json")
        np.testing.assert_array_equal(loaded.gains, channel.gains)
        np.testing.assert_array_equal(loaded.tx_angles, channel.tx_angles)
        np.testing.assert_array_equal(loaded.delays, channel.delays)
