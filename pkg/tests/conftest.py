import logging

import numpy as np
import pytest

from schbf.channel import ChannelModelConfig, frequency_response, sample_channel, tap_matrices
from schbf.hbf import SystemConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_model():
    return ChannelModelConfig(n_tx=8, n_rx=8, n_clusters=3, n_rays=4, cp_length=4)


@pytest.fixture
def small_system():
    return SystemConfig(n_tx=8, n_rx=8, n_rf=2, n_streams=2, block_length=16, snr_db=-5.0)


@pytest.fixture
def small_channel(rng, small_model):
    """(realization, taps, frequency response) of an 8x8 channel over 16 tones."""
    channel = sample_channel(small_model, rng)
    taps = tap_matrices(channel, small_model.n_tx, small_model.n_rx)
    return channel, taps, frequency_response(taps, 16)


@pytest.fixture(autouse=True)
def reset_schbf_logger():
    """Undo ``setup_logging`` so later tests do not write to a closed capture stream."""
    yield
    logger = logging.getLogger("schbf")
    logger.handlers.clear()
    logger.propagate = True
    logger.setLevel(logging.NOTSET)
