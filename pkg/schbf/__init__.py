"""
schbf - Hybrid Beamforming Design and SC-FDE Link Simulation

This package contains:
- EVD-based alternating hybrid precoder/combiner design (MMSE criterion)
- Reference full-digital and strongest-path schemes
- Cluster-ray mmWave channel model
- Cyclic-prefix single-carrier link simulator
- Sweep orchestration, CSV output and optional run history
"""

__version__ = "1.0.0"
__description__ = "Hybrid beamforming design and SC-FDE link simulation"

from .baselines import BaselineSolution, ifd_solution, strongest_path_fd, strongest_path_hbf
from .channel import ChannelModelConfig, ClusterRayChannel, frequency_response, sample_channel, tap_matrices
from .exceptions import (
    ConfigurationError,
    DimensionError,
    FramingError,
    SchbfError,
    SingularMatrixError,
    UndefinedMetricError,
)
from .experiments import ExperimentConfig, ExperimentRunner, run_nrf_sweep, run_snr_sweep, summarize
from .hbf import HbfSolution, SolverConfig, SolverDiagnostics, SystemConfig, solve_hbf
from .link import QamConstellation, SimulationResult, run_ber_point

__all__ = [
    "BaselineSolution",
    "ChannelModelConfig",
    "ClusterRayChannel",
    "ConfigurationError",
    "DimensionError",
    "ExperimentConfig",
    "ExperimentRunner",
    "FramingError",
    "HbfSolution",
    "QamConstellation",
    "SchbfError",
    "SimulationResult",
    "SingularMatrixError",
    "SolverConfig",
    "SolverDiagnostics",
    "SystemConfig",
    "UndefinedMetricError",
    "frequency_response",
    "ifd_solution",
    "run_ber_point",
    "run_nrf_sweep",
    "run_snr_sweep",
    "sample_channel",
    "solve_hbf",
    "strongest_path_fd",
    "strongest_path_hbf",
    "summarize",
    "tap_matrices",
]
