"""
Experiment Presets Package

Each ``<name>_experiment.json`` file in this directory is a flat key/value
experiment configuration:
- snr_desk: BER versus SNR at 16x16
- snr_full: BER versus SNR at 64x64
- nrf_desk: BER versus the number of RF chains
- smoke: a seconds-long run used by tests

``name`` and ``description`` are informational; every other key maps onto
``ExperimentConfig``.
"""

import json
import os
from typing import Any, Dict, List

PRESET_SUFFIX = "_experiment.json"


def load_preset(name: str) -> Dict[str, Any]:
    """
    Load a preset by name

    Args:
        name: The preset name (e.g. 'snr_desk', 'nrf_desk')

    Returns:
        Dictionary with the preset keys
    """
    current_dir = os.path.dirname(__file__)
    preset_file = os.path.join(current_dir, f"{name.lower()}{PRESET_SUFFIX}")

    if os.path.exists(preset_file):
        with open(preset_file, 'r', encoding='utf-8') as f:
            return json.load(f)
    raise FileNotFoundError(f"Preset not found: {name} (available: {', '.join(get_available_presets())})")


def get_available_presets() -> List[str]:
    """
    Get the list of shipped preset names

    Returns:
        Sorted preset names
    """
    current_dir = os.path.dirname(__file__)
    preset_files = [f for f in os.listdir(current_dir) if f.endswith(PRESET_SUFFIX)]
    return sorted(f[: -len(PRESET_SUFFIX)] for f in preset_files)


def load_all_presets() -> Dict[str, Any]:
    """
    Load every shipped preset

    Returns:
        Dictionary with preset name as key and its keys as value
    """
    return {name: load_preset(name) for name in get_available_presets()}


__all__ = [
    "load_preset",
    "get_available_presets",
    "load_all_presets",
]
