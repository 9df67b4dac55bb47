import pytest

from schbf.experiments import ExperimentConfig
from schbf.presets import get_available_presets, load_all_presets, load_preset


class TestPresets:
    def test_available(self):
        assert get_available_presets() == ["nrf_desk", "smoke", "snr_desk", "snr_full"]

    def test_every_preset_is_valid(self):
        for name, values in load_all_presets().items():
            cfg = ExperimentConfig.from_mapping(values)
            assert cfg.name == name

    def test_desk_setup(self):
        values = load_preset("snr_desk")
        assert (values["n_tx"], values["n_rx"], values["n_rf"], values["n_streams"]) == (16, 16, 2, 2)
        assert values["snr_db"][0] == -20 and values["snr_db"][-1] == 0

    def test_nrf_setup(self):
        cfg = ExperimentConfig.from_preset("nrf_desk")
        assert cfg.n_rf_points() == [2, 3, 4]
        assert cfg.fixed_snr_db == -18

    def test_missing(self):
        with pytest.raises(FileNotFoundError, match="available"):
            load_preset("nope")
