"""Configuration parsing: defaults, overrides, and loud failures."""

import math

import pytest

from pdqw import ConfigError
from pdqw.config import SimulationConfig, config_echo, config_from_dict, load_config


class TestDefaults:
    def test_experiment_scale_defaults(self):
        cfg = SimulationConfig()
        assert cfg.steps == 7
        assert cfg.p_values == [0.0, 0.05, 0.10, 0.20, 1.0]
        assert cfg.n_maps == 1000
        assert cfg.master_seed == 1
        assert cfg.coin_reflectivity == 0.5
        assert cfg.sampling_mode == "bernoulli"
        assert cfg.alphabet == (0.0, math.pi)
        assert cfg.crossing_steps == [5, 6, 7]
        assert not cfg.two_photon.enabled
        assert cfg.two_photon.visibility == 0.93

    def test_effective_values(self):
        cfg = SimulationConfig()
        assert cfg.effective_n_max() == 7
        assert cfg.effective_fit_range() == (1, 7)
        cfg = config_from_dict({"steps": 20})
        assert cfg.effective_fit_range() == (1, 7)
        cfg = config_from_dict({"steps": 4})
        assert cfg.effective_fit_range() == (1, 4)

    def test_default_p_grid_is_percent_resolution(self):
        cfg = SimulationConfig()
        assert len(cfg.p_grid) == 101
        assert cfg.p_grid[0] == 0.0
        assert cfg.p_grid[-1] == 1.0

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("")
        assert load_config(path) == SimulationConfig()


class TestParsing:
    def test_yaml_round_trip(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "steps: 5\n"
            "n_maps: 20\n"
            "master_seed: 9\n"
            "p_values: [0.0, 1.0]\n"
            "coin_reflectivity: 0.45\n"
            "sampling_mode: exact_fraction\n"
            "fit_range: [2, 5]\n"
            "p_grid: {start: 0.0, stop: 1.0, step: 0.25}\n"
            "crossing_steps: [4, 5]\n"
            "two_photon: {enabled: true, eta: 0.8, delays: [-1.0, 0.0, 1.0]}\n"
            "output_dir: results\n"
        )
        cfg = load_config(path)
        assert cfg.steps == 5
        assert cfg.fit_range == (2, 5)
        assert cfg.p_grid == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert cfg.two_photon.enabled and cfg.two_photon.eta == 0.8
        assert cfg.output_dir == "results"

    def test_alphabet_tokens_are_pi_multiples(self):
        cfg = config_from_dict({"alphabet": [0, "pi", 0.5]})
        assert cfg.alphabet == (0.0, math.pi, 0.5 * math.pi)

    def test_n_max_override(self):
        cfg = config_from_dict({"steps": 5, "n_max": 9})
        assert cfg.effective_n_max() == 9

    def test_invalid_yaml_is_a_config_error(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("steps: [unclosed\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestRejection:
    @pytest.mark.parametrize(
        "data,needle",
        [
            ({"stepz": 3}, "stepz"),
            ({"steps": 0}, "steps"),
            ({"steps": 2.5}, "steps"),
            ({"n_max": 3, "steps": 5}, "n_max"),
            ({"p_values": []}, "p_values"),
            ({"p_values": [1.5]}, "p_values"),
            ({"n_maps": 0}, "n_maps"),
            ({"master_seed": -1}, "master_seed"),
            ({"master_seed": 2**64}, "master_seed"),
            ({"coin_reflectivity": 1.2}, "coin_reflectivity"),
            ({"sampling_mode": "sobol"}, "sampling_mode"),
            ({"alphabet": []}, "alphabet"),
            ({"alphabet": ["tau"]}, "alphabet"),
            ({"fit_range": [3]}, "fit_range"),
            ({"fit_range": [0, 5]}, "fit_range"),
            ({"fit_range": [5, 5]}, "fit_range"),
            ({"fit_range": [2, 9], "steps": 7}, "fit_range"),
            ({"p_grid": [0.5]}, "p_grid"),
            ({"p_grid": [0.2, 0.1]}, "p_grid"),
            ({"p_grid": [0.0, 2.0]}, "p_grid"),
            ({"p_grid": {"start": 0.5, "stop": 0.1}}, "p_grid"),
            ({"p_grid": {"step": -1}}, "p_grid"),
            ({"p_grid": "dense"}, "p_grid"),
            ({"crossing_steps": []}, "crossing_steps"),
            ({"crossing_steps": [9], "steps": 7}, "crossing_steps"),
            ({"two_photon": {"gamma": 1}}, "two_photon"),
            ({"two_photon": {"eta": 2.0}}, "eta"),
            ({"two_photon": {"visibility": -0.1}}, "visibility"),
            ({"two_photon": {"coherence_time": 0}}, "coherence_time"),
            ({"two_photon": {"delays": []}}, "delays"),
            ({"two_photon": {"enabled": "yes"}}, "enabled"),
            ({"two_photon": 3}, "two_photon"),
            ({"output_dir": ""}, "output_dir"),
        ],
    )
    def test_bad_values_name_the_field(self, data, needle):
        with pytest.raises(ConfigError) as err:
            config_from_dict(data)
        assert needle in str(err.value)

    def test_non_mapping_root(self):
        with pytest.raises(ConfigError):
            config_from_dict([1, 2, 3])


class TestEcho:
    def test_echo_is_json_ready_and_complete(self):
        cfg = config_from_dict({"steps": 5, "alphabet": [0, "pi"]})
        echo = config_echo(cfg)
        assert echo["steps"] == 5
        assert echo["alphabet_pi_units"] == [0.0, 1.0]
        assert echo["fit_range"] == [1, 5]
        assert echo["n_max"] == 5
        import json

        json.dumps(echo)
