"""Run-configuration loading and validation."""

import json

import pytest

from lumiphase import config as config_mod
from lumiphase.errors import ConfigError


class TestResolve:
    def test_defaults_validate(self):
        cfg = config_mod.resolve()
        assert cfg["curve_iterations"] == 8
        assert cfg["phase_steps"] == 8
        assert cfg["exposure_base"] == 0.45

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_mod.resolve({"curve_iters": 4})

    def test_value_validation(self):
        with pytest.raises(ConfigError):
            config_mod.resolve({"exposure_base": 2.0})
        with pytest.raises(ConfigError):
            config_mod.resolve({"histogram_mode": "fuzzy"})
        with pytest.raises(ConfigError):
            config_mod.resolve({"tv_weight": -1.0})
        with pytest.raises(ConfigError):
            config_mod.resolve({"opt_steps": -5})
        with pytest.raises(ConfigError):
            config_mod.resolve({"phase_input": "raw"})

    def test_policy_offset_gain_capped(self):
        with pytest.raises(ConfigError):
            config_mod.resolve({"policy_ed_gain": 0.5})


class TestLoad:
    def test_file_overlay(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"opt_steps": 12, "tv_weight": 0.5}))
        cfg = config_mod.load(str(path))
        assert cfg["opt_steps"] == 12
        assert cfg["tv_weight"] == 0.5
        assert cfg["curve_iterations"] == 8

    def test_overrides_beat_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"seed": 1}))
        cfg = config_mod.load(str(path), {"seed": 9})
        assert cfg["seed"] == 9

    def test_bad_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError):
            config_mod.load(str(path))

    def test_non_object_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            config_mod.load(str(path))


class TestViews:
    def test_loss_config_view(self):
        cfg = config_mod.resolve({"histogram_bins": 64, "patch_rows": 2})
        lc = config_mod.loss_config(cfg)
        assert lc.bins == 64
        assert lc.patch_grid == (2, 4)

    def test_policy_view(self):
        cfg = config_mod.resolve({"policy_n_max": 4})
        assert config_mod.policy(cfg).n_max == 4
