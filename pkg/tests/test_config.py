import json

import pytest

from src.config import Config, get_config, setting, use_config
from src.errors import ConfigError


def test_defaults():
    config = Config()
    assert config.group_order_budget == 20000
    assert config.max_cosets == 200000
    assert config.closure_coset_strategy == "felsch"
    assert config.closures_max_steps == 16
    assert config.normalizers_max_steps == 32


def test_json_file_overrides(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"max_cosets": 50, "log_level": "DEBUG"}), encoding="utf-8")
    config = Config(str(path))
    assert config.max_cosets == 50
    assert config.log_level == "DEBUG"


def test_unknown_key_is_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"max_coset": 50}), encoding="utf-8")
    with pytest.raises(ConfigError):
        Config(str(path))


def test_unreadable_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        Config(str(path))
    assert info.value.exit_code == 3


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("NCT_AUTOMORPHISM_BUDGET", "10")
    assert Config().automorphism_budget == 10
    monkeypatch.setenv("NCT_AUTOMORPHISM_BUDGET", "many")
    with pytest.raises(ConfigError):
        Config()


def test_unknown_environment_key(monkeypatch):
    monkeypatch.setenv("NCT_NOT_A_KEY", "1")
    with pytest.raises(ConfigError):
        Config()


def test_save_and_reload(tmp_path):
    config = Config()
    config.section_budget = 7
    path = tmp_path / "saved.json"
    config.save_config(str(path))
    assert Config(str(path)).section_budget == 7


def test_setting_prefers_explicit_value():
    config = Config()
    config.max_cosets = 123
    use_config(config)
    assert get_config() is config
    assert setting(None, "max_cosets") == 123
    assert setting(5, "max_cosets") == 5
