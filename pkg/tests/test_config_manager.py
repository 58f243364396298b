"""Tests for configuration loading."""

import pytest

from gatekeeper_ensemble.config import settings
from gatekeeper_ensemble.utils.config_manager import ConfigManager, SearchConfig
from gatekeeper_ensemble.utils.validation import ConfigurationError


class TestConfigManager:
    """Tests for ConfigManager."""

    def test_defaults_from_env(self):
        config = ConfigManager(config_path=None).load_config()
        assert config.voting.tie_break == 7
        assert not config.voting.count_zero_votes
        assert config.search.ensemble_sizes == [6, 9, 12]
        assert config.split.k == 5
        assert config.budget.excluded == [0, 7]

    def test_env_overrides(self):
        settings.TIE_BREAK = 6
        settings.COUNT_ZERO_VOTES = True
        settings.WORKERS = 4
        settings.LOG_LEVEL = "debug"
        config = ConfigManager(config_path=None).load_from_env()
        assert config.voting.tie_break == 6
        assert config.voting.count_zero_votes
        assert config.search.workers == 4
        assert config.logging.level == "DEBUG"

    def test_invalid_env_value(self):
        settings.TIE_BREAK = 9
        with pytest.raises(ValueError):
            ConfigManager(config_path=None).load_from_env()

    def test_load_from_file(self, write_json):
        path = write_json("config.json", {"search": {"thresholds": [2, 1, 2]}, "precision": 5})
        config = ConfigManager(config_path=str(path)).get_config()
        assert config.search.thresholds == [1, 2]
        assert config.precision == 5
        assert config.voting.tie_break == 7

    def test_missing_file(self, tmp_path):
        manager = ConfigManager(config_path=str(tmp_path / "absent.json"))
        with pytest.raises(ConfigurationError, match="not found"):
            manager.load_config()

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{\n  \"top_k\": }", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="config.json:2"):
            ConfigManager(config_path=str(path)).load_config()

    def test_invalid_values(self, write_json):
        path = write_json("config.json", {"budget": {"excluded": [9]}})
        with pytest.raises(ConfigurationError):
            ConfigManager(config_path=str(path)).load_config()

    def test_get_config_caches(self, write_json):
        manager = ConfigManager(config_path=str(write_json("config.json", {})))
        assert manager.get_config() is manager.get_config()


def test_search_config_rejects_non_positive():
    with pytest.raises(ValueError):
        SearchConfig(ensemble_sizes=[0, 6])
