"""Configuration management with validation for CLI defaults."""

import json
from typing import Optional, List
import structlog
from pydantic import BaseModel, Field, field_validator

from ..config import Settings, settings
from .validation import ConfigurationError

logger = structlog.get_logger(__name__)


class VotingConfig(BaseModel):
    """Two-stage voting defaults."""
    tie_break: int = Field(default=7, ge=0, le=8)
    count_zero_votes: bool = Field(default=False)


class SearchConfig(BaseModel):
    """Re-voting search defaults."""
    folds_per_branch: int = Field(default=3, ge=1, le=20)
    ensemble_sizes: List[int] = Field(default_factory=lambda: [6, 9, 12])
    thresholds: List[int] = Field(default_factory=lambda: [1, 2, 3])
    top_n: int = Field(default=3, ge=1)
    workers: int = Field(default=1, ge=1, le=64)

    @field_validator('ensemble_sizes', 'thresholds')
    @classmethod
    def validate_positive(cls, v):
        if not v or any(x < 1 for x in v):
            raise ValueError('must be a non-empty list of positive integers')
        return sorted(set(v))


class SplitConfig(BaseModel):
    """Stratified split defaults."""
    k: int = Field(default=5, ge=2)
    seed: int = Field(default=0, ge=0)


class BudgetConfig(BaseModel):
    """Augmentation budget defaults."""
    target: int = Field(default=200, ge=0)
    cap: int = Field(default=3, ge=0)
    excluded: List[int] = Field(default_factory=lambda: [0, 7])

    @field_validator('excluded')
    @classmethod
    def validate_labels(cls, v):
        if any(not 0 <= x <= 8 for x in v):
            raise ValueError('excluded classes must lie in 0..8')
        return sorted(set(v))


class LoggingConfig(BaseModel):
    """Logging configuration."""
    level: str = Field(default="WARNING", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    json_format: bool = Field(default=False)


class AppConfig(BaseModel):
    """Main toolkit configuration."""
    voting: VotingConfig = Field(default_factory=VotingConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    budget: BudgetConfig = Field(default_factory=BudgetConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    top_k: int = Field(default=3, ge=1)
    precision: int = Field(default=3, ge=0, le=12)
    manifest: Optional[str] = None


class ConfigManager:
    """Loads the toolkit configuration from a JSON file or the environment."""

    def __init__(self, config_path: Optional[str] = None, env: Optional[Settings] = None):
        self.env = env or settings
        self.config_path = config_path or self.env.CONFIG_PATH
        self.config: Optional[AppConfig] = None

    def load_from_env(self) -> AppConfig:
        """Load configuration from environment-derived settings."""
        env = self.env
        config_dict = {
            "voting": {
                "tie_break": env.TIE_BREAK,
                "count_zero_votes": env.COUNT_ZERO_VOTES,
            },
            "search": {
                "folds_per_branch": env.TOP_K,
                "workers": env.WORKERS,
            },
            "split": {"seed": env.SEED},
            "logging": {
                "level": env.LOG_LEVEL.upper(),
                "json_format": env.LOG_JSON,
            },
            "top_k": env.TOP_K,
            "precision": env.PRECISION,
            "manifest": env.MANIFEST_PATH,
        }

        return AppConfig(**config_dict)

    def load_from_file(self, config_path: str) -> AppConfig:
        """Load configuration from JSON file."""
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                config_dict = json.load(f)

            logger.info("config_loaded_from_file", path=config_path)
            return AppConfig(**config_dict)

        except FileNotFoundError:
            logger.warning("config_file_not_found", path=config_path)
            raise ConfigurationError(f"config file not found: {config_path}")
        except json.JSONDecodeError as e:
            logger.error("config_file_invalid_json", path=config_path, error=str(e))
            raise ConfigurationError(f"{config_path}:{e.lineno}:{e.colno}: invalid JSON ({e.msg})")
        except ValueError as e:
            logger.error("config_load_failed", path=config_path, error=str(e))
            raise ConfigurationError(f"{config_path}: {e}")

    def load_config(self) -> AppConfig:
        """Load configuration from file when one is configured, else from the environment."""
        if self.config_path:
            return self.load_from_file(self.config_path)
        return self.load_from_env()

    def get_config(self) -> AppConfig:
        """Get current configuration, loading if necessary."""
        if self.config is None:
            self.config = self.load_config()
        return self.config


# Global config manager instance
config_manager = ConfigManager()
