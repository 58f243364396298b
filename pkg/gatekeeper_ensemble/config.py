from __future__ import annotations
import os
from typing import Optional

class Settings:
    """Configuration for the gatekeeper ensemble toolkit.

    Reads from environment variables with safe defaults.
    """

    # Pool
    MANIFEST_PATH: Optional[str] = os.getenv("ENSEMBLE_MANIFEST")  # default --manifest
    CONFIG_PATH: Optional[str] = os.getenv("ENSEMBLE_CONFIG")  # optional JSON defaults file

    # Voting
    TIE_BREAK: int = int(os.getenv("ENSEMBLE_TIE_BREAK", "7"))  # majority class
    COUNT_ZERO_VOTES: bool = os.getenv("ENSEMBLE_COUNT_ZERO_VOTES", "false").lower() == "true"

    # Selection / search
    TOP_K: int = int(os.getenv("ENSEMBLE_TOP_K", "3"))  # folds kept per branch
    WORKERS: int = int(os.getenv("ENSEMBLE_WORKERS", "1"))  # search scoring threads

    # Randomness
    SEED: int = int(os.getenv("ENSEMBLE_SEED", "0"))

    # Reports
    PRECISION: int = int(os.getenv("ENSEMBLE_PRECISION", "3"))  # decimals in table output

    # Logging
    LOG_LEVEL: str = os.getenv("ENSEMBLE_LOG_LEVEL", "WARNING")
    LOG_JSON: bool = os.getenv("ENSEMBLE_LOG_JSON", "false").lower() == "true"

settings = Settings()
