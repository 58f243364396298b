"""Post-hoc re-voting search over cached branch predictions."""

from .engine import (
    AugMixSummary,
    ScoredConfig,
    SearchResult,
    aug_mix_summary,
    format_configuration,
    rank_rows,
    score_all,
    score_config,
    search_top,
)
from .space import Candidate, SearchSpace, enumerate_configs

__all__ = [
    "AugMixSummary",
    "Candidate",
    "ScoredConfig",
    "SearchResult",
    "SearchSpace",
    "aug_mix_summary",
    "enumerate_configs",
    "format_configuration",
    "rank_rows",
    "score_all",
    "score_config",
    "search_top",
]
