"""Diagnostics: agreement bands, flips and override rates."""

from .flips import (
    DEFAULT_BOUNDARY,
    BandStat,
    FlipDirection,
    FlipReport,
    agreement_bands,
    flip_analysis,
    flip_possible,
    override_rate,
)

__all__ = [
    "DEFAULT_BOUNDARY",
    "BandStat",
    "FlipDirection",
    "FlipReport",
    "agreement_bands",
    "flip_analysis",
    "flip_possible",
    "override_rate",
]
