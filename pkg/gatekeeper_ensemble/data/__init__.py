"""Core data model shared by every other module."""

from .models import (
    AugStatus,
    Branch,
    ClassLabel,
    ClassMode,
    EnsembleConfig,
    GoldLabels,
    Method,
    Role,
    VoterMeta,
    VoterPredictions,
    build_branches,
    default_threshold,
)
from .registry import Violation, validate_registry

__all__ = [
    "AugStatus",
    "Branch",
    "ClassLabel",
    "ClassMode",
    "EnsembleConfig",
    "GoldLabels",
    "Method",
    "Role",
    "VoterMeta",
    "VoterPredictions",
    "Violation",
    "build_branches",
    "default_threshold",
    "validate_registry",
]
