"""Fold, specialist and dataset-side selection procedures."""

from .budget import AugmentationBudget, ClassBudget, augmentation_budget, inverse_freq_weights
from .folds import (
    F1CvCheck,
    FoldSelection,
    RankedSpecialist,
    fold_profile,
    rank_specialists,
    recompute_f1_cv,
    top_k_folds,
)
from .split import (
    SplitAssignment,
    SplitReport,
    fold_histograms,
    split_deviation,
    split_report,
    stratified_kfold,
)

__all__ = [
    "AugmentationBudget",
    "ClassBudget",
    "F1CvCheck",
    "FoldSelection",
    "RankedSpecialist",
    "SplitAssignment",
    "SplitReport",
    "augmentation_budget",
    "fold_histograms",
    "fold_profile",
    "inverse_freq_weights",
    "rank_specialists",
    "recompute_f1_cv",
    "split_deviation",
    "split_report",
    "stratified_kfold",
    "top_k_folds",
]
