"""Evaluation and diversity metrics."""

from .agreement import (
    AlphaDecomposition,
    Correlation,
    CrossPairAlpha,
    FoldProfile,
    alpha_from_matrix,
    krippendorff_alpha,
    mean_pairwise_alpha,
    pairwise_alpha_decomposition,
    pearson,
    system_alpha,
)
from .classification import (
    ClassScore,
    ConfusionMatrix,
    EvalReport,
    confusion,
    evaluate,
    f1_score,
    macro_f1,
    per_class_prf,
)

__all__ = [
    "AlphaDecomposition",
    "ClassScore",
    "ConfusionMatrix",
    "Correlation",
    "CrossPairAlpha",
    "EvalReport",
    "FoldProfile",
    "alpha_from_matrix",
    "confusion",
    "evaluate",
    "f1_score",
    "krippendorff_alpha",
    "macro_f1",
    "mean_pairwise_alpha",
    "pairwise_alpha_decomposition",
    "pearson",
    "per_class_prf",
    "system_alpha",
]
