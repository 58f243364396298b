"""Per-class precision/recall/F1, macro-F1 over a class subset and confusion matrices."""

from __future__ import annotations

from typing import Dict, Iterable, List, Literal, Mapping, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict

from ..data.models import DEFENCE_CLASSES, GoldLabels, N_CLASSES

logger = structlog.get_logger(__name__)

Normalization = Literal["none", "row"]
LabelMap = Mapping[str, int]


class ClassScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    precision: float
    recall: float
    f1: float
    support: int
    # a zero denominator occurred; `absent` means TP = FP = FN = 0
    degenerate: bool = False
    absent: bool = False


class ConfusionMatrix(BaseModel):
    """Rows are gold labels, columns are predicted labels."""

    model_config = ConfigDict(frozen=True)

    counts: List[List[int]]
    normalization: Normalization = "none"
    values: List[List[float]]

    @property
    def n(self) -> int:
        return int(sum(sum(row) for row in self.counts))

    def cell(self, gold: int, pred: int) -> float:
        return self.values[gold][pred]


class EvalReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    per_class: Dict[int, ClassScore]
    macro_f1: float
    class_subset: List[int]
    skipped_absent: List[int] = []
    confusion: ConfusionMatrix
    n_samples: int


def _gold_map(gold: Union[GoldLabels, LabelMap]) -> LabelMap:
    return gold.entries if isinstance(gold, GoldLabels) else gold


def aligned_arrays(pred: LabelMap, gold: Union[GoldLabels, LabelMap]) -> Tuple[np.ndarray, np.ndarray]:
    """Prediction and gold label arrays in sorted sample-id order."""
    gold_map = _gold_map(gold)
    if set(pred) != set(gold_map):
        missing = len(set(gold_map) - set(pred))
        extra = len(set(pred) - set(gold_map))
        raise ValueError(f"sample-set mismatch: {missing} missing, {extra} extra")
    ids = sorted(gold_map)
    pred_arr = np.fromiter((int(pred[s]) for s in ids), dtype=np.int64, count=len(ids))
    gold_arr = np.fromiter((int(gold_map[s]) for s in ids), dtype=np.int64, count=len(ids))
    return pred_arr, gold_arr


def confusion_counts(pred: np.ndarray, gold: np.ndarray) -> np.ndarray:
    return np.bincount(gold * N_CLASSES + pred, minlength=N_CLASSES * N_CLASSES).reshape(
        N_CLASSES, N_CLASSES
    )


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def score_from_counts(counts: np.ndarray, c: int) -> ClassScore:
    tp = int(counts[c, c])
    fp = int(counts[:, c].sum()) - tp
    fn = int(counts[c, :].sum()) - tp
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return ClassScore(
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        support=tp + fn,
        degenerate=(tp + fp == 0) or (tp + fn == 0),
        absent=(tp + fp + fn == 0),
    )


def _subset(class_subset: Iterable[int]) -> List[int]:
    subset = sorted({int(c) for c in class_subset})
    if not subset:
        raise ValueError("class subset must not be empty")
    for c in subset:
        if not 0 <= c < N_CLASSES:
            raise ValueError(f"class {c} outside 0..{N_CLASSES - 1}")
    return subset


def macro_from_counts(
    counts: np.ndarray, class_subset: Iterable[int], skip_absent: bool = False
) -> Tuple[float, List[int]]:
    """Mean F1 over the subset; returns the value and the classes skipped as absent."""
    scores = {c: score_from_counts(counts, c) for c in _subset(class_subset)}
    skipped = [c for c, s in scores.items() if skip_absent and s.absent]
    used = [s.f1 for c, s in scores.items() if c not in skipped]
    if not used:
        logger.warning("macro_f1_all_classes_absent", classes=sorted(scores))
        return 0.0, skipped
    return float(sum(used) / len(used)), skipped


def per_class_prf(pred: LabelMap, gold: Union[GoldLabels, LabelMap], c: int) -> ClassScore:
    pred_arr, gold_arr = aligned_arrays(pred, gold)
    return score_from_counts(confusion_counts(pred_arr, gold_arr), int(c))


def macro_f1(
    pred: LabelMap,
    gold: Union[GoldLabels, LabelMap],
    class_subset: Iterable[int] = DEFENCE_CLASSES,
    skip_absent: bool = False,
) -> float:
    pred_arr, gold_arr = aligned_arrays(pred, gold)
    value, _ = macro_from_counts(confusion_counts(pred_arr, gold_arr), class_subset, skip_absent)
    return value


def confusion_from_counts(counts: np.ndarray, normalize: Normalization = "none") -> ConfusionMatrix:
    if normalize not in ("none", "row"):
        raise ValueError(f"unknown normalization {normalize!r}")
    values = counts.astype(np.float64)
    if normalize == "row":
        support = counts.sum(axis=1, keepdims=True)
        values = np.divide(values, support, out=np.zeros_like(values), where=support > 0)
    return ConfusionMatrix(
        counts=counts.astype(int).tolist(), normalization=normalize, values=values.tolist()
    )


def confusion(
    pred: LabelMap, gold: Union[GoldLabels, LabelMap], normalize: Normalization = "none"
) -> ConfusionMatrix:
    pred_arr, gold_arr = aligned_arrays(pred, gold)
    return confusion_from_counts(confusion_counts(pred_arr, gold_arr), normalize)


def evaluate(
    pred: LabelMap,
    gold: Union[GoldLabels, LabelMap],
    class_subset: Iterable[int] = DEFENCE_CLASSES,
    skip_absent: bool = False,
    normalize: Normalization = "none",
) -> EvalReport:
    """Full report: every class's P/R/F1, macro-F1 over the subset and the confusion matrix."""
    pred_arr, gold_arr = aligned_arrays(pred, gold)
    counts = confusion_counts(pred_arr, gold_arr)
    subset = _subset(class_subset)
    value, skipped = macro_from_counts(counts, subset, skip_absent)
    report = EvalReport(
        per_class={c: score_from_counts(counts, c) for c in range(N_CLASSES)},
        macro_f1=value,
        class_subset=subset,
        skipped_absent=skipped,
        confusion=confusion_from_counts(counts, normalize),
        n_samples=int(len(gold_arr)),
    )
    logger.info("evaluation_completed", macro_f1=value, n_samples=report.n_samples, skipped=skipped)
    return report
