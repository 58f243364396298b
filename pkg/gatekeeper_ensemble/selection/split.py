"""Dialogue-grouped, class-stratified K-fold assignment."""

from __future__ import annotations

from collections import defaultdict
from typing import Dict, List, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, model_validator

from ..data.models import N_CLASSES

logger = structlog.get_logger(__name__)

# (sample_id, dialogue_id, label)
SplitSample = Tuple[str, str, int]


class SplitAssignment(BaseModel):
    """Fold index per dialogue; samples inherit the fold of their dialogue."""

    model_config = ConfigDict(frozen=True)

    fold_of: Dict[str, int]
    K: int

    @model_validator(mode="after")
    def _folds_in_range(self) -> "SplitAssignment":
        if self.K < 2:
            raise ValueError(f"K must be at least 2, got {self.K}")
        for dialogue_id, fold in self.fold_of.items():
            if not 0 <= fold < self.K:
                raise ValueError(f"dialogue {dialogue_id!r} assigned to fold {fold} outside 0..{self.K - 1}")
        return self

    def sample_folds(self, samples: Sequence[SplitSample]) -> Dict[str, int]:
        return {sample_id: self.fold_of[dialogue_id] for sample_id, dialogue_id, _ in samples}

    def fold_sizes(self) -> List[int]:
        sizes = [0] * self.K
        for fold in self.fold_of.values():
            sizes[fold] += 1
        return sizes


class SplitReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    K: int
    seed: int
    dialogues_per_fold: List[int]
    samples_per_fold: List[int]
    histograms: List[List[int]]
    global_histogram: List[int]
    max_deviation: float


def _dialogue_histograms(samples: Sequence[SplitSample]) -> Dict[str, np.ndarray]:
    seen = set()
    histograms: Dict[str, np.ndarray] = defaultdict(lambda: np.zeros(N_CLASSES, dtype=np.int64))
    for sample_id, dialogue_id, label in samples:
        if sample_id in seen:
            raise ValueError(f"sample {sample_id!r} listed twice")
        seen.add(sample_id)
        label = int(label)
        if not 0 <= label < N_CLASSES:
            raise ValueError(f"label {label} of sample {sample_id!r} outside 0..{N_CLASSES - 1}")
        histograms[dialogue_id][label] += 1
    return dict(histograms)


def stratified_kfold(samples: Sequence[SplitSample], K: int = 5, seed: int = 0) -> SplitAssignment:
    """Greedy stratified assignment of whole dialogues to ``K`` folds.

    Dialogues are taken largest first (ties by id) and placed in the fold whose
    class histogram moves closest to ``global / K`` in squared distance. Equal
    costs are broken with a seeded draw. Costs are scaled by ``K`` so they stay
    integral and ties are exact.
    """
    if K < 2:
        raise ValueError(f"K must be at least 2, got {K}")
    dialogues = _dialogue_histograms(samples)
    if len(dialogues) < K:
        raise ValueError(f"{len(dialogues)} dialogue(s) cannot fill {K} folds")

    rng = np.random.default_rng(seed)
    global_hist = np.sum(list(dialogues.values()), axis=0)
    folds = np.zeros((K, N_CLASSES), dtype=np.int64)
    order = sorted(dialogues, key=lambda d: (-int(dialogues[d].sum()), d))

    fold_of: Dict[str, int] = {}
    for dialogue_id in order:
        d = dialogues[dialogue_id]
        # K * (|h_f + d - T|^2 - |h_f - T|^2) with T = global / K
        costs = 2 * (K * folds - global_hist) @ d + K * int(d @ d)
        best = np.flatnonzero(costs == costs.min())
        fold = int(best[0]) if len(best) == 1 else int(rng.choice(best))
        folds[fold] += d
        fold_of[dialogue_id] = fold

    assignment = SplitAssignment(fold_of=fold_of, K=K)
    logger.info(
        "stratified_split_completed",
        K=K,
        seed=seed,
        dialogues=len(dialogues),
        max_deviation=_max_deviation(folds, global_hist),
    )
    return assignment


def fold_histograms(assignment: SplitAssignment, samples: Sequence[SplitSample]) -> np.ndarray:
    """K x 9 class counts per fold."""
    folds = np.zeros((assignment.K, N_CLASSES), dtype=np.int64)
    for sample_id, dialogue_id, label in samples:
        if dialogue_id not in assignment.fold_of:
            raise ValueError(f"dialogue {dialogue_id!r} of sample {sample_id!r} has no fold")
        folds[assignment.fold_of[dialogue_id], int(label)] += 1
    return folds


def _max_deviation(folds: np.ndarray, global_hist: np.ndarray) -> float:
    total = global_hist.sum()
    if total == 0:
        return 0.0
    global_prop = global_hist / total
    sizes = folds.sum(axis=1, keepdims=True)
    # an empty fold has an all-zero proportion vector
    props = np.divide(folds, sizes, out=np.zeros(folds.shape, dtype=np.float64), where=sizes > 0)
    return float(np.abs(props - global_prop).max())


def split_deviation(assignment: SplitAssignment, samples: Sequence[SplitSample]) -> float:
    """Max over folds and classes of |fold class proportion - global proportion|."""
    folds = fold_histograms(assignment, samples)
    return _max_deviation(folds, folds.sum(axis=0))


def split_report(assignment: SplitAssignment, samples: Sequence[SplitSample], seed: int = 0) -> SplitReport:
    folds = fold_histograms(assignment, samples)
    return SplitReport(
        K=assignment.K,
        seed=seed,
        dialogues_per_fold=assignment.fold_sizes(),
        samples_per_fold=folds.sum(axis=1).astype(int).tolist(),
        histograms=folds.astype(int).tolist(),
        global_histogram=folds.sum(axis=0).astype(int).tolist(),
        max_deviation=_max_deviation(folds, folds.sum(axis=0)),
    )
