"""Exhaustive re-voting search over cached branch predictions."""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from itertools import groupby
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict

from ..data.models import DEFENCE_CLASSES, AugStatus, EnsembleConfig, GoldLabels, VoterPredictions
from ..evaluation.classification import confusion_counts, macro_from_counts
from ..utils.metrics import metrics, track_time
from ..voting.ensemble import PredictionMatrix, decide, ensemble_predict, tally_matrix
from .space import Candidate, SearchSpace

logger = structlog.get_logger(__name__)

Pool = Union[PredictionMatrix, Sequence[VoterPredictions]]


class ScoredConfig(BaseModel):
    """One scored configuration; ``aug_flags`` follow ``branch_ids``."""

    model_config = ConfigDict(frozen=True)

    size: int
    f1: float
    threshold_t: int
    gatekeeper_branch: str
    specialist_branches: Tuple[str, ...]
    aug_flags: Tuple[bool, ...]

    @property
    def branch_ids(self) -> Tuple[str, ...]:
        return (self.gatekeeper_branch,) + self.specialist_branches

    @property
    def aug_mix(self) -> str:
        if all(self.aug_flags):
            return "pure_aug"
        if not any(self.aug_flags):
            return "pure_no_aug"
        return "mixed"

    def rank_key(self) -> Tuple[float, int, Tuple[str, ...]]:
        return (-self.f1, self.threshold_t, self.branch_ids)


class AugMixSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    mixed_mean: Optional[float] = None
    pure_aug_mean: Optional[float] = None
    pure_no_aug_mean: Optional[float] = None
    mixed_count: int = 0
    pure_aug_count: int = 0
    pure_no_aug_count: int = 0


class SearchResult(BaseModel):
    """Top rows per ensemble size, plus the number of configurations scored."""

    model_config = ConfigDict(frozen=True)

    top: Dict[int, List[ScoredConfig]]
    n_scored: Dict[int, int]
    aug_mix: Dict[int, AugMixSummary]
    class_subset: List[int]


def format_configuration(row: ScoredConfig) -> str:
    """``gk + sp1 + sp2``, with ``(n)`` after every no-aug branch."""
    parts = [
        branch_id + (" (n)" if not aug else "")
        for branch_id, aug in zip(row.branch_ids, row.aug_flags)
    ]
    return " + ".join(parts)


def _matrix(pool: Pool, gold: GoldLabels) -> PredictionMatrix:
    if isinstance(pool, PredictionMatrix):
        return pool
    return PredictionMatrix(pool, gold.sample_ids())


def _gold_array(matrix: PredictionMatrix, gold: GoldLabels) -> np.ndarray:
    if set(matrix.samples) != set(gold.entries):
        raise ValueError("prediction matrix samples differ from the gold sample set")
    return np.fromiter(
        (int(gold.entries[s]) for s in matrix.samples), dtype=np.int64, count=matrix.n_samples
    )


def score_config(
    config: EnsembleConfig,
    pool: Pool,
    gold: GoldLabels,
    class_subset: Iterable[int] = DEFENCE_CLASSES,
) -> float:
    """Macro-F1 of the configuration's ensemble output against ``gold``."""
    matrix = _matrix(pool, gold)
    output = ensemble_predict(config, matrix)
    counts = confusion_counts(output.labels.astype(np.int64), _gold_array(matrix, gold))
    value, _ = macro_from_counts(counts, class_subset)
    return value


class _BranchTallies:
    """Per-branch 9 x n label counts and gatekeeper zero counts, built once."""

    def __init__(self, space: SearchSpace, matrix: PredictionMatrix):
        self.tally: Dict[str, np.ndarray] = {}
        self.zeros: Dict[str, np.ndarray] = {}
        for branch in space.gatekeeper_branches + space.specialist_branches:
            rows = matrix.rows(branch.voters)
            self.tally[branch.branch_id] = tally_matrix(rows)
            self.zeros[branch.branch_id] = (rows == 0).sum(axis=0)


def _score_group(
    group: List[Candidate],
    space: SearchSpace,
    tallies: _BranchTallies,
    gold_arr: np.ndarray,
    class_subset: List[int],
) -> List[ScoredConfig]:
    # all candidates of a group share branches and differ only in t
    head = group[0]
    ids = head.branch_ids
    tally = tallies.tally[ids[0]].copy()
    for branch_id in ids[1:]:
        tally += tallies.tally[branch_id]
    zero_counts = tallies.zeros[ids[0]]
    aug_flags = tuple(b.aug == AugStatus.AUG for b in (head.gatekeeper,) + head.specialists)

    rows = []
    for candidate in group:
        outcome = decide(
            tally, zero_counts, candidate.threshold_t, space.tie_break, space.count_zero_votes
        )
        counts = confusion_counts(outcome.labels.astype(np.int64), gold_arr)
        value, _ = macro_from_counts(counts, class_subset)
        rows.append(
            ScoredConfig(
                size=candidate.size,
                f1=value,
                threshold_t=candidate.threshold_t,
                gatekeeper_branch=ids[0],
                specialist_branches=ids[1:],
                aug_flags=aug_flags,
            )
        )
    return rows


def score_all(
    space: SearchSpace,
    pool: Pool,
    gold: GoldLabels,
    class_subset: Iterable[int] = DEFENCE_CLASSES,
    workers: int = 1,
) -> List[ScoredConfig]:
    """Score every configuration of the space; rows come back in canonical order."""
    matrix = _matrix(pool, gold)
    gold_arr = _gold_array(matrix, gold)
    subset = sorted({int(c) for c in class_subset})
    probe = next(space.candidates(), None)
    if probe is None:
        raise ValueError("empty search space")
    space.config_for(probe).check_modes(matrix.metas())

    tallies = _BranchTallies(space, matrix)
    groups = [
        list(g)
        for _, g in groupby(space.candidates(), key=lambda c: (c.size,) + c.branch_ids)
    ]

    def run(group: List[Candidate]) -> List[ScoredConfig]:
        return _score_group(group, space, tallies, gold_arr, subset)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_executor:
            chunks = list(pool_executor.map(run, groups))
    else:
        chunks = [run(g) for g in groups]
    rows = [row for chunk in chunks for row in chunk]

    per_size: Dict[int, int] = defaultdict(int)
    for row in rows:
        per_size[row.size] += 1
    for size, count in per_size.items():
        metrics.record_configs_scored(size, count)
    return rows


def rank_rows(rows: Iterable[ScoredConfig]) -> List[ScoredConfig]:
    """Descending f1, then smaller t, then lexicographic branch ids."""
    return sorted(rows, key=ScoredConfig.rank_key)


def aug_mix_summary(rows: Iterable[ScoredConfig]) -> Dict[int, AugMixSummary]:
    """Mean f1 of mixed aug/no-aug configurations against pure ones, per size."""
    buckets: Dict[int, Dict[str, List[float]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        buckets[row.size][row.aug_mix].append(row.f1)

    summary: Dict[int, AugMixSummary] = {}
    for size in sorted(buckets):
        fields = {}
        for kind in ("mixed", "pure_aug", "pure_no_aug"):
            values = buckets[size].get(kind, [])
            fields[f"{kind}_count"] = len(values)
            fields[f"{kind}_mean"] = float(np.mean(values)) if values else None
        summary[size] = AugMixSummary(**fields)
    return summary


@track_time("search")
def search_top(
    space: SearchSpace,
    pool: Pool,
    gold: GoldLabels,
    top_n: int = 3,
    class_subset: Iterable[int] = DEFENCE_CLASSES,
    workers: int = 1,
) -> SearchResult:
    """Top ``top_n`` configurations per ensemble size over the full space."""
    if top_n < 1:
        raise ValueError(f"top_n must be positive, got {top_n}")
    subset = sorted({int(c) for c in class_subset})
    rows = score_all(space, pool, gold, subset, workers)

    by_size: Dict[int, List[ScoredConfig]] = defaultdict(list)
    for row in rows:
        by_size[row.size].append(row)
    top = {size: rank_rows(by_size[size])[:top_n] for size in sorted(by_size)}
    n_scored = {size: len(by_size[size]) for size in sorted(by_size)}

    logger.info(
        "search_completed",
        configs=len(rows),
        sizes=sorted(by_size),
        best={size: top[size][0].f1 for size in top},
    )
    return SearchResult(
        top=top, n_scored=n_scored, aug_mix=aug_mix_summary(rows), class_subset=subset
    )
