"""Vectorised two-stage voting over aligned prediction matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict

from ..data.models import ClassLabel, EnsembleConfig, N_CLASSES, VoterPredictions
from ..utils.metrics import metrics

logger = structlog.get_logger(__name__)


class PredictionMatrix:
    """Voter predictions aligned onto one ordered sample list.

    Each voter's row is built once and memoised, so repeated scoring never
    touches the underlying mappings again.
    """

    def __init__(self, pool: Iterable[VoterPredictions], samples: Sequence[str]):
        self.pool: Dict[str, VoterPredictions] = {p.voter_id: p for p in pool}
        self.samples: List[str] = list(samples)
        if len(set(self.samples)) != len(self.samples):
            raise ValueError("sample list contains duplicates")
        self._rows: Dict[str, np.ndarray] = {}

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    def metas(self):
        return {voter_id: p.meta for voter_id, p in self.pool.items()}

    def row(self, voter_id: str) -> np.ndarray:
        cached = self._rows.get(voter_id)
        if cached is not None:
            return cached
        pred = self.pool.get(voter_id)
        if pred is None:
            raise ValueError(f"voter {voter_id!r} missing from pool")
        entries = pred.entries
        missing = [s for s in self.samples if s not in entries]
        if missing:
            raise ValueError(
                f"voter {voter_id!r} does not cover {len(missing)} sample(s), first {missing[0]!r}"
            )
        row = np.fromiter((int(entries[s]) for s in self.samples), dtype=np.int8, count=len(self.samples))
        row.setflags(write=False)
        self._rows[voter_id] = row
        return row

    def rows(self, voter_ids: Sequence[str]) -> np.ndarray:
        if not voter_ids:
            return np.zeros((0, self.n_samples), dtype=np.int8)
        return np.stack([self.row(v) for v in voter_ids])


@dataclass
class VoteOutcome:
    labels: np.ndarray
    zero_counts: np.ndarray
    override: np.ndarray
    tally: np.ndarray  # 9 x n counts used by the majority branch


def tally_matrix(votes: np.ndarray) -> np.ndarray:
    """Per-sample label counts (9 x n) from a voters x samples label matrix."""
    votes = np.asarray(votes)
    n = votes.shape[1] if votes.ndim == 2 else 0
    counts = np.zeros((N_CLASSES, n), dtype=np.int32)
    cols = np.arange(n)
    for row in votes:
        # (label, column) pairs are unique within one voter row
        counts[row, cols] += 1
    return counts


def decide(
    tally: np.ndarray,
    zero_counts: np.ndarray,
    threshold_t: int,
    tie_break: int = ClassLabel.HIGH_ADAPTIVE,
    count_zero_votes: bool = False,
) -> VoteOutcome:
    """Apply the two-stage rule to precomputed tallies."""
    tie_break = int(tie_break)
    override = zero_counts >= threshold_t
    counts = tally
    if not count_zero_votes:
        counts = tally.copy()
        counts[0] = 0
    best = counts.max(axis=0)
    tied = counts == best
    winner = np.argmax(tied, axis=0)
    winner = np.where(tied[tie_break], tie_break, winner)
    winner = np.where(best == 0, tie_break, winner)
    labels = np.where(override, 0, winner).astype(np.int8)
    return VoteOutcome(labels=labels, zero_counts=zero_counts, override=override, tally=counts)


def vote_matrix(
    gatekeeper: np.ndarray,
    specialist: np.ndarray,
    threshold_t: int,
    tie_break: int = ClassLabel.HIGH_ADAPTIVE,
    count_zero_votes: bool = False,
) -> VoteOutcome:
    """Vectorised ``gatekeeper_vote`` over every column of the vote matrices."""
    gatekeeper = np.asarray(gatekeeper)
    G = gatekeeper.shape[0]
    if G == 0:
        raise ValueError("gatekeeper vote needs at least one gatekeeper")
    if not 1 <= threshold_t <= G:
        raise ValueError(f"threshold_t must lie in 1..{G}, got {threshold_t}")
    specialist = np.asarray(specialist).reshape(-1, gatekeeper.shape[1])
    zero_counts = (gatekeeper == 0).sum(axis=0)
    tally = tally_matrix(np.vstack([gatekeeper, specialist]))
    return decide(tally, zero_counts, threshold_t, tie_break, count_zero_votes)


class VoteTrace(BaseModel):
    """Per-sample record of how the ensemble reached its decision."""

    model_config = ConfigDict(frozen=True)

    sample_id: str
    gatekeeper_zero_count: int
    override_fired: bool
    winning_label: int
    tally: Dict[int, int]


@dataclass
class EnsembleOutput:
    samples: List[str]
    labels: np.ndarray
    override: np.ndarray
    traces: List[VoteTrace] = field(default_factory=list)

    @property
    def predictions(self) -> Dict[str, ClassLabel]:
        return {s: ClassLabel(int(v)) for s, v in zip(self.samples, self.labels)}

    @property
    def override_rate(self) -> float:
        return float(self.override.mean()) if len(self.samples) else 0.0


def ensemble_predict(
    config: EnsembleConfig,
    pool: Union[PredictionMatrix, Sequence[VoterPredictions]],
    samples: Optional[Sequence[str]] = None,
    trace: bool = False,
) -> EnsembleOutput:
    """Run the two-stage vote of ``config`` on every requested sample."""
    if isinstance(pool, PredictionMatrix):
        matrix = pool
        if samples is not None and list(samples) != matrix.samples:
            raise ValueError("sample order differs from the prediction matrix")
    else:
        if samples is None:
            raise ValueError("samples are required when passing raw predictions")
        matrix = PredictionMatrix(pool, samples)

    config.check_modes(matrix.metas())
    gatekeeper = matrix.rows(config.gatekeeper_voters)
    specialist = matrix.rows(config.specialist_voters)
    outcome = vote_matrix(
        gatekeeper, specialist, config.threshold_t, config.tie_break, config.count_zero_votes
    )
    metrics.record_votes(matrix.n_samples, int(outcome.override.sum()))

    traces: List[VoteTrace] = []
    if trace:
        for j, sample_id in enumerate(matrix.samples):
            column = outcome.tally[:, j]
            traces.append(
                VoteTrace(
                    sample_id=sample_id,
                    gatekeeper_zero_count=int(outcome.zero_counts[j]),
                    override_fired=bool(outcome.override[j]),
                    winning_label=int(outcome.labels[j]),
                    tally={c: int(column[c]) for c in range(N_CLASSES) if column[c]},
                )
            )

    logger.debug(
        "ensemble_predicted",
        gatekeepers=config.G,
        specialists=len(config.specialist_voters),
        samples=matrix.n_samples,
        override_rate=float(outcome.override.mean()) if matrix.n_samples else 0.0,
    )
    return EnsembleOutput(
        samples=list(matrix.samples), labels=outcome.labels, override=outcome.override, traces=traces
    )
