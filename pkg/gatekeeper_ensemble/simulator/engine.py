"""Seeded generation of gold labels and correlated voter predictions."""

from __future__ import annotations

from typing import Dict, List, NamedTuple, Optional

import numpy as np
import structlog

from ..data.models import DEFENCE_CLASSES, ClassLabel, ClassMode, GoldLabels, VoterPredictions
from ..evaluation.classification import confusion_counts, macro_from_counts
from ..utils.metrics import metrics, track_time
from .config import SimConfig

logger = structlog.get_logger(__name__)

GOLD_STREAM = 0
PROTOTYPE_STREAM = 1
FIRST_VOTER_STREAM = 2


class SimulatedPool(NamedTuple):
    gold: GoldLabels
    predictions: List[VoterPredictions]
    dialogues: Optional[Dict[str, str]] = None
    prototype: Optional[Dict[str, ClassLabel]] = None


def stream(seed: int, key: int) -> np.random.Generator:
    """Independent PCG64 stream ``key`` of ``seed``; adding voters never shifts earlier streams."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(key,))))


def _draw(cumulative: np.ndarray, given: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw: row ``cumulative[given[j]]`` at uniform ``u[j]``.

    A ``u`` above a row total that rounds short of 1 yields the row's last
    label with positive mass, never a label the row cannot produce.
    """
    labels = np.empty(len(given), dtype=np.int64)
    for row in np.unique(given):
        cdf = cumulative[row]
        last = int(np.flatnonzero(np.diff(cdf, prepend=0.0) > 0.0)[-1])
        mask = given == row
        labels[mask] = np.minimum(np.searchsorted(cdf, u[mask], side="right"), last)
    return labels


def sample_ids(n: int) -> List[str]:
    width = max(5, len(str(n - 1)))
    return [f"s{i:0{width}d}" for i in range(n)]


@track_time("simulate")
def simulate(config: SimConfig) -> SimulatedPool:
    """Draw gold labels and every voter's predictions.

    Per sample, a hidden prototype label is drawn from the first voter's
    confusion row. Each voter copies it with probability ``rho`` and otherwise
    draws from its own row; an 8c voter never copies a prototype 0.
    """
    n = config.n_samples
    ids = sample_ids(n)

    prior_cum = np.cumsum(np.asarray(config.class_prior, dtype=np.float64))
    gold = _draw(
        prior_cum[None, :], np.zeros(n, dtype=np.int64), stream(config.seed, GOLD_STREAM).random(n)
    )

    prototype = _draw(
        config.voters[0].cumulative(), gold, stream(config.seed, PROTOTYPE_STREAM).random(n)
    )

    gold_labels = GoldLabels(entries={s: ClassLabel(int(g)) for s, g in zip(ids, gold)})
    predictions: List[VoterPredictions] = []
    for i, voter in enumerate(config.voters):
        rng = stream(config.seed, FIRST_VOTER_STREAM + i)
        u_copy = rng.random(n)
        u_own = rng.random(n)
        own = _draw(voter.cumulative(), gold, u_own)
        copy = u_copy < config.rho
        if voter.meta.class_mode == ClassMode.EIGHT:
            copy &= prototype != 0
        labels = np.where(copy, prototype, own)

        meta = voter.meta
        if voter.recompute_f1_cv:
            counts = confusion_counts(labels.astype(np.int64), gold.astype(np.int64))
            f1_cv, _ = macro_from_counts(counts, DEFENCE_CLASSES)
            meta = meta.model_copy(update={"f1_cv": f1_cv})
        predictions.append(
            VoterPredictions(
                meta=meta, entries={s: ClassLabel(int(v)) for s, v in zip(ids, labels)}
            )
        )

    dialogues = None
    if config.dialogue_size:
        width = max(5, len(str((n - 1) // config.dialogue_size)))
        dialogues = {s: f"d{j // config.dialogue_size:0{width}d}" for j, s in enumerate(ids)}

    metrics.record_voters_simulated(len(config.voters))
    logger.info(
        "pool_simulated",
        samples=n,
        voters=len(config.voters),
        rho=config.rho,
        seed=config.seed,
    )
    return SimulatedPool(
        gold=gold_labels,
        predictions=predictions,
        dialogues=dialogues,
        prototype={s: ClassLabel(int(p)) for s, p in zip(ids, prototype)},
    )
