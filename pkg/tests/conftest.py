"""Pytest configuration and shared fixtures."""

import json
from pathlib import Path
from typing import Callable, Dict, List, Sequence

import numpy as np
import pytest

from gatekeeper_ensemble.config import settings
from gatekeeper_ensemble.data.models import ClassLabel, GoldLabels, VoterMeta, VoterPredictions
from gatekeeper_ensemble.storage.pool_store import write_pool
from gatekeeper_ensemble.utils.config_manager import config_manager
from gatekeeper_ensemble.utils.logging import setup_logging

# Test-set confusion counts: rows gold, columns predicted.
TEST_SET_SUPPORTS = (75, 28, 16, 25, 21, 13, 44, 243, 7)
REFERENCE_TP = (71, 14, 5, 8, 7, 2, 22, 200, 2)
REFERENCE_OFF_DIAGONAL = {
    0: {7: 2, 8: 2},
    1: {6: 5, 3: 4, 7: 3, 5: 2},
    2: {6: 4, 7: 3, 4: 2, 1: 2},
    3: {7: 6, 6: 8, 4: 3},
    4: {3: 2, 2: 4, 0: 4, 5: 3, 8: 1},
    5: {7: 7, 6: 4},
    6: {7: 16, 3: 6},
    7: {6: 12, 0: 8, 3: 10, 1: 4, 2: 5, 4: 4},
    8: {6: 2, 4: 3},
}


def reference_counts() -> np.ndarray:
    counts = np.zeros((9, 9), dtype=np.int64)
    for c in range(9):
        counts[c, c] = REFERENCE_TP[c]
        for pred, n in REFERENCE_OFF_DIAGONAL[c].items():
            counts[c, pred] = n
    return counts


@pytest.fixture
def reference_confusion() -> np.ndarray:
    """Confusion counts whose row sums equal the test-set supports."""
    return reference_counts()


@pytest.fixture
def reference_labels():
    """Prediction and gold label maps that reproduce the reference confusion counts."""
    counts = reference_counts()
    pred: Dict[str, ClassLabel] = {}
    gold: Dict[str, ClassLabel] = {}
    i = 0
    for g in range(9):
        for p in range(9):
            for _ in range(int(counts[g, p])):
                sample_id = f"t{i:04d}"
                gold[sample_id] = ClassLabel(g)
                pred[sample_id] = ClassLabel(p)
                i += 1
    return pred, GoldLabels(entries=gold)


def make_meta(
    voter_id: str,
    branch_id: str,
    fold: int,
    role: str = "specialist",
    class_mode: str = "8c",
    aug: str = "aug",
    f1_cv: float = 0.5,
    base_model: str = "model",
    method: str = "SFT",
) -> VoterMeta:
    return VoterMeta(
        voter_id=voter_id,
        branch_id=branch_id,
        role=role,
        method=method,
        class_mode=class_mode,
        base_model=base_model,
        aug=aug,
        fold=fold,
        f1_cv=f1_cv,
    )


def make_voter(meta: VoterMeta, labels: Sequence[int], samples: Sequence[str]) -> VoterPredictions:
    return VoterPredictions(
        meta=meta, entries={s: ClassLabel(int(v)) for s, v in zip(samples, labels)}
    )


def sample_ids(n: int) -> List[str]:
    return [f"s{i:03d}" for i in range(n)]


@pytest.fixture
def pool_builder() -> Callable:
    """Build a pool from ``{branch_id: (role, class_mode, [labels per fold])}``."""

    def build(branches, samples: Sequence[str], aug: Dict[str, str] = None, f1_cv=None):
        aug = aug or {}
        f1_cv = f1_cv or {}
        voters = []
        for branch_id, (role, class_mode, rows) in sorted(branches.items()):
            for fold, labels in enumerate(rows):
                meta = make_meta(
                    f"{branch_id}-f{fold}",
                    branch_id,
                    fold,
                    role=role,
                    class_mode=class_mode,
                    aug=aug.get(branch_id, "aug"),
                    f1_cv=f1_cv.get(branch_id, [0.5] * len(rows))[fold],
                    base_model=branch_id,
                )
                voters.append(make_voter(meta, labels, samples))
        return voters

    return build


@pytest.fixture
def small_pool_dir(tmp_path: Path, pool_builder) -> Path:
    """A written pool: one 9c gatekeeper branch and two 8c specialist branches."""
    samples = sample_ids(6)
    gold = GoldLabels(entries={s: ClassLabel(v) for s, v in zip(samples, [0, 7, 7, 3, 6, 1])})
    voters = pool_builder(
        {
            "gk": ("gatekeeper", "9c", [[0, 7, 7, 3, 6, 1], [0, 7, 6, 3, 6, 1], [0, 7, 7, 3, 7, 0]]),
            "spa": ("specialist", "8c", [[7, 7, 7, 3, 6, 1], [7, 7, 7, 3, 6, 2], [6, 7, 7, 3, 6, 1]]),
            "spb": ("specialist", "8c", [[7, 6, 7, 3, 7, 1], [7, 7, 7, 2, 6, 1], [7, 7, 7, 3, 6, 1]]),
        },
        samples,
        aug={"spb": "no-aug"},
        f1_cv={"gk": [0.40, 0.45, 0.42], "spa": [0.38, 0.44, 0.41], "spb": [0.47, 0.39, 0.43]},
    )
    dialogues = {s: f"d{i // 2}" for i, s in enumerate(samples)}
    manifest = write_pool(gold, voters, tmp_path / "pool", dialogues)
    return manifest


@pytest.fixture
def write_json(tmp_path: Path) -> Callable:
    def write(name: str, data) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


@pytest.fixture(autouse=True)
def stderr_logging():
    """Route log lines to stderr before fixtures run, as the CLI does, so they never reach stdout."""
    setup_logging()


@pytest.fixture(autouse=True)
def reset_settings():
    """Reset settings and the cached configuration after each test."""
    original_values = {
        'MANIFEST_PATH': settings.MANIFEST_PATH,
        'CONFIG_PATH': settings.CONFIG_PATH,
        'TIE_BREAK': settings.TIE_BREAK,
        'COUNT_ZERO_VOTES': settings.COUNT_ZERO_VOTES,
        'TOP_K': settings.TOP_K,
        'WORKERS': settings.WORKERS,
        'SEED': settings.SEED,
        'PRECISION': settings.PRECISION,
        'LOG_LEVEL': settings.LOG_LEVEL,
        'LOG_JSON': settings.LOG_JSON,
    }
    original_path = config_manager.config_path
    config_manager.config = None

    yield

    for key, value in original_values.items():
        setattr(settings, key, value)
    config_manager.config_path = original_path
    config_manager.config = None
