"""Registry validation: violations are returned as data, never raised."""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Dict, Iterable, List

from pydantic import BaseModel, ConfigDict

from .models import ClassMode, GoldLabels, N_CLASSES, VoterMeta, VoterPredictions, branch_consistency_issues

UNKNOWN_VOTER = "unknown_voter"
MISSING_PREDICTIONS = "missing_predictions"
DUPLICATE_VOTER = "duplicate_voter"
LABEL_RANGE = "label_range"
SPECIALIST_EMITTED_ZERO = "specialist_emitted_zero"
COVERAGE_MISMATCH = "coverage_mismatch"
DUPLICATE_BRANCH_FOLD = "duplicate_branch_fold"
BRANCH_INCONSISTENT = "branch_inconsistent"


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str
    voter_id: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.voter_id}: {self.message}"


def validate_registry(
    registry: Iterable[VoterMeta],
    predictions: Iterable[VoterPredictions],
    gold: GoldLabels,
) -> List[Violation]:
    """Check a pool against its registry and gold labels.

    Returns the violations sorted by (code, voter_id, message); an empty list
    means the pool is valid.
    """
    registry = list(registry)
    predictions = list(predictions)
    violations: List[Violation] = []

    def add(code: str, voter_id: str, message: str) -> None:
        violations.append(Violation(code=code, voter_id=voter_id, message=message))

    id_counts = Counter(m.voter_id for m in registry)
    for voter_id, count in id_counts.items():
        if count > 1:
            add(DUPLICATE_VOTER, voter_id, f"voter id registered {count} times")
    metas: Dict[str, VoterMeta] = {m.voter_id: m for m in registry}

    slots = Counter((m.branch_id, m.fold) for m in registry)
    for (branch_id, fold), count in slots.items():
        if count > 1:
            add(DUPLICATE_BRANCH_FOLD, branch_id, f"fold {fold} registered {count} times")

    by_branch: Dict[str, List[VoterMeta]] = defaultdict(list)
    for meta in registry:
        by_branch[meta.branch_id].append(meta)
    for branch_id, members in by_branch.items():
        issues = branch_consistency_issues(members)
        if issues:
            add(BRANCH_INCONSISTENT, branch_id, f"members differ on {', '.join(issues)}")

    gold_ids = set(gold.entries)
    covered = set()
    for pred in predictions:
        voter_id = pred.voter_id
        covered.add(voter_id)
        meta = metas.get(voter_id)
        if meta is None:
            add(UNKNOWN_VOTER, voter_id, "predictions for a voter missing from the registry")
            meta = pred.meta

        bad = sorted(sid for sid, label in pred.entries.items() if not 0 <= int(label) < N_CLASSES)
        if bad:
            add(LABEL_RANGE, voter_id, f"{len(bad)} label(s) outside 0..{N_CLASSES - 1}, first {bad[0]!r}")

        if meta.class_mode == ClassMode.EIGHT:
            zeros = sorted(sid for sid, label in pred.entries.items() if int(label) == 0)
            if zeros:
                add(
                    SPECIALIST_EMITTED_ZERO,
                    voter_id,
                    f"specialist emitted class 0 on {len(zeros)} sample(s), first {zeros[0]!r}",
                )

        pred_ids = set(pred.entries)
        missing = gold_ids - pred_ids
        extra = pred_ids - gold_ids
        if missing or extra:
            add(
                COVERAGE_MISMATCH,
                voter_id,
                f"coverage mismatch, {len(missing)} missing, {len(extra)} extra",
            )

    for voter_id in sorted(set(metas) - covered):
        add(MISSING_PREDICTIONS, voter_id, "registered voter has no predictions")

    return sorted(set(violations), key=lambda v: (v.code, v.voter_id, v.message))
