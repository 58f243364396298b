"""Fold selection, fold profiles and anti-correlation ranking of specialists."""

from __future__ import annotations

from typing import List, Mapping, Optional, Sequence, Tuple, Union

import structlog
from pydantic import BaseModel, ConfigDict

from ..data.models import DEFENCE_CLASSES, ClassLabel, GoldLabels, VoterMeta
from ..evaluation.agreement import FoldProfile, pearson
from ..evaluation.classification import macro_f1

logger = structlog.get_logger(__name__)

F1_CV_TOLERANCE = 0.0005


class FoldSelection(BaseModel):
    """Voters kept by ``top_k_folds`` (best first) and the folds dropped."""

    model_config = ConfigDict(frozen=True)

    selected: Tuple[VoterMeta, ...]
    dropped: Tuple[VoterMeta, ...]

    @property
    def selected_ids(self) -> Tuple[str, ...]:
        return tuple(m.voter_id for m in self.selected)

    @property
    def selected_folds(self) -> Tuple[int, ...]:
        return tuple(m.fold for m in self.selected)

    @property
    def dropped_folds(self) -> Tuple[int, ...]:
        return tuple(m.fold for m in self.dropped)

    def by_fold(self) -> Tuple[str, ...]:
        """Selected voter ids ordered by fold index."""
        return tuple(m.voter_id for m in sorted(self.selected, key=lambda m: m.fold))


def top_k_folds(voters: Sequence[VoterMeta], k: int = 3) -> FoldSelection:
    """Keep the ``k`` voters with the highest F1_cv; ties go to the lower fold."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > len(voters):
        raise ValueError(f"k={k} exceeds branch size {len(voters)}")
    ranked = sorted(voters, key=lambda m: (-m.f1_cv, m.fold, m.voter_id))
    return FoldSelection(selected=tuple(ranked[:k]), dropped=tuple(ranked[k:]))


def fold_profile(voters: Sequence[VoterMeta]) -> FoldProfile:
    """F1_cv values of a branch ordered by fold index."""
    if not voters:
        raise ValueError("fold profile needs at least one voter")
    ordered = sorted(voters, key=lambda m: m.fold)
    folds = [m.fold for m in ordered]
    if len(set(folds)) != len(folds):
        raise ValueError("fold profile needs one voter per fold")
    return FoldProfile(values=tuple(m.f1_cv for m in ordered))


class RankedSpecialist(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    r: Optional[float]
    degenerate: bool = False


def rank_specialists(
    candidates: Sequence[Tuple[str, Union[FoldProfile, Sequence[float]]]],
    reference: Union[FoldProfile, Sequence[float]],
) -> List[RankedSpecialist]:
    """Order candidates by ascending Pearson r against the reference profile.

    Most anti-aligned first; constant candidate profiles are flagged and
    placed last in their input order.
    """
    if pearson(reference, reference).degenerate:
        raise ValueError("reference fold profile is constant")
    scored: List[RankedSpecialist] = []
    degenerate: List[RankedSpecialist] = []
    for name, profile in candidates:
        corr = pearson(profile, reference)
        if corr.degenerate:
            logger.warning("specialist_profile_constant", candidate=name)
            degenerate.append(RankedSpecialist(name=name, r=None, degenerate=True))
        else:
            scored.append(RankedSpecialist(name=name, r=corr.r))
    scored.sort(key=lambda s: s.r)
    return scored + degenerate


class F1CvCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    voter_id: str
    recorded: float
    recomputed: float
    n_samples: int

    @property
    def difference(self) -> float:
        return abs(self.recomputed - self.recorded)

    @property
    def consistent(self) -> bool:
        return self.difference <= F1_CV_TOLERANCE


def recompute_f1_cv(
    voter: VoterMeta,
    cv_predictions: Mapping[str, int],
    cv_gold: Union[GoldLabels, Mapping[str, int]],
) -> F1CvCheck:
    """Macro-F1 over classes 1..8 of a voter's held-out fold predictions."""
    gold_map = cv_gold.entries if isinstance(cv_gold, GoldLabels) else cv_gold
    if not cv_predictions:
        raise ValueError(f"voter {voter.voter_id!r} has no cross-validation predictions")
    unknown = [s for s in cv_predictions if s not in gold_map]
    if unknown:
        raise ValueError(
            f"{len(unknown)} cross-validation sample(s) of {voter.voter_id!r} lack gold labels, first {unknown[0]!r}"
        )
    held_out = {s: ClassLabel(int(gold_map[s])) for s in cv_predictions}
    value = macro_f1(cv_predictions, held_out, DEFENCE_CLASSES)
    check = F1CvCheck(
        voter_id=voter.voter_id, recorded=voter.f1_cv, recomputed=value, n_samples=len(held_out)
    )
    if not check.consistent:
        logger.warning(
            "f1_cv_mismatch", voter=voter.voter_id, recorded=voter.f1_cv, recomputed=value
        )
    return check
