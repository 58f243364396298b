"""Augmentation budgets and inverse-frequency class weights."""

from __future__ import annotations

from typing import Dict, Hashable, Iterable, Mapping, Tuple

import structlog
from pydantic import BaseModel, ConfigDict, Field, computed_field

from ..data.models import ClassLabel

logger = structlog.get_logger(__name__)

DEFAULT_EXCLUDED = frozenset({ClassLabel.NO_DEFENCE, ClassLabel.HIGH_ADAPTIVE})


class ClassBudget(BaseModel):
    model_config = ConfigDict(frozen=True)

    orig_count: int = Field(..., ge=0)
    budget: int = Field(..., ge=0)

    @computed_field  # type: ignore[misc]
    @property
    def augmented(self) -> int:
        return self.orig_count + self.budget


class AugmentationBudget(BaseModel):
    """Synthetic samples to generate per class."""

    model_config = ConfigDict(frozen=True)

    per_class: Dict[int, ClassBudget]
    target: int = 200
    cap_multiplier: int = 3
    excluded: Tuple[int, ...] = (0, 7)

    @computed_field  # type: ignore[misc]
    @property
    def total(self) -> int:
        return sum(b.budget for b in self.per_class.values())

    @computed_field  # type: ignore[misc]
    @property
    def total_orig(self) -> int:
        return sum(b.orig_count for b in self.per_class.values())


def augmentation_budget(
    counts: Mapping[int, int],
    target: int = 200,
    cap: int = 3,
    excluded: Iterable[int] = DEFAULT_EXCLUDED,
) -> AugmentationBudget:
    """``max(0, min(target - n_c, cap * n_c))`` per class, zero for excluded classes."""
    if target < 0 or cap < 0:
        raise ValueError("target and cap must be non-negative")
    excluded_set = frozenset(int(ClassLabel.parse(c)) for c in excluded)
    per_class: Dict[int, ClassBudget] = {}
    for label in sorted(counts, key=int):
        c = int(ClassLabel.parse(label))
        n = int(counts[label])
        if n < 0:
            raise ValueError(f"count for class {c} is negative: {n}")
        budget = 0 if c in excluded_set else max(0, min(target - n, cap * n))
        per_class[c] = ClassBudget(orig_count=n, budget=budget)

    result = AugmentationBudget(
        per_class=per_class, target=target, cap_multiplier=cap, excluded=tuple(sorted(excluded_set))
    )
    logger.info("augmentation_budget_computed", total=result.total, target=target, cap=cap)
    return result


def inverse_freq_weights(counts: Mapping[Hashable, int]) -> Dict[Hashable, float]:
    """Class weights ``N / (K * n_c)`` over the classes present in ``counts``."""
    if not counts:
        raise ValueError("inverse-frequency weights need at least one class")
    for label, n in counts.items():
        if n <= 0:
            raise ValueError(f"class {label} has non-positive count {n}")
    total = sum(counts.values())
    k = len(counts)
    return {label: total / (k * n) for label, n in counts.items()}
