"""Scalar voting rules over hard labels."""

from __future__ import annotations

from collections import Counter
from typing import Dict, Iterable, Sequence

from pydantic import BaseModel, ConfigDict, model_validator

from ..data.models import ClassLabel


class VoteTally(BaseModel):
    """Vote counts per label for one sample."""

    model_config = ConfigDict(frozen=True)

    counts: Dict[int, int]
    total: int

    @model_validator(mode="after")
    def _consistent(self) -> "VoteTally":
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("vote counts must be non-negative")
        if sum(self.counts.values()) != self.total:
            raise ValueError("vote counts must sum to total")
        return self

    @classmethod
    def of(cls, votes: Iterable[int]) -> "VoteTally":
        counts = Counter(int(v) for v in votes)
        return cls(counts=dict(sorted(counts.items())), total=sum(counts.values()))

    def winner(self, tie_break: int) -> ClassLabel:
        """Label with maximal count; ties go to ``tie_break`` if tied, else the smallest label."""
        if self.total == 0:
            return ClassLabel(tie_break)
        best = max(self.counts.values())
        tied = {label for label, count in self.counts.items() if count == best}
        if int(tie_break) in tied:
            return ClassLabel(tie_break)
        return ClassLabel(min(tied))


def majority_vote(votes: Sequence[int], tie_break: int = ClassLabel.HIGH_ADAPTIVE) -> ClassLabel:
    if not votes:
        raise ValueError("majority vote needs at least one vote")
    return VoteTally.of(votes).winner(tie_break)


def gatekeeper_vote(
    gatekeeper_votes: Sequence[int],
    specialist_votes: Sequence[int],
    threshold_t: int,
    tie_break: int = ClassLabel.HIGH_ADAPTIVE,
    count_zero_votes: bool = False,
) -> ClassLabel:
    """Two-stage rule: C0-override by gatekeepers, else majority on defence classes.

    0-votes are left out of the second-stage tally unless ``count_zero_votes``
    is set, so the majority branch can only return 0 in that mode.
    """
    G = len(gatekeeper_votes)
    if G == 0:
        raise ValueError("gatekeeper vote needs at least one gatekeeper")
    if not 1 <= threshold_t <= G:
        raise ValueError(f"threshold_t must lie in 1..{G}, got {threshold_t}")

    zeros = sum(1 for v in gatekeeper_votes if int(v) == 0)
    if zeros >= threshold_t:
        return ClassLabel.NO_DEFENCE

    votes = [int(v) for v in list(gatekeeper_votes) + list(specialist_votes)]
    if not count_zero_votes:
        votes = [v for v in votes if v != 0]
    return VoteTally.of(votes).winner(tie_break)
