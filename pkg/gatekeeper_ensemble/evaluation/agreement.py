"""Diversity metrics: nominal Krippendorff's alpha and fold-profile correlation."""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, field_validator

from ..data.models import N_CLASSES, EnsembleConfig, VoterPredictions

logger = structlog.get_logger(__name__)


def alpha_from_matrix(votes: np.ndarray) -> float:
    """Nominal alpha for a complete voters x units label matrix.

    Coincidence-matrix formulation: every unit holds ``m`` pairable values and
    contributes ``(n_uc * n_uk - [c == k] * n_uc) / (m - 1)`` to cell (c, k).
    """
    votes = np.asarray(votes, dtype=np.int64)
    if votes.ndim != 2 or votes.shape[0] < 2:
        raise ValueError("alpha needs at least two voters")
    m, n_units = votes.shape
    if n_units == 0:
        raise ValueError("alpha needs at least one unit")

    unit_counts = np.zeros((n_units, N_CLASSES), dtype=np.float64)
    cols = np.arange(n_units)
    for row in votes:
        unit_counts[cols, row] += 1.0

    coincidence = (unit_counts.T @ unit_counts - np.diag(unit_counts.sum(axis=0))) / (m - 1)
    marginals = coincidence.sum(axis=1)
    total = marginals.sum()

    observed = coincidence.sum() - np.trace(coincidence)
    expected = total * total - float((marginals * marginals).sum())
    if expected == 0:
        # every value is the same label: no disagreement is possible
        return 1.0
    return float(1.0 - (total - 1.0) * observed / expected)


def _aligned(voters: Sequence[VoterPredictions]) -> np.ndarray:
    if len(voters) < 2:
        raise ValueError("alpha needs at least two voters")
    samples = sorted(voters[0].entries)
    reference = set(samples)
    for voter in voters[1:]:
        if set(voter.entries) != reference:
            raise ValueError(
                f"voter {voter.voter_id!r} does not label the common sample set (missing cells)"
            )
    return np.array([[int(v.entries[s]) for s in samples] for v in voters], dtype=np.int64)


def krippendorff_alpha(voters: Sequence[VoterPredictions]) -> float:
    return alpha_from_matrix(_aligned(list(voters)))


def mean_pairwise_alpha(voters: Sequence[VoterPredictions]) -> float:
    """Mean alpha over every pair of voters."""
    matrix = _aligned(list(voters))
    values = [alpha_from_matrix(matrix[[i, j]]) for i, j in combinations(range(len(matrix)), 2)]
    return float(np.mean(values))


def system_alpha(
    config: EnsembleConfig, lookup: Callable[[str], VoterPredictions]
) -> float:
    """Alpha over every voter of a configuration, gatekeepers included."""
    return krippendorff_alpha([lookup(voter_id) for voter_id in config.voter_ids])


class CrossPairAlpha(BaseModel):
    model_config = ConfigDict(frozen=True)

    first: str
    second: str
    alpha: float


class AlphaDecomposition(BaseModel):
    model_config = ConfigDict(frozen=True)

    system: float
    within: Dict[str, float]
    cross: List[CrossPairAlpha]
    minimum_cross: Optional[CrossPairAlpha]
    skipped: List[str] = []


def pairwise_alpha_decomposition(
    branches: Mapping[str, Sequence[VoterPredictions]]
) -> AlphaDecomposition:
    """Alpha within each branch and over the union of every branch pair."""
    if len(branches) < 2:
        raise ValueError("alpha decomposition needs at least two branches")

    kept: Dict[str, List[VoterPredictions]] = {}
    skipped: List[str] = []
    for branch_id in sorted(branches):
        members = list(branches[branch_id])
        if len(members) < 2:
            logger.warning("branch_skipped_too_few_voters", branch=branch_id, voters=len(members))
            skipped.append(branch_id)
            continue
        kept[branch_id] = members

    within = {branch_id: krippendorff_alpha(members) for branch_id, members in kept.items()}
    cross = [
        CrossPairAlpha(first=a, second=b, alpha=krippendorff_alpha(kept[a] + kept[b]))
        for a, b in combinations(sorted(kept), 2)
    ]
    everyone = [v for members in kept.values() for v in members]
    system = krippendorff_alpha(everyone) if len(everyone) >= 2 else 1.0
    minimum = min(cross, key=lambda p: (p.alpha, p.first, p.second)) if cross else None
    return AlphaDecomposition(
        system=system, within=within, cross=cross, minimum_cross=minimum, skipped=skipped
    )


class FoldProfile(BaseModel):
    """Per-fold F1_cv values of one branch, ordered by fold index."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...]

    @field_validator("values")
    @classmethod
    def _in_unit_interval(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v:
            raise ValueError("fold profile must not be empty")
        for value in v:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"fold profile value {value} outside [0, 1]")
        return v

    def __len__(self) -> int:
        return len(self.values)


class Correlation(BaseModel):
    """Pearson r, or an explicit degenerate marker when a profile is constant."""

    model_config = ConfigDict(frozen=True)

    r: Optional[float]
    degenerate: bool = False


def _as_array(profile: Union[FoldProfile, Sequence[float]]) -> np.ndarray:
    values = profile.values if isinstance(profile, FoldProfile) else profile
    return np.asarray(values, dtype=np.float64)


def pearson(a: Union[FoldProfile, Sequence[float]], b: Union[FoldProfile, Sequence[float]]) -> Correlation:
    x, y = _as_array(a), _as_array(b)
    if x.shape != y.shape:
        raise ValueError(f"profile lengths differ: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("correlation needs profiles of length >= 2")
    # constant check on the raw values; centering leaves rounding residue
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return Correlation(r=None, degenerate=True)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    r = float(np.dot(dx, dy)) / float(np.sqrt(sxx * syy))
    return Correlation(r=max(-1.0, min(1.0, r)))
