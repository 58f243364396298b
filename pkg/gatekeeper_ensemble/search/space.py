"""Search spaces and canonical enumeration of ensemble configurations."""

from __future__ import annotations

from collections import defaultdict
from itertools import combinations
from math import comb
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Tuple

import structlog
from pydantic import BaseModel, ConfigDict, model_validator

from ..data.models import (
    Branch,
    ClassLabel,
    ClassMode,
    EnsembleConfig,
    Role,
    VoterMeta,
    build_branches,
)
from ..selection.folds import top_k_folds

logger = structlog.get_logger(__name__)


class Candidate(NamedTuple):
    """One point of the search space in canonical order."""

    size: int
    gatekeeper: Branch
    specialists: Tuple[Branch, ...]
    threshold_t: int

    @property
    def branch_ids(self) -> Tuple[str, ...]:
        return (self.gatekeeper.branch_id,) + tuple(b.branch_id for b in self.specialists)


class SearchSpace(BaseModel):
    """Gatekeeper and specialist branches plus the sizes and thresholds to try.

    Every branch holds exactly ``folds_per_branch`` voters, so an ensemble of
    size ``s`` uses ``s / folds_per_branch`` branches, one of them the gatekeeper.
    """

    model_config = ConfigDict(frozen=True)

    gatekeeper_branches: Tuple[Branch, ...]
    specialist_branches: Tuple[Branch, ...] = ()
    folds_per_branch: int = 3
    ensemble_sizes: FrozenSet[int] = frozenset({6, 9, 12})
    thresholds: FrozenSet[int] = frozenset({1, 2, 3})
    tie_break: ClassLabel = ClassLabel.HIGH_ADAPTIVE
    count_zero_votes: bool = False

    @model_validator(mode="after")
    def _check_space(self) -> "SearchSpace":
        f = self.folds_per_branch
        if f < 1:
            raise ValueError("folds_per_branch must be positive")
        for branch in self.gatekeeper_branches + self.specialist_branches:
            if branch.size != f:
                raise ValueError(
                    f"branch {branch.branch_id!r} has {branch.size} voters, expected {f}"
                )
        for branch in self.gatekeeper_branches:
            if branch.class_mode != ClassMode.NINE:
                raise ValueError(f"gatekeeper branch {branch.branch_id!r} is not 9c")
        ids = [b.branch_id for b in self.gatekeeper_branches + self.specialist_branches]
        if len(set(ids)) != len(ids):
            raise ValueError("a branch may appear only once in a search space")
        for size in self.ensemble_sizes:
            if size < f or size % f:
                raise ValueError(
                    f"ensemble size {size} is not a multiple of {f} voters per branch"
                )
        for t in self.thresholds:
            if not 1 <= t <= f:
                raise ValueError(f"threshold {t} outside 1..{f}")
        return self

    @property
    def allow_9c_specialists(self) -> bool:
        return any(b.class_mode == ClassMode.NINE for b in self.specialist_branches)

    def branch(self, branch_id: str) -> Branch:
        for b in self.gatekeeper_branches + self.specialist_branches:
            if b.branch_id == branch_id:
                return b
        raise KeyError(branch_id)

    def expected_count(self, size: Optional[int] = None) -> int:
        """Closed-form number of configurations, for one size or all."""
        sizes = [size] if size is not None else sorted(self.ensemble_sizes)
        return sum(
            len(self.gatekeeper_branches)
            * comb(len(self.specialist_branches), s // self.folds_per_branch - 1)
            * len(self.thresholds)
            for s in sizes
        )

    def candidates(self) -> Iterator[Candidate]:
        """Every (size, gatekeeper, specialist subset, t) once, in canonical order."""
        gatekeepers = sorted(self.gatekeeper_branches, key=lambda b: b.branch_id)
        specialists = sorted(self.specialist_branches, key=lambda b: b.branch_id)
        thresholds = sorted(self.thresholds)
        for size in sorted(self.ensemble_sizes):
            n_specialists = size // self.folds_per_branch - 1
            for gatekeeper in gatekeepers:
                for combo in combinations(specialists, n_specialists):
                    for t in thresholds:
                        yield Candidate(size, gatekeeper, combo, t)

    def config_for(self, candidate: Candidate) -> EnsembleConfig:
        return EnsembleConfig(
            gatekeeper_voters=candidate.gatekeeper.voters,
            specialist_voters=tuple(v for b in candidate.specialists for v in b.voters),
            threshold_t=candidate.threshold_t,
            tie_break=self.tie_break,
            allow_9c_specialists=self.allow_9c_specialists,
            count_zero_votes=self.count_zero_votes,
        )

    @classmethod
    def from_registry(
        cls,
        registry: Iterable[VoterMeta],
        folds_per_branch: int = 3,
        sizes: Iterable[int] = (6, 9, 12),
        thresholds: Iterable[int] = (1, 2, 3),
        role_overrides: Optional[Mapping[str, str]] = None,
        **options,
    ) -> "SearchSpace":
        """Pre-select the top folds of every branch and split branches by role.

        Branches with fewer voters than ``folds_per_branch`` are left out.
        """
        role_overrides = dict(role_overrides or {})
        registry = list(registry)
        metas: Dict[str, List[VoterMeta]] = defaultdict(list)
        for meta in registry:
            metas[meta.branch_id].append(meta)
        unknown = sorted(set(role_overrides) - set(metas))
        if unknown:
            raise ValueError(f"role override for unknown branch(es): {', '.join(unknown)}")

        gatekeepers: List[Branch] = []
        specialists: List[Branch] = []
        for branch in build_branches(registry):
            members = metas[branch.branch_id]
            if len(members) < folds_per_branch:
                logger.warning(
                    "branch_skipped_too_few_folds",
                    branch=branch.branch_id,
                    voters=len(members),
                    required=folds_per_branch,
                )
                continue
            selection = top_k_folds(members, folds_per_branch)
            role = Role(role_overrides.get(branch.branch_id, branch.role))
            if role == Role.GATEKEEPER and branch.class_mode != ClassMode.NINE:
                raise ValueError(f"branch {branch.branch_id!r} is 8c and cannot be a gatekeeper")
            selected = branch.model_copy(update={"voters": selection.by_fold(), "role": role})
            (gatekeepers if role == Role.GATEKEEPER else specialists).append(selected)

        return cls(
            gatekeeper_branches=tuple(gatekeepers),
            specialist_branches=tuple(specialists),
            folds_per_branch=folds_per_branch,
            ensemble_sizes=frozenset(sizes),
            thresholds=frozenset(thresholds),
            **options,
        )


def enumerate_configs(space: SearchSpace) -> Iterator[EnsembleConfig]:
    for candidate in space.candidates():
        yield space.config_for(candidate)
