"""Domain models: labels, voters, branches and ensemble configurations."""

from __future__ import annotations

from enum import Enum, IntEnum
from itertools import groupby
from typing import Any, Dict, Iterable, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

N_CLASSES = 9
DEFENCE_CLASSES = frozenset(range(1, 9))

_LEVEL_NAMES = (
    "No Defence",
    "Action",
    "Major Image-Dist.",
    "Disavowal",
    "Minor Image-Dist.",
    "Neurotic",
    "Obsessional",
    "High-Adaptive",
    "Needs More Info",
)


class ClassLabel(IntEnum):
    """DMRS level index; 0 is No Defence, 7 (High-Adaptive) is the majority class."""

    NO_DEFENCE = 0
    ACTION = 1
    MAJOR_IMAGE_DISTORTING = 2
    DISAVOWAL = 3
    MINOR_IMAGE_DISTORTING = 4
    NEUROTIC = 5
    OBSESSIONAL = 6
    HIGH_ADAPTIVE = 7
    NEEDS_MORE_INFO = 8

    @classmethod
    def parse(cls, value: Any) -> "ClassLabel":
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise ValueError(f"label must be an integer, got {value!r}")
        try:
            number = int(value)
        except ValueError:
            raise ValueError(f"label must be an integer, got {value!r}")
        if not 0 <= number < N_CLASSES:
            raise ValueError(f"label {number} outside 0..{N_CLASSES - 1}")
        return cls(number)

    @property
    def display_name(self) -> str:
        return _LEVEL_NAMES[self.value]


class Role(str, Enum):
    GATEKEEPER = "gatekeeper"
    SPECIALIST = "specialist"


class Method(str, Enum):
    SFT = "SFT"
    CLS_HEAD = "ClsHead"
    LR = "LR"


class ClassMode(str, Enum):
    NINE = "9c"
    EIGHT = "8c"


class AugStatus(str, Enum):
    AUG = "aug"
    NO_AUG = "no-aug"


_FROZEN = ConfigDict(frozen=True, use_enum_values=False)


def _check_sample_ids(entries: Dict[str, Any]) -> None:
    for sample_id in entries:
        if not sample_id or not sample_id.strip():
            raise ValueError("sample ids must be non-empty strings")


class GoldLabels(BaseModel):
    """Reference labels keyed by opaque sample id."""

    model_config = _FROZEN

    entries: Dict[str, ClassLabel]

    @field_validator("entries")
    @classmethod
    def _non_empty(cls, v: Dict[str, ClassLabel]) -> Dict[str, ClassLabel]:
        if not v:
            raise ValueError("gold labels must not be empty")
        _check_sample_ids(v)
        return v

    @property
    def size(self) -> int:
        return len(self.entries)

    def sample_ids(self) -> List[str]:
        return sorted(self.entries)

    def counts(self) -> Dict[int, int]:
        counts = {c: 0 for c in range(N_CLASSES)}
        for label in self.entries.values():
            counts[int(label)] += 1
        return counts


class VoterMeta(BaseModel):
    """Registry entry describing one fold-model voter."""

    model_config = _FROZEN

    voter_id: str = Field(..., min_length=1)
    branch_id: str = Field(..., min_length=1)
    role: Role
    method: Method
    class_mode: ClassMode
    base_model: str = Field(..., min_length=1)
    aug: AugStatus = AugStatus.AUG
    fold: int = Field(..., ge=0)
    f1_cv: float = Field(0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _gatekeeper_is_nine_class(self) -> "VoterMeta":
        # only 9c voters may emit class 0
        if self.role == Role.GATEKEEPER and self.class_mode != ClassMode.NINE:
            raise ValueError(f"gatekeeper voter {self.voter_id!r} must use class_mode 9c")
        return self

    @property
    def is_aug(self) -> bool:
        return self.aug == AugStatus.AUG


class VoterPredictions(BaseModel):
    """One voter's hard labels keyed by sample id.

    The 8c-emits-no-zero invariant is reported by ``validate_registry`` rather
    than rejected here, so that a whole pool can be diagnosed at once.
    """

    model_config = _FROZEN

    meta: VoterMeta
    entries: Dict[str, ClassLabel]

    @field_validator("entries")
    @classmethod
    def _valid_ids(cls, v: Dict[str, ClassLabel]) -> Dict[str, ClassLabel]:
        _check_sample_ids(v)
        return v

    @property
    def voter_id(self) -> str:
        return self.meta.voter_id


class Branch(BaseModel):
    """Voters sharing base model, method, class mode and aug status; one per fold."""

    model_config = _FROZEN

    branch_id: str
    role: Role
    voters: Tuple[str, ...]
    aug: AugStatus = AugStatus.AUG
    class_mode: ClassMode = ClassMode.EIGHT

    @property
    def size(self) -> int:
        return len(self.voters)


def default_threshold(G: int) -> int:
    """Smallest integer >= (G+1)/2, i.e. a strict gatekeeper majority."""
    if G <= 0:
        raise ValueError(f"gatekeeper count must be positive, got {G}")
    return (G + 2) // 2


class EnsembleConfig(BaseModel):
    """Gatekeeper/specialist voter sets plus the C0-override threshold."""

    model_config = _FROZEN

    gatekeeper_voters: Tuple[str, ...]
    specialist_voters: Tuple[str, ...] = ()
    threshold_t: int
    tie_break: ClassLabel = ClassLabel.HIGH_ADAPTIVE
    allow_9c_specialists: bool = False
    count_zero_votes: bool = False

    @model_validator(mode="before")
    @classmethod
    def _default_threshold(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("threshold_t") is None:
            gatekeepers = data.get("gatekeeper_voters") or ()
            if gatekeepers:
                data = {**data, "threshold_t": default_threshold(len(gatekeepers))}
        return data

    @model_validator(mode="after")
    def _check_sets(self) -> "EnsembleConfig":
        G = len(self.gatekeeper_voters)
        if G == 0:
            raise ValueError("at least one gatekeeper voter is required")
        if not 1 <= self.threshold_t <= G:
            raise ValueError(f"threshold_t must lie in 1..{G}, got {self.threshold_t}")
        everyone = self.gatekeeper_voters + self.specialist_voters
        if len(set(everyone)) != len(everyone):
            raise ValueError("a voter may appear only once in an ensemble")
        return self

    @property
    def G(self) -> int:
        return len(self.gatekeeper_voters)

    @property
    def voter_ids(self) -> Tuple[str, ...]:
        return self.gatekeeper_voters + self.specialist_voters

    def with_specialists(self, extra: Iterable[str]) -> "EnsembleConfig":
        """Copy of this config with ``extra`` voters appended to the specialists."""
        data = self.model_dump()
        data["specialist_voters"] = self.specialist_voters + tuple(extra)
        return EnsembleConfig(**data)

    def check_modes(self, metas: Dict[str, VoterMeta]) -> None:
        """Raise if the voters' class modes do not fit their ensemble role."""
        missing = [v for v in self.voter_ids if v not in metas]
        if missing:
            raise ValueError(f"voters missing from pool: {', '.join(missing)}")
        for voter_id in self.gatekeeper_voters:
            if metas[voter_id].class_mode != ClassMode.NINE:
                raise ValueError(f"gatekeeper voter {voter_id!r} is not 9c")
        if not self.allow_9c_specialists:
            for voter_id in self.specialist_voters:
                if metas[voter_id].class_mode != ClassMode.EIGHT:
                    raise ValueError(f"specialist voter {voter_id!r} is not 8c")


def build_branches(registry: Iterable[VoterMeta]) -> List[Branch]:
    """Group registry voters into branches, ordered by branch id then fold."""
    metas = sorted(registry, key=lambda m: (m.branch_id, m.fold, m.voter_id))
    branches: List[Branch] = []
    for branch_id, members in groupby(metas, key=lambda m: m.branch_id):
        members = list(members)
        head = members[0]
        branches.append(
            Branch(
                branch_id=branch_id,
                role=head.role,
                voters=tuple(m.voter_id for m in members),
                aug=head.aug,
                class_mode=head.class_mode,
            )
        )
    return branches


def branch_consistency_issues(members: List[VoterMeta]) -> List[str]:
    """Attributes on which a branch's voters disagree."""
    issues: List[str] = []
    for attribute in ("role", "method", "class_mode", "base_model", "aug"):
        values = {getattr(m, attribute) for m in members}
        if len(values) > 1:
            issues.append(attribute)
    return issues


def label_name(label: int) -> str:
    return ClassLabel(label).display_name
