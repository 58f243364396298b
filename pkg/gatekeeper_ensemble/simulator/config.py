"""Simulation settings: class priors, voter confusion matrices and file loading."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, List, Mapping, Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..data.models import N_CLASSES, ClassMode, VoterMeta
from ..utils.validation import ConfigurationError

logger = structlog.get_logger(__name__)

STOCHASTIC_TOLERANCE = 1e-9

Matrix = Tuple[Tuple[float, ...], ...]


def prior_from_counts(counts: Union[Mapping[int, int], List[int], Tuple[int, ...]]) -> Tuple[float, ...]:
    """Class counts normalised into a probability vector over 0..8."""
    if isinstance(counts, Mapping):
        vector = np.zeros(N_CLASSES, dtype=np.float64)
        for label, n in counts.items():
            label = int(label)
            if not 0 <= label < N_CLASSES:
                raise ValueError(f"class {label} outside 0..{N_CLASSES - 1}")
            vector[label] = n
    else:
        if len(counts) != N_CLASSES:
            raise ValueError(f"expected {N_CLASSES} class counts, got {len(counts)}")
        vector = np.asarray(counts, dtype=np.float64)
    if (vector < 0).any():
        raise ValueError("class counts must be non-negative")
    total = vector.sum()
    if total == 0:
        raise ValueError("class counts must not all be zero")
    return tuple(float(p) for p in vector / total)


def uniform_confusion(accuracy: float, class_mode: Union[ClassMode, str] = ClassMode.NINE) -> Matrix:
    """Row-stochastic confusion with ``accuracy`` on the diagonal.

    The remaining mass is spread evenly over the other admissible labels. An
    8c voter never predicts 0, so its gold-0 row is uniform over 1..8.
    """
    if not 0.0 <= accuracy <= 1.0:
        raise ValueError(f"accuracy must lie in [0, 1], got {accuracy}")
    mode = ClassMode(class_mode)
    rows = np.zeros((N_CLASSES, N_CLASSES), dtype=np.float64)
    admissible = list(range(N_CLASSES)) if mode == ClassMode.NINE else list(range(1, N_CLASSES))
    for gold in range(N_CLASSES):
        if gold not in admissible:
            rows[gold, admissible] = 1.0 / len(admissible)
            continue
        others = [c for c in admissible if c != gold]
        rows[gold, others] = (1.0 - accuracy) / len(others)
        rows[gold, gold] = accuracy
    return tuple(tuple(float(p) for p in row) for row in rows)


class SimVoter(BaseModel):
    """A synthetic voter: registry metadata plus its confusion rows."""

    model_config = ConfigDict(frozen=True)

    meta: VoterMeta
    confusion: Matrix
    # when set, f1_cv is re-measured on the simulated gold
    recompute_f1_cv: bool = True

    @field_validator("confusion")
    @classmethod
    def _row_stochastic(cls, v: Matrix) -> Matrix:
        rows = np.asarray(v, dtype=np.float64)
        if rows.shape != (N_CLASSES, N_CLASSES):
            raise ValueError(f"confusion must be {N_CLASSES}x{N_CLASSES}, got {rows.shape}")
        if (rows < 0).any():
            raise ValueError("confusion entries must be non-negative")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > STOCHASTIC_TOLERANCE)
        if len(bad):
            raise ValueError(f"confusion row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1")
        return v

    @model_validator(mode="after")
    def _eight_class_never_zero(self) -> "SimVoter":
        if self.meta.class_mode == ClassMode.EIGHT and any(row[0] > 0 for row in self.confusion):
            raise ValueError(f"8c voter {self.meta.voter_id!r} puts mass on label 0")
        return self

    @property
    def voter_id(self) -> str:
        return self.meta.voter_id

    def cumulative(self) -> np.ndarray:
        return np.cumsum(np.asarray(self.confusion, dtype=np.float64), axis=1)


class SimConfig(BaseModel):
    """Everything needed to generate one synthetic gold set and voter pool."""

    model_config = ConfigDict(frozen=True)

    n_samples: int = Field(..., gt=0)
    class_prior: Tuple[float, ...]
    voters: Tuple[SimVoter, ...]
    rho: float = Field(0.0, ge=0.0, le=1.0)
    seed: int = Field(0, ge=0, lt=2**64)
    dialogue_size: Optional[int] = Field(None, gt=0)

    @field_validator("class_prior")
    @classmethod
    def _probability_vector(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(v) != N_CLASSES:
            raise ValueError(f"class prior must have {N_CLASSES} entries, got {len(v)}")
        if any(p < 0 for p in v):
            raise ValueError("class prior entries must be non-negative")
        if abs(sum(v) - 1.0) > STOCHASTIC_TOLERANCE:
            raise ValueError(f"class prior sums to {sum(v)!r}, not 1")
        return v

    @model_validator(mode="after")
    def _unique_voters(self) -> "SimConfig":
        if not self.voters:
            raise ValueError("simulation needs at least one voter")
        ids = [v.voter_id for v in self.voters]
        if len(set(ids)) != len(ids):
            raise ValueError("simulated voter ids must be unique")
        return self

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SimConfig":
        """Build a config from its JSON form.

        Each voter takes either ``accuracy`` or an explicit ``confusion``; the
        prior comes from ``class_prior`` or ``class_counts``.
        """
        data = dict(data)
        if "class_counts" in data:
            if "class_prior" in data:
                raise ValueError("give either class_counts or class_prior, not both")
            counts = data.pop("class_counts")
            if isinstance(counts, Mapping):
                counts = {int(k): v for k, v in counts.items()}
            data["class_prior"] = prior_from_counts(counts)

        voters = []
        for raw in data.pop("voters", []):
            raw = dict(raw)
            accuracy = raw.pop("accuracy", None)
            confusion = raw.pop("confusion", None)
            if (accuracy is None) == (confusion is None):
                raise ValueError(
                    f"voter {raw.get('voter_id')!r} needs exactly one of accuracy or confusion"
                )
            given_f1 = "f1_cv" in raw
            meta = VoterMeta(**raw)
            if confusion is None:
                confusion = uniform_confusion(float(accuracy), meta.class_mode)
            voters.append(
                SimVoter(meta=meta, confusion=tuple(map(tuple, confusion)), recompute_f1_cv=not given_f1)
            )
        return cls(voters=tuple(voters), **data)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SimConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigurationError(f"simulation config not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}:{e.lineno}:{e.colno}: invalid JSON ({e.msg})")
        try:
            config = cls.from_dict(data)
        except ValueError as e:
            raise ConfigurationError(f"{path}: {e}")
        logger.info("simulation_config_loaded", path=str(path), voters=len(config.voters))
        return config


def voters_with_accuracy(
    n_voters: int,
    accuracy: float,
    class_mode: ClassMode = ClassMode.NINE,
    branch_size: int = 3,
    base_model: str = "sim",
) -> Tuple[SimVoter, ...]:
    """Identical-accuracy voters grouped into branches of ``branch_size`` folds.

    With 9c voters the first branch is the gatekeeper branch; the rest are
    specialists.
    """
    confusion = uniform_confusion(accuracy, class_mode)
    voters: List[SimVoter] = []
    for i in range(n_voters):
        branch = i // branch_size
        role = "gatekeeper" if branch == 0 and ClassMode(class_mode) == ClassMode.NINE else "specialist"
        meta = VoterMeta(
            voter_id=f"v{i:02d}",
            branch_id=f"b{branch:02d}",
            role=role,
            method="LR",
            class_mode=class_mode,
            base_model=base_model,
            fold=i % branch_size,
        )
        voters.append(SimVoter(meta=meta, confusion=confusion))
    return tuple(voters)
