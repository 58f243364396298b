"""Report models for commands whose results are not already a domain model."""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict

from ..data.models import EnsembleConfig
from ..evaluation.agreement import AlphaDecomposition
from ..selection.budget import AugmentationBudget
from ..selection.folds import F1CvCheck, RankedSpecialist


class VoteReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: EnsembleConfig
    n_samples: int
    override_rate: float
    label_counts: Dict[int, int]
    macro_f1: Optional[float] = None
    system_alpha: Optional[float] = None


class AgreementReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    decomposition: AlphaDecomposition
    mean_pairwise: Optional[float] = None


class CorrelationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    reference: str
    reference_profile: List[float]
    ranking: List[RankedSpecialist]


class BranchSelection(BaseModel):
    model_config = ConfigDict(frozen=True)

    branch_id: str
    k: int
    selected_folds: List[int]
    dropped_folds: List[int]
    f1_cv: Dict[int, float]
    checks: List[F1CvCheck] = []


class FoldSelectionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    branches: List[BranchSelection]


class BudgetReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    budget: AugmentationBudget
    weights: Optional[Dict[int, float]] = None


class SimulationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    manifest: str
    n_samples: int
    voters: int
    rho: float
    seed: int
    gold_counts: Dict[int, int]
    voter_macro_f1: Dict[str, float]
