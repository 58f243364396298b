"""Agreement bands, flip tracing and override-rate diagnostics."""

from __future__ import annotations

from collections import Counter
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, model_validator

from ..data.models import Branch, ClassLabel, EnsembleConfig, VoterPredictions
from ..voting.ensemble import PredictionMatrix, ensemble_predict, tally_matrix

logger = structlog.get_logger(__name__)

DEFAULT_BOUNDARY = frozenset({ClassLabel.OBSESSIONAL, ClassLabel.HIGH_ADAPTIVE})

Pool = Union[PredictionMatrix, Sequence[VoterPredictions]]


def _matrix(pool: Pool, samples: Optional[Sequence[str]]) -> PredictionMatrix:
    if isinstance(pool, PredictionMatrix):
        if samples is not None and list(samples) != pool.samples:
            raise ValueError("sample order differs from the prediction matrix")
        return pool
    if samples is None:
        raise ValueError("samples are required when passing raw predictions")
    return PredictionMatrix(pool, samples)


def flip_possible(band: int, base_voters: int, probe_voters: int) -> bool:
    """Whether ``probe_voters`` extra votes can overturn a base plurality of ``band``.

    The runner-up holds at most ``base_voters - band`` base votes, so it can
    only reach the leader when ``2 * band <= base_voters + probe_voters``.
    """
    return 2 * band <= base_voters + probe_voters


def _band_array(matrix: PredictionMatrix, voter_ids: Sequence[str]) -> np.ndarray:
    if not voter_ids:
        raise ValueError("agreement bands need at least one base voter")
    return tally_matrix(matrix.rows(voter_ids)).max(axis=0)


def agreement_bands(
    base_voters: Union[Sequence[VoterPredictions], PredictionMatrix],
    samples: Optional[Sequence[str]] = None,
    voter_ids: Optional[Sequence[str]] = None,
) -> Dict[int, Set[str]]:
    """Samples grouped by the largest per-label vote count among base voters.

    Every band 1..B is present, empty or not.
    """
    matrix = _matrix(base_voters, samples)
    ids = list(voter_ids) if voter_ids is not None else list(matrix.pool)
    bands = _band_array(matrix, ids)
    grouped: Dict[int, Set[str]] = {b: set() for b in range(1, len(ids) + 1)}
    for sample_id, band in zip(matrix.samples, bands):
        grouped[int(band)].add(sample_id)
    return grouped


class BandStat(BaseModel):
    model_config = ConfigDict(frozen=True)

    samples: int
    flips: int
    contestable: bool

    @model_validator(mode="after")
    def _flips_bounded(self) -> "BandStat":
        if not 0 <= self.flips <= self.samples:
            raise ValueError("flips must lie between 0 and the band's sample count")
        return self


class FlipDirection(BaseModel):
    model_config = ConfigDict(frozen=True)

    from_label: int
    to_label: int
    count: int

    def __str__(self) -> str:
        return f"C{self.from_label}→C{self.to_label}: {self.count}"


class FlipReport(BaseModel):
    """What adding a probe branch changes relative to the base ensemble."""

    model_config = ConfigDict(frozen=True)

    base_voters: int
    probe_voters: int
    n_samples: int
    bands: Dict[int, BandStat]
    flip_directions: List[FlipDirection]
    boundary_classes: List[int]
    boundary_touch_count: int
    contested_total: int
    total_flips: int
    override_rate: float

    @model_validator(mode="after")
    def _directions_sum(self) -> "FlipReport":
        if sum(d.count for d in self.flip_directions) != self.total_flips:
            raise ValueError("flip directions must sum to the total flip count")
        return self

    @property
    def boundary_fraction(self) -> float:
        return self.boundary_touch_count / self.total_flips if self.total_flips else 0.0


def flip_analysis(
    base_config: EnsembleConfig,
    full_config: EnsembleConfig,
    pool: Pool,
    probe_branch: Optional[Branch] = None,
    samples: Optional[Sequence[str]] = None,
    boundary_classes: Iterable[int] = DEFAULT_BOUNDARY,
) -> FlipReport:
    """Compare base and full ensembles sample by sample.

    ``full_config`` must hold the base voters plus the probe branch voters.
    Agreement bands use the base voters only.
    """
    matrix = _matrix(pool, samples)
    base_ids = set(base_config.voter_ids)
    probe_ids = tuple(probe_branch.voters) if probe_branch is not None else ()
    missing = [v for v in probe_ids if v not in matrix.pool]
    if missing:
        raise ValueError(f"probe voters missing from pool: {', '.join(missing)}")
    if set(full_config.voter_ids) != base_ids | set(probe_ids) or base_ids & set(probe_ids):
        raise ValueError("full configuration must equal the base voters plus the probe voters")
    if full_config.gatekeeper_voters != base_config.gatekeeper_voters:
        raise ValueError("base and full configurations must share their gatekeepers")

    base_out = ensemble_predict(base_config, matrix)
    full_out = ensemble_predict(full_config, matrix)
    B, P = len(base_config.voter_ids), len(probe_ids)
    bands = _band_array(matrix, base_config.voter_ids)
    flipped = base_out.labels != full_out.labels

    boundary: FrozenSet[int] = frozenset(int(c) for c in boundary_classes)
    stats: Dict[int, BandStat] = {}
    for band in range(1, B + 1):
        in_band = bands == band
        stats[band] = BandStat(
            samples=int(in_band.sum()),
            flips=int((flipped & in_band).sum()),
            contestable=flip_possible(band, B, P),
        )

    directions: Counter = Counter()
    touches = 0
    for j in np.flatnonzero(flipped):
        src, dst = int(base_out.labels[j]), int(full_out.labels[j])
        directions[(src, dst)] += 1
        if src in boundary or dst in boundary:
            touches += 1

    report = FlipReport(
        base_voters=B,
        probe_voters=P,
        n_samples=matrix.n_samples,
        bands=stats,
        flip_directions=[
            FlipDirection(from_label=src, to_label=dst, count=n)
            for (src, dst), n in sorted(directions.items(), key=lambda kv: (-kv[1], kv[0]))
        ],
        boundary_classes=sorted(boundary),
        boundary_touch_count=touches,
        contested_total=sum(s.samples for s in stats.values() if s.contestable),
        total_flips=int(flipped.sum()),
        override_rate=full_out.override_rate,
    )
    logger.info(
        "flip_analysis_completed",
        flips=report.total_flips,
        contested=report.contested_total,
        boundary_touch=touches,
    )
    return report


def override_rate(config: EnsembleConfig, pool: Pool, samples: Optional[Sequence[str]] = None) -> float:
    """Fraction of samples on which the C0-override fired."""
    return ensemble_predict(config, _matrix(pool, samples)).override_rate
