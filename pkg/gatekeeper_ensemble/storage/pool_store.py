"""On-disk pool format: a JSON manifest plus two-column CSV label files."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..data.models import AugStatus, Branch, ClassLabel, GoldLabels, VoterMeta, VoterPredictions, build_branches
from ..data.registry import validate_registry
from ..utils.metrics import metrics
from ..utils.validation import ConfigurationError, ParseError, PoolValidationError, parse_label
from ..voting.ensemble import PredictionMatrix, VoteTrace

logger = structlog.get_logger(__name__)

MANIFEST_VERSION = 1
LABEL_HEADER = ("sample_id", "label")
DIALOGUE_HEADER = ("sample_id", "dialogue_id")
SPLIT_HEADER = ("sample_id", "dialogue_id", "label")
ASSIGNMENT_HEADER = ("dialogue_id", "fold")
TRACE_HEADER = ("sample_id", "gatekeeper_zero_count", "override_fired", "winning_label", "tally")

PathLike = Union[str, Path]


def atomic_write(path: PathLike, data: Union[str, bytes]) -> None:
    """Write ``data`` to a sibling temp file, then replace ``path`` with it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _rows(path: Path, header: Sequence[str]):
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(f"file not found: {path}")
    except UnicodeDecodeError as e:
        raise ParseError(str(path), 1, None, "", f"not valid UTF-8 ({e.reason})")

    reader = csv.reader(io.StringIO(text))
    first = next(reader, None)
    if first is None:
        raise ParseError(str(path), 1, None, "", "empty file, expected a header")
    if tuple(c.strip() for c in first) != tuple(header):
        raise ParseError(str(path), 1, None, ",".join(first), f"header must be {','.join(header)}")
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                str(path), line, None, ",".join(row), f"expected {len(header)} columns, got {len(row)}"
            )
        yield line, [c.strip() for c in row]


def read_label_csv(path: PathLike, kind: str = "predictions") -> Dict[str, ClassLabel]:
    """Parse a ``sample_id,label`` file; errors carry file, line and column."""
    path = Path(path)
    labels: Dict[str, ClassLabel] = {}
    for line, (sample_id, value) in _rows(path, LABEL_HEADER):
        if not sample_id:
            raise ParseError(str(path), line, 1, sample_id, "empty sample id")
        if sample_id in labels:
            raise ParseError(str(path), line, 1, sample_id, "duplicate sample id")
        try:
            labels[sample_id] = ClassLabel(parse_label(value))
        except ValueError as e:
            raise ParseError(str(path), line, 2, value, str(e))
    metrics.record_file_loaded(kind)
    return labels


def read_dialogue_csv(path: PathLike) -> Dict[str, str]:
    path = Path(path)
    dialogues: Dict[str, str] = {}
    for line, (sample_id, dialogue_id) in _rows(path, DIALOGUE_HEADER):
        if not sample_id:
            raise ParseError(str(path), line, 1, sample_id, "empty sample id")
        if not dialogue_id:
            raise ParseError(str(path), line, 2, dialogue_id, "empty dialogue id")
        if sample_id in dialogues:
            raise ParseError(str(path), line, 1, sample_id, "duplicate sample id")
        dialogues[sample_id] = dialogue_id
    metrics.record_file_loaded("dialogues")
    return dialogues


def read_split_samples(path: PathLike) -> List[Tuple[str, str, int]]:
    """Parse a ``sample_id,dialogue_id,label`` file for the stratified split."""
    path = Path(path)
    seen = set()
    samples: List[Tuple[str, str, int]] = []
    for line, (sample_id, dialogue_id, value) in _rows(path, SPLIT_HEADER):
        if not sample_id:
            raise ParseError(str(path), line, 1, sample_id, "empty sample id")
        if sample_id in seen:
            raise ParseError(str(path), line, 1, sample_id, "duplicate sample id")
        if not dialogue_id:
            raise ParseError(str(path), line, 2, dialogue_id, "empty dialogue id")
        try:
            label = parse_label(value)
        except ValueError as e:
            raise ParseError(str(path), line, 3, value, str(e))
        seen.add(sample_id)
        samples.append((sample_id, dialogue_id, label))
    metrics.record_file_loaded("split_samples")
    return samples


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def label_csv_text(labels: Mapping[str, int]) -> str:
    return _csv_text(LABEL_HEADER, ((s, int(labels[s])) for s in sorted(labels)))


def write_label_csv(path: PathLike, labels: Mapping[str, int]) -> None:
    atomic_write(path, label_csv_text(labels))


def write_dialogue_csv(path: PathLike, dialogues: Mapping[str, str]) -> None:
    atomic_write(path, _csv_text(DIALOGUE_HEADER, ((s, dialogues[s]) for s in sorted(dialogues))))


def assignment_csv_text(fold_of: Mapping[str, int]) -> str:
    return _csv_text(ASSIGNMENT_HEADER, ((d, fold_of[d]) for d in sorted(fold_of)))


def trace_csv_text(traces: Sequence[VoteTrace]) -> str:
    """Per-sample traces; ``tally`` is encoded as ``label:count;...``."""
    return _csv_text(
        TRACE_HEADER,
        (
            (
                t.sample_id,
                t.gatekeeper_zero_count,
                "true" if t.override_fired else "false",
                t.winning_label,
                ";".join(f"{label}:{count}" for label, count in sorted(t.tally.items())),
            )
            for t in traces
        ),
    )


class ManifestVoter(VoterMeta):
    """A registry entry plus the location of its prediction files.

    Unlike in-memory metadata, a manifest entry must state ``aug`` and ``f1_cv``
    and may not carry unknown keys.
    """

    model_config = ConfigDict(frozen=True, use_enum_values=False, extra="forbid")

    aug: AugStatus
    f1_cv: float = Field(..., ge=0.0, le=1.0)
    path: str = Field(..., min_length=1)
    cv_path: Optional[str] = None

    def meta(self) -> VoterMeta:
        return VoterMeta(**self.model_dump(exclude={"path", "cv_path"}))


class PoolManifest(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    version: int
    voters: List[ManifestVoter]
    gold: Optional[str] = None
    dialogues: Optional[str] = None
    cv_gold: Optional[str] = None

    @field_validator("version")
    @classmethod
    def _known_version(cls, v: int) -> int:
        if v != MANIFEST_VERSION:
            raise ValueError(f"unsupported manifest version {v}, expected {MANIFEST_VERSION}")
        return v

    @field_validator("voters")
    @classmethod
    def _non_empty(cls, v: List[ManifestVoter]) -> List[ManifestVoter]:
        if not v:
            raise ValueError("empty pool")
        return v


@dataclass
class LoadedPool:
    """A validated pool; registry and predictions are ordered by voter id."""

    path: Path
    registry: List[VoterMeta]
    predictions: List[VoterPredictions]
    gold: Optional[GoldLabels] = None
    dialogues: Optional[Dict[str, str]] = None
    cv_predictions: Dict[str, Dict[str, ClassLabel]] = field(default_factory=dict)
    cv_gold: Optional[Dict[str, ClassLabel]] = None
    _matrix: Optional[PredictionMatrix] = field(default=None, repr=False)

    def metas(self) -> Dict[str, VoterMeta]:
        return {m.voter_id: m for m in self.registry}

    def branches(self) -> List[Branch]:
        return build_branches(self.registry)

    def branch_voters(self, branch_id: str) -> List[VoterMeta]:
        members = [m for m in self.registry if m.branch_id == branch_id]
        if not members:
            raise ConfigurationError(f"unknown branch {branch_id!r}")
        return sorted(members, key=lambda m: m.fold)

    def prediction(self, voter_id: str) -> VoterPredictions:
        for p in self.predictions:
            if p.voter_id == voter_id:
                return p
        raise ConfigurationError(f"unknown voter {voter_id!r}")

    def samples(self) -> List[str]:
        if self.gold is not None:
            return self.gold.sample_ids()
        return sorted(self.predictions[0].entries)

    def matrix(self) -> PredictionMatrix:
        if self._matrix is None:
            self._matrix = PredictionMatrix(self.predictions, self.samples())
        return self._matrix

    def require_gold(self) -> GoldLabels:
        if self.gold is None:
            raise ConfigurationError(f"{self.path}: manifest has no gold labels")
        return self.gold


def read_manifest(path: PathLike) -> PoolManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(f"manifest not found: {path}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(str(path), e.lineno, e.colno, "", f"invalid JSON ({e.msg})")
    try:
        manifest = PoolManifest.model_validate(data)
    except ValidationError as e:
        problems = []
        for error in e.errors():
            where = ".".join(str(p) for p in error["loc"])
            problems.append(f"{where}: {error['msg']}" if where else error["msg"])
        raise ConfigurationError(f"{path}: {'; '.join(problems)}")
    metrics.record_file_loaded("manifest")
    return manifest


def load_pool(path: PathLike, validate: bool = True) -> LoadedPool:
    """Read a manifest and every file it references.

    Raises ``PoolValidationError`` listing every registry violation.
    """
    path = Path(path)
    manifest = read_manifest(path)
    base = path.parent

    def resolve(rel: str) -> Path:
        return (base / rel).resolve() if not Path(rel).is_absolute() else Path(rel)

    registry: List[VoterMeta] = []
    predictions: List[VoterPredictions] = []
    cv_predictions: Dict[str, Dict[str, ClassLabel]] = {}
    for entry in manifest.voters:
        meta = entry.meta()
        registry.append(meta)
        predictions.append(VoterPredictions(meta=meta, entries=read_label_csv(resolve(entry.path))))
        if entry.cv_path:
            cv_predictions[meta.voter_id] = read_label_csv(resolve(entry.cv_path), kind="cv_predictions")

    gold = None
    if manifest.gold:
        entries = read_label_csv(resolve(manifest.gold), kind="gold")
        if not entries:
            raise ConfigurationError(f"{manifest.gold}: gold file has no rows")
        gold = GoldLabels(entries=entries)
    dialogues = read_dialogue_csv(resolve(manifest.dialogues)) if manifest.dialogues else None
    cv_gold = read_label_csv(resolve(manifest.cv_gold), kind="gold") if manifest.cv_gold else None

    registry.sort(key=lambda m: m.voter_id)
    predictions.sort(key=lambda p: p.voter_id)

    if validate:
        reference = gold
        if reference is None:
            # coverage is then checked against the first voter's samples
            reference = GoldLabels(
                entries={s: ClassLabel.NO_DEFENCE for s in predictions[0].entries}
            )
        violations = validate_registry(registry, predictions, reference)
        if violations:
            logger.error("pool_validation_failed", path=str(path), violations=len(violations))
            raise PoolValidationError(violations)

    logger.info(
        "pool_loaded",
        path=str(path),
        voters=len(registry),
        samples=gold.size if gold is not None else None,
    )
    return LoadedPool(
        path=path,
        registry=registry,
        predictions=predictions,
        gold=gold,
        dialogues=dialogues,
        cv_predictions=cv_predictions,
        cv_gold=cv_gold,
    )


def write_pool(
    gold: GoldLabels,
    predictions: Sequence[VoterPredictions],
    out_dir: PathLike,
    dialogues: Optional[Mapping[str, str]] = None,
) -> Path:
    """Write gold, predictions, optional dialogue map and the manifest; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_label_csv(out / "gold.csv", gold.entries)
    manifest: Dict[str, object] = {"version": MANIFEST_VERSION, "gold": "gold.csv"}
    if dialogues is not None:
        write_dialogue_csv(out / "dialogues.csv", dialogues)
        manifest["dialogues"] = "dialogues.csv"

    voters = []
    for pred in sorted(predictions, key=lambda p: p.voter_id):
        rel = f"predictions/{pred.voter_id}.csv"
        write_label_csv(out / rel, pred.entries)
        voters.append({**pred.meta.model_dump(mode="json"), "path": rel})
    manifest["voters"] = voters

    manifest_path = out / "manifest.json"
    atomic_write(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    logger.info("pool_written", path=str(manifest_path), voters=len(voters))
    return manifest_path
