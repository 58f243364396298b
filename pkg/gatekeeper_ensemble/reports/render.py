"""Report emission: aligned text tables or canonical JSON."""

from __future__ import annotations

import json
from functools import singledispatch
from typing import List, Literal, Optional, Sequence, Type, TypeVar

from pydantic import BaseModel

from ..analysis.flips import FlipReport
from ..data.models import N_CLASSES, label_name
from ..evaluation.classification import EvalReport
from ..search.engine import SearchResult, format_configuration
from ..selection.split import SplitReport
from .schemas import (
    AgreementReport,
    BudgetReport,
    CorrelationReport,
    FoldSelectionReport,
    SimulationReport,
    VoteReport,
)

ReportFormat = Literal["table", "structured"]
M = TypeVar("M", bound=BaseModel)

TOP_DIRECTIONS = 10


def _num(value: Optional[float], precision: int) -> str:
    return "n/a" if value is None else f"{value:.{precision}f}"


def _table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> List[str]:
    """Columns padded to their widest cell; text left-aligned, numbers right-aligned."""
    cells = [[str(c) for c in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    numeric = [
        all(isinstance(row[i], (int, float)) or _looks_numeric(str(row[i])) for row in rows) if rows else False
        for i in range(len(headers))
    ]
    lines = []
    for r in cells:
        parts = [c.rjust(w) if num else c.ljust(w) for c, w, num in zip(r, widths, numeric)]
        lines.append("  ".join(parts).rstrip())
    return lines


def _looks_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return text == "n/a"
    return True


@singledispatch
def render_table(report: BaseModel, precision: int = 3) -> str:
    raise TypeError(f"no table layout for {type(report).__name__}")


@render_table.register(EvalReport)
def _(report: EvalReport, precision: int = 3) -> str:
    rows = []
    for c in range(N_CLASSES):
        s = report.per_class[c]
        rows.append(
            (c, label_name(c), _num(s.f1, precision), _num(s.precision, precision), _num(s.recall, precision), s.support)
        )
    lines = _table(("ID", "Level", "F1", "P", "R", "n"), rows)
    subset = ",".join(str(c) for c in report.class_subset)
    lines.append("")
    lines.append(f"macro-F1 over classes {subset}: {_num(report.macro_f1, precision)}")
    if report.skipped_absent:
        lines.append("skipped absent classes: " + ",".join(str(c) for c in report.skipped_absent))
    lines.append(f"samples: {report.n_samples}")
    lines.append("")
    lines.append(f"confusion ({report.confusion.normalization}), rows gold, columns predicted:")
    matrix_rows = []
    for gold, row in enumerate(report.confusion.values):
        if report.confusion.normalization == "none":
            matrix_rows.append([gold] + [int(v) for v in row])
        else:
            matrix_rows.append([gold] + [_num(v, precision) for v in row])
    lines.extend(_table(["gold"] + [str(c) for c in range(N_CLASSES)], matrix_rows))
    return "\n".join(lines) + "\n"


@render_table.register(VoteReport)
def _(report: VoteReport, precision: int = 3) -> str:
    config = report.config
    lines = [
        f"gatekeepers: {', '.join(config.gatekeeper_voters)}",
        f"specialists: {', '.join(config.specialist_voters) or '-'}",
        f"threshold t: {config.threshold_t} of {config.G}",
        f"samples: {report.n_samples}",
        f"override rate: {_num(report.override_rate, precision)}",
    ]
    if report.macro_f1 is not None:
        lines.append(f"macro-F1 (1-8): {_num(report.macro_f1, precision)}")
    if report.system_alpha is not None:
        lines.append(f"system alpha: {_num(report.system_alpha, precision)}")
    lines.append("")
    rows = [(c, label_name(c), report.label_counts.get(c, 0)) for c in range(N_CLASSES)]
    lines.extend(_table(("ID", "Level", "predicted"), rows))
    return "\n".join(lines) + "\n"


@render_table.register(AgreementReport)
def _(report: AgreementReport, precision: int = 3) -> str:
    d = report.decomposition
    lines = [f"system alpha: {_num(d.system, precision)}"]
    if report.mean_pairwise is not None:
        lines.append(f"mean pairwise alpha: {_num(report.mean_pairwise, precision)}")
    lines.append("")
    lines.extend(_table(("branch", "within alpha"), [(b, _num(a, precision)) for b, a in sorted(d.within.items())]))
    lines.append("")
    lines.extend(_table(("pair", "cross alpha"), [(f"{p.first} x {p.second}", _num(p.alpha, precision)) for p in d.cross]))
    if d.minimum_cross is not None:
        m = d.minimum_cross
        lines.append("")
        lines.append(f"most diverse pair: {m.first} x {m.second} ({_num(m.alpha, precision)})")
    if d.skipped:
        lines.append("skipped (fewer than two voters): " + ", ".join(d.skipped))
    return "\n".join(lines) + "\n"


@render_table.register(CorrelationReport)
def _(report: CorrelationReport, precision: int = 3) -> str:
    lines = [
        f"reference: {report.reference} ({', '.join(_num(v, precision) for v in report.reference_profile)})",
        "",
    ]
    rows = [
        (rank, s.name, _num(s.r, precision), "constant profile" if s.degenerate else "")
        for rank, s in enumerate(report.ranking, 1)
    ]
    lines.extend(_table(("rank", "candidate", "r", "note"), rows))
    return "\n".join(lines) + "\n"


@render_table.register(FoldSelectionReport)
def _(report: FoldSelectionReport, precision: int = 3) -> str:
    rows = [
        (
            b.branch_id,
            b.k,
            ",".join(str(f) for f in b.selected_folds),
            ",".join(str(f) for f in b.dropped_folds) or "-",
            " ".join(f"{f}:{_num(v, precision)}" for f, v in sorted(b.f1_cv.items())),
        )
        for b in report.branches
    ]
    lines = _table(("branch", "k", "selected", "dropped", "f1_cv by fold"), rows)
    checks = [c for b in report.branches for c in b.checks]
    if checks:
        lines.append("")
        lines.extend(
            _table(
                ("voter", "recorded", "recomputed", "status"),
                [
                    (c.voter_id, _num(c.recorded, precision), _num(c.recomputed, precision),
                     "ok" if c.consistent else "MISMATCH")
                    for c in checks
                ],
            )
        )
    return "\n".join(lines) + "\n"


@render_table.register(BudgetReport)
def _(report: BudgetReport, precision: int = 3) -> str:
    b = report.budget
    headers = ["ID", "Level", "Orig.", "budget", "+Aug"]
    if report.weights is not None:
        headers.append("weight")
    rows = []
    for c, cb in sorted(b.per_class.items()):
        row = [c, label_name(c), cb.orig_count, cb.budget, cb.augmented]
        if report.weights is not None:
            row.append(_num(report.weights.get(c), precision))
        rows.append(row)
    lines = _table(headers, rows)
    lines.append("")
    lines.append(f"total synthetic: {b.total} (target {b.target}, cap {b.cap_multiplier}x, "
                 f"excluded {','.join(str(c) for c in b.excluded) or '-'})")
    return "\n".join(lines) + "\n"


@render_table.register(SplitReport)
def _(report: SplitReport, precision: int = 3) -> str:
    rows = [
        [f, report.dialogues_per_fold[f], report.samples_per_fold[f]] + report.histograms[f]
        for f in range(report.K)
    ]
    rows.append(["all", sum(report.dialogues_per_fold), sum(report.samples_per_fold)] + report.global_histogram)
    lines = _table(["fold", "dialogues", "samples"] + [f"C{c}" for c in range(N_CLASSES)], rows)
    lines.append("")
    lines.append(f"K={report.K} seed={report.seed} max class-proportion deviation: "
                 f"{_num(report.max_deviation, precision)}")
    return "\n".join(lines) + "\n"


@render_table.register(SearchResult)
def _(report: SearchResult, precision: int = 3) -> str:
    lines: List[str] = []
    for size in sorted(report.top):
        lines.append(f"{size}V ({report.n_scored[size]} configurations)")
        rows = [
            (rank, _num(row.f1, precision), row.threshold_t, format_configuration(row))
            for rank, row in enumerate(report.top[size], 1)
        ]
        lines.extend(_table(("rank", "F1", "t", "configuration"), rows))
        mix = report.aug_mix.get(size)
        if mix is not None:
            lines.append(
                f"mean F1 mixed {_num(mix.mixed_mean, precision)} ({mix.mixed_count}), "
                f"pure aug {_num(mix.pure_aug_mean, precision)} ({mix.pure_aug_count}), "
                f"pure no-aug {_num(mix.pure_no_aug_mean, precision)} ({mix.pure_no_aug_count})"
            )
        lines.append("")
    return "\n".join(lines)


@render_table.register(FlipReport)
def _(report: FlipReport, precision: int = 3) -> str:
    B = report.base_voters
    rows = [
        (f"{band}/{B}", stat.samples, stat.flips, "yes" if stat.contestable else "no")
        for band, stat in sorted(report.bands.items(), reverse=True)
    ]
    lines = _table(("band", "samples", "flips", "contestable"), rows)
    lines.append("")
    lines.append(f"contested samples: {report.contested_total}")
    lines.append(f"flips: {report.total_flips}")
    boundary = ",".join(f"C{c}" for c in report.boundary_classes)
    lines.append(
        f"touching {boundary}: {report.boundary_touch_count} ({_num(report.boundary_fraction * 100, 1)}%)"
    )
    lines.append(f"override rate: {_num(report.override_rate, precision)}")
    if report.flip_directions:
        lines.append("")
        lines.append("top flip directions:")
        lines.extend(f"  {d}" for d in report.flip_directions[:TOP_DIRECTIONS])
    return "\n".join(lines) + "\n"


@render_table.register(SimulationReport)
def _(report: SimulationReport, precision: int = 3) -> str:
    lines = [
        f"manifest: {report.manifest}",
        f"samples: {report.n_samples}  voters: {report.voters}  rho: {report.rho}  seed: {report.seed}",
        "",
    ]
    lines.extend(_table(("ID", "Level", "gold n"), [(c, label_name(c), report.gold_counts.get(c, 0)) for c in range(N_CLASSES)]))
    lines.append("")
    lines.extend(_table(("voter", "macro-F1 (1-8)"), [(v, _num(f, precision)) for v, f in sorted(report.voter_macro_f1.items())]))
    return "\n".join(lines) + "\n"


def structured(report: BaseModel) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def emit_report(report: BaseModel, format: ReportFormat = "table", precision: int = 3) -> bytes:
    """Serialise a report; the structured form round-trips through ``parse_report``."""
    if format == "structured":
        return structured(report).encode("utf-8")
    if format == "table":
        return render_table(report, precision).encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")


def parse_report(data: bytes, model: Type[M]) -> M:
    return model.model_validate_json(data)

