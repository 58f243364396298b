"""Command-line interface for the gatekeeper ensemble toolkit."""

import argparse
import sys
from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple

import structlog

from .analysis.flips import flip_analysis
from .data.models import Branch, ClassMode, EnsembleConfig, GoldLabels, Role, VoterMeta
from .evaluation.agreement import mean_pairwise_alpha, pairwise_alpha_decomposition, system_alpha
from .evaluation.classification import evaluate, macro_f1
from .reports.render import emit_report
from .reports.schemas import (
    AgreementReport,
    BranchSelection,
    BudgetReport,
    CorrelationReport,
    FoldSelectionReport,
    SimulationReport,
    VoteReport,
)
from .search.engine import search_top
from .search.space import SearchSpace
from .selection.budget import augmentation_budget, inverse_freq_weights
from .selection.folds import fold_profile, rank_specialists, recompute_f1_cv, top_k_folds
from .selection.split import split_report, stratified_kfold
from .simulator.config import SimConfig
from .simulator.engine import simulate
from .storage.pool_store import (
    LoadedPool,
    assignment_csv_text,
    atomic_write,
    label_csv_text,
    load_pool,
    read_label_csv,
    read_split_samples,
    trace_csv_text,
    write_pool,
)
from .utils.config_manager import AppConfig, config_manager
from .utils.logging import setup_logging
from .utils.metrics import get_metrics
from .utils.validation import (
    ConfigurationError,
    EnsembleError,
    parse_branch_specs,
    parse_class_set,
    parse_counts,
    parse_int_list,
    parse_label,
    parse_role_overrides,
)
from .voting.ensemble import ensemble_predict

logger = structlog.get_logger(__name__)

BranchSpec = Tuple[str, Optional[List[int]]]


def _write_report(report, args, path: Optional[str], precision: int) -> None:
    data = emit_report(report, args.format, precision)
    if path:
        atomic_write(path, data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _load(args) -> LoadedPool:
    if not args.manifest:
        raise ConfigurationError("no manifest given (use --manifest or ENSEMBLE_MANIFEST)")
    return load_pool(args.manifest)


def _branch_members(pool: LoadedPool, spec: BranchSpec, top_k: Optional[int]) -> List[VoterMeta]:
    branch_id, folds = spec
    members = pool.branch_voters(branch_id)
    if folds is not None:
        by_fold = {m.fold: m for m in members}
        missing = [f for f in folds if f not in by_fold]
        if missing:
            raise ConfigurationError(
                f"branch {branch_id!r} has no fold(s) {', '.join(str(f) for f in missing)}"
            )
        return [by_fold[f] for f in sorted(folds)]
    if top_k is not None:
        return sorted(top_k_folds(members, min(top_k, len(members))).selected, key=lambda m: m.fold)
    return members


def _voters(pool: LoadedPool, specs: Sequence[BranchSpec], top_k: Optional[int]) -> List[VoterMeta]:
    voters: List[VoterMeta] = []
    for spec in specs:
        voters.extend(_branch_members(pool, spec, top_k))
    return voters


def _ensemble_config(
    pool: LoadedPool,
    args,
    cfg: AppConfig,
    gatekeeper_specs: Sequence[BranchSpec],
    specialist_specs: Sequence[BranchSpec],
) -> EnsembleConfig:
    gatekeepers = _voters(pool, gatekeeper_specs, args.top_k)
    specialists = _voters(pool, specialist_specs, args.top_k)
    tie_break = parse_label(args.tie_break) if args.tie_break is not None else cfg.voting.tie_break
    return EnsembleConfig(
        gatekeeper_voters=tuple(m.voter_id for m in gatekeepers),
        specialist_voters=tuple(m.voter_id for m in specialists),
        threshold_t=args.threshold,
        tie_break=tie_break,
        allow_9c_specialists=any(m.class_mode == ClassMode.NINE for m in specialists),
        count_zero_votes=args.count_zero_votes or cfg.voting.count_zero_votes,
    )


def cmd_vote(args, cfg: AppConfig) -> int:
    pool = _load(args)
    config = _ensemble_config(
        pool, args, cfg, parse_branch_specs(args.gatekeepers), parse_branch_specs(args.specialists or [])
    )
    output = ensemble_predict(config, pool.matrix(), trace=bool(args.trace))
    predictions = output.predictions

    if args.out:
        atomic_write(args.out, label_csv_text(predictions))
    if args.trace:
        atomic_write(args.trace, trace_csv_text(output.traces))

    report = VoteReport(
        config=config,
        n_samples=len(output.samples),
        override_rate=output.override_rate,
        label_counts=dict(sorted(Counter(int(v) for v in predictions.values()).items())),
        macro_f1=macro_f1(predictions, pool.gold) if pool.gold is not None else None,
        system_alpha=system_alpha(config, pool.prediction) if len(config.voter_ids) >= 2 else None,
    )
    _write_report(report, args, args.report, cfg.precision)
    return 0


def cmd_eval(args, cfg: AppConfig) -> int:
    pred = read_label_csv(args.pred)
    gold = GoldLabels(entries=read_label_csv(args.gold, kind="gold"))
    report = evaluate(
        pred,
        gold,
        class_subset=parse_class_set(args.classes),
        skip_absent=args.skip_absent,
        normalize=args.normalize,
    )
    _write_report(report, args, args.out, cfg.precision)
    return 0


def cmd_agreement(args, cfg: AppConfig) -> int:
    pool = _load(args)
    specs = parse_branch_specs(args.branches) if args.branches else [(b.branch_id, None) for b in pool.branches()]
    grouped: Dict[str, list] = {}
    for spec in specs:
        members = _branch_members(pool, spec, args.top_k)
        grouped[spec[0]] = [pool.prediction(m.voter_id) for m in members]
    decomposition = pairwise_alpha_decomposition(grouped)
    everyone = [p for members in grouped.values() for p in members]
    report = AgreementReport(
        decomposition=decomposition,
        mean_pairwise=mean_pairwise_alpha(everyone) if len(everyone) >= 2 else None,
    )
    _write_report(report, args, args.out, cfg.precision)
    return 0


def cmd_correlate(args, cfg: AppConfig) -> int:
    pool = _load(args)
    reference = fold_profile(pool.branch_voters(args.reference))
    names = (
        [b for b, _ in parse_branch_specs(args.candidates)]
        if args.candidates
        else [b.branch_id for b in pool.branches() if b.branch_id != args.reference]
    )
    candidates = [(name, fold_profile(pool.branch_voters(name))) for name in names]
    report = CorrelationReport(
        reference=args.reference,
        reference_profile=list(reference.values),
        ranking=rank_specialists(candidates, reference),
    )
    _write_report(report, args, args.out, cfg.precision)
    return 0


def cmd_select_folds(args, cfg: AppConfig) -> int:
    pool = _load(args)
    k = args.top_k if args.top_k is not None else cfg.top_k
    branch_ids = args.branch or [b.branch_id for b in pool.branches()]
    if args.recompute_cv and pool.cv_gold is None:
        raise ConfigurationError("--recompute-cv needs cv_gold in the manifest")

    rows = []
    for branch_id in branch_ids:
        members = pool.branch_voters(branch_id)
        selection = top_k_folds(members, k)
        checks = []
        if args.recompute_cv:
            for m in members:
                if m.voter_id not in pool.cv_predictions:
                    raise ConfigurationError(f"voter {m.voter_id!r} has no cv_path in the manifest")
                checks.append(recompute_f1_cv(m, pool.cv_predictions[m.voter_id], pool.cv_gold))
        rows.append(
            BranchSelection(
                branch_id=branch_id,
                k=k,
                selected_folds=list(selection.selected_folds),
                dropped_folds=list(selection.dropped_folds),
                f1_cv={m.fold: m.f1_cv for m in members},
                checks=checks,
            )
        )
    report = FoldSelectionReport(branches=rows)
    _write_report(report, args, args.out, cfg.precision)
    if any(not c.consistent for row in rows for c in row.checks):
        return 1
    return 0


def cmd_budget(args, cfg: AppConfig) -> int:
    if args.counts:
        counts = parse_counts(args.counts)
    elif args.manifest:
        counts = _load(args).require_gold().counts()
    else:
        raise ConfigurationError("give --counts or a manifest with gold labels")
    excluded = parse_class_set(args.exclude) if args.exclude is not None else cfg.budget.excluded
    budget = augmentation_budget(
        counts,
        target=args.target if args.target is not None else cfg.budget.target,
        cap=args.cap if args.cap is not None else cfg.budget.cap,
        excluded=excluded,
    )
    weights = inverse_freq_weights(counts) if args.weights else None
    _write_report(BudgetReport(budget=budget, weights=weights), args, args.out, cfg.precision)
    return 0


def cmd_split(args, cfg: AppConfig) -> int:
    if args.samples:
        samples = read_split_samples(args.samples)
    else:
        pool = _load(args)
        gold = pool.require_gold()
        if pool.dialogues is None:
            raise ConfigurationError(f"{pool.path}: manifest has no dialogue map")
        missing = [s for s in gold.sample_ids() if s not in pool.dialogues]
        if missing:
            raise ConfigurationError(f"{len(missing)} gold sample(s) lack a dialogue id, first {missing[0]!r}")
        samples = [(s, pool.dialogues[s], int(gold.entries[s])) for s in gold.sample_ids()]
    k = args.k if args.k is not None else cfg.split.k
    seed = args.seed if args.seed is not None else cfg.split.seed
    assignment = stratified_kfold(samples, K=k, seed=seed)
    if args.out:
        atomic_write(args.out, assignment_csv_text(assignment.fold_of))
    _write_report(split_report(assignment, samples, seed=seed), args, args.report, cfg.precision)
    return 0


def cmd_search(args, cfg: AppConfig) -> int:
    pool = _load(args)
    gold = pool.require_gold()
    space = SearchSpace.from_registry(
        pool.registry,
        folds_per_branch=args.folds_per_branch or cfg.search.folds_per_branch,
        sizes=parse_int_list(args.sizes) if args.sizes else cfg.search.ensemble_sizes,
        thresholds=parse_int_list(args.thresholds) if args.thresholds else cfg.search.thresholds,
        role_overrides=parse_role_overrides(args.role_override or []),
        tie_break=cfg.voting.tie_break,
        count_zero_votes=cfg.voting.count_zero_votes,
    )
    result = search_top(
        space,
        pool.matrix(),
        gold,
        top_n=args.top_n or cfg.search.top_n,
        class_subset=parse_class_set(args.classes),
        workers=args.workers or cfg.search.workers,
    )
    _write_report(result, args, args.out, cfg.precision)
    return 0


def _split_base(
    pool: LoadedPool, specs: Sequence[BranchSpec]
) -> Tuple[List[BranchSpec], List[BranchSpec]]:
    """Sort ``--base`` branches into gatekeeper and specialist specs by their registry role."""
    gatekeepers: List[BranchSpec] = []
    specialists: List[BranchSpec] = []
    for spec in specs:
        role = pool.branch_voters(spec[0])[0].role
        (gatekeepers if role == Role.GATEKEEPER else specialists).append(spec)
    return gatekeepers, specialists


def cmd_flips(args, cfg: AppConfig) -> int:
    pool = _load(args)
    if args.base and (args.gatekeepers or args.specialists):
        raise ConfigurationError("--base cannot be combined with --gatekeepers/--specialists")
    if args.base:
        gatekeeper_specs, specialist_specs = _split_base(pool, parse_branch_specs(args.base))
    elif args.gatekeepers:
        gatekeeper_specs = parse_branch_specs(args.gatekeepers)
        specialist_specs = parse_branch_specs(args.specialists or [])
    else:
        raise ConfigurationError("flips needs a base ensemble (--base or --gatekeepers)")
    if not gatekeeper_specs:
        raise ConfigurationError("the base ensemble has no gatekeeper branch")
    base = _ensemble_config(pool, args, cfg, gatekeeper_specs, specialist_specs)
    probe_specs = parse_branch_specs([args.probe])
    if len(probe_specs) != 1:
        raise ConfigurationError("--probe takes exactly one branch")
    probe_members = _branch_members(pool, probe_specs[0], args.top_k)
    head = probe_members[0]
    probe = Branch(
        branch_id=head.branch_id,
        role=Role.SPECIALIST,
        voters=tuple(m.voter_id for m in probe_members),
        aug=head.aug,
        class_mode=head.class_mode,
    )
    full = EnsembleConfig(
        **{
            **base.model_dump(),
            "specialist_voters": base.specialist_voters + probe.voters,
            "allow_9c_specialists": base.allow_9c_specialists or head.class_mode == ClassMode.NINE,
        }
    )
    report = flip_analysis(
        base, full, pool.matrix(), probe, boundary_classes=parse_class_set(args.boundary)
    )
    _write_report(report, args, args.out, cfg.precision)
    return 0


def cmd_simulate(args, cfg: AppConfig) -> int:
    config = SimConfig.from_file(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    pool = simulate(config)
    manifest = write_pool(pool.gold, pool.predictions, args.out, pool.dialogues)
    report = SimulationReport(
        manifest=str(manifest),
        n_samples=config.n_samples,
        voters=len(config.voters),
        rho=config.rho,
        seed=config.seed,
        gold_counts=pool.gold.counts(),
        voter_macro_f1={p.voter_id: macro_f1(p.entries, pool.gold) for p in pool.predictions},
    )
    _write_report(report, args, args.report, cfg.precision)
    return 0


def _add_report_flags(parser: argparse.ArgumentParser, out_flag: str = "--out") -> None:
    parser.add_argument("--format", choices=["table", "structured"], default="table",
                        help="Report format (default: table)")
    parser.add_argument(out_flag, dest="out" if out_flag == "--out" else "report",
                        help="Write the report to this path instead of stdout")


def _add_ensemble_flags(parser: argparse.ArgumentParser, gatekeepers_required: bool = True) -> None:
    parser.add_argument("--gatekeepers", action="append", required=gatekeepers_required,
                        help="Gatekeeper branch[:folds]; repeatable or comma-joined")
    parser.add_argument("--specialists", action="append",
                        help="Specialist branch[:folds]; repeatable or comma-joined")
    parser.add_argument("--threshold", type=int, help="C0-override threshold t (default: strict majority)")
    parser.add_argument("--tie-break", help="Label preferred in plurality ties (default: 7)")
    parser.add_argument("--top-k", type=int, help="Keep the top-k folds by F1_cv of unpinned branches")
    parser.add_argument("--count-zero-votes", action="store_true",
                        help="Let 0-votes take part in the second-stage majority")


def build_parser(cfg: AppConfig) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gatekeeper-ensemble", description=__doc__)
    parser.add_argument("--log-level", default=cfg.logging.level, help="Log level for stderr logs")
    parser.add_argument("--json-logs", action="store_true", default=cfg.logging.json_format,
                        help="Emit JSON log lines")
    parser.add_argument("--metrics-file", help="Write Prometheus metrics here on exit")

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    def with_manifest(p: argparse.ArgumentParser) -> None:
        p.add_argument("--manifest", default=cfg.manifest,
                       help="Pool manifest (default: $ENSEMBLE_MANIFEST)")

    vote = subparsers.add_parser("vote", help="Run a two-stage ensemble")
    with_manifest(vote)
    _add_ensemble_flags(vote)
    vote.add_argument("--out", help="Write predictions CSV here")
    vote.add_argument("--trace", help="Write per-sample vote traces CSV here")
    _add_report_flags(vote, "--report")
    vote.set_defaults(func=cmd_vote)

    ev = subparsers.add_parser("eval", help="Score predictions against gold labels")
    ev.add_argument("--pred", required=True, help="Predictions CSV")
    ev.add_argument("--gold", required=True, help="Gold CSV")
    ev.add_argument("--classes", default="1-8", help="Macro-F1 class subset (default: 1-8)")
    ev.add_argument("--skip-absent", action="store_true", help="Leave classes with TP=FP=FN=0 out of the macro")
    ev.add_argument("--normalize", choices=["none", "row"], default="none", help="Confusion normalisation")
    _add_report_flags(ev)
    ev.set_defaults(func=cmd_eval)

    ag = subparsers.add_parser("agreement", help="Krippendorff's alpha within and across branches")
    with_manifest(ag)
    ag.add_argument("--branches", action="append", help="Branches to include (default: all)")
    ag.add_argument("--top-k", type=int, help="Use the top-k folds of each branch")
    _add_report_flags(ag)
    ag.set_defaults(func=cmd_agreement)

    co = subparsers.add_parser("correlate", help="Rank branches by fold-profile anti-correlation")
    with_manifest(co)
    co.add_argument("--reference", required=True, help="Reference branch")
    co.add_argument("--candidates", action="append", help="Candidate branches (default: all others)")
    _add_report_flags(co)
    co.set_defaults(func=cmd_correlate)

    sf = subparsers.add_parser("select-folds", help="Pick the top-k folds per branch")
    with_manifest(sf)
    sf.add_argument("--branch", action="append", help="Branch to select from (default: all)")
    sf.add_argument("--top-k", type=int, help=f"Folds to keep (default: {cfg.top_k})")
    sf.add_argument("--recompute-cv", action="store_true", help="Re-derive F1_cv from cv predictions")
    _add_report_flags(sf)
    sf.set_defaults(func=cmd_select_folds)

    bu = subparsers.add_parser("budget", help="Augmentation budget per class")
    bu.add_argument("--manifest", default=cfg.manifest, help="Take counts from the manifest's gold labels")
    bu.add_argument("--counts", help="Per-class counts, e.g. 244,88,54 or 0=244,1=88")
    bu.add_argument("--target", type=int, help=f"Target per class (default: {cfg.budget.target})")
    bu.add_argument("--cap", type=int, help=f"Cap multiplier (default: {cfg.budget.cap})")
    bu.add_argument("--exclude", help="Classes never augmented (default: 0,7)")
    bu.add_argument("--weights", action="store_true", help="Also report inverse-frequency class weights")
    _add_report_flags(bu)
    bu.set_defaults(func=cmd_budget)

    sp = subparsers.add_parser("split", help="Dialogue-grouped stratified K-fold split")
    with_manifest(sp)
    sp.add_argument("--samples", help="CSV with sample_id,dialogue_id,label instead of a manifest")
    sp.add_argument("--k", type=int, help=f"Number of folds (default: {cfg.split.k})")
    sp.add_argument("--seed", type=int, help="Tie-break seed")
    sp.add_argument("--out", help="Write the dialogue_id,fold assignment here")
    _add_report_flags(sp, "--report")
    sp.set_defaults(func=cmd_split)

    se = subparsers.add_parser("search", help="Exhaustive re-voting search")
    with_manifest(se)
    se.add_argument("--sizes", help="Ensemble sizes, e.g. 6,9,12")
    se.add_argument("--thresholds", help="Thresholds t, e.g. 1,2,3")
    se.add_argument("--top-n", type=int, help="Rows per size")
    se.add_argument("--folds-per-branch", type=int, help="Top folds kept per branch")
    se.add_argument("--role-override", action="append", help="branch=gatekeeper|specialist")
    se.add_argument("--workers", type=int, help="Scoring threads")
    se.add_argument("--classes", default="1-8", help="Macro-F1 class subset")
    _add_report_flags(se)
    se.set_defaults(func=cmd_search)

    fl = subparsers.add_parser("flips", help="Trace what a probe branch flips")
    with_manifest(fl)
    _add_ensemble_flags(fl, gatekeepers_required=False)
    fl.add_argument("--base", action="append",
                    help="Base ensemble branch[:folds]; roles come from the registry")
    fl.add_argument("--probe", required=True, help="Probe branch[:folds]")
    fl.add_argument("--boundary", default="6,7", help="Boundary classes (default: 6,7)")
    _add_report_flags(fl)
    fl.set_defaults(func=cmd_flips)

    si = subparsers.add_parser("simulate", help="Generate a synthetic pool")
    si.add_argument("--config", required=True, help="Simulation config JSON")
    si.add_argument("--out", required=True, help="Output directory")
    si.add_argument("--seed", type=int, help="Override the config seed")
    _add_report_flags(si, "--report")
    si.set_defaults(func=cmd_simulate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_manager.get_config()
    except EnsembleError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    parser = build_parser(cfg)
    args = parser.parse_args(argv)
    setup_logging(level=args.log_level, json_logs=args.json_logs, command=args.command)

    try:
        return args.func(args, cfg)
    except (EnsembleError, ValueError, OSError) as e:
        logger.debug("command_failed", command=args.command, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return 1
    finally:
        if args.metrics_file:
            atomic_write(args.metrics_file, get_metrics())


if __name__ == "__main__":
    sys.exit(main())
