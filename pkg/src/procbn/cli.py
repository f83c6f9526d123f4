"""Command-line entry point.

Exit codes: 0 success, 1 usage, 2 data/parse, 3 model/inference.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .bayesnet import BayesianNetwork, infer
from .errors import ProcBNError
from .evaluate import (
    comparison_to_csv,
    compare_sequences,
    conditional_report,
    conditional_to_csv,
    format_comparison,
    format_conditional,
)
from .eventlog import LogConfig, dumps_log, encode_presence, filter_prefix, log_statistics, parse_log, split_cases
from .graph import (
    break_cycles,
    build_transition_graph,
    dag_to_dot,
    network_to_dot,
    to_structure,
    transition_graph_to_dot,
)
from .io import dumps_network, dumps_training, loads_network, loads_training
from .learning import ExclusionGroup, LearnConfig, learn_with_corrections
from .markov import build_markov_chain, chain_to_dot, dumps_chain, loads_chain
from .synthgen import PRESETS, generate

LOAN_EXCLUSION = ("A_DECLINED", "A_CANCELLED", "A_APPROVED")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


@dataclass
class PipelineConfig:
    input: str
    out: str
    prefix: str = ""
    keep: str = "COMPLETE"
    delimiter: str = ","
    case_column: str = "caseId"
    task_column: str = "task"
    lifecycle_column: str = "lifecycle"
    train_fraction: float = 0.7
    seed: int = 42
    pseudocount: float = 1.0
    absent_propagation: bool = True
    exclusions: list[list[str]] | None = None  # None selects the loan default when applicable
    virtual_ends: bool = True
    observed: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise UsageError(f"--train-fraction must lie in (0, 1), got {self.train_fraction}")
        if self.pseudocount < 0:
            raise UsageError("--pseudocount must be non-negative")

    @property
    def log_config(self) -> LogConfig:
        return LogConfig(self.delimiter, self.case_column, self.task_column, self.lifecycle_column, self.keep)

    def digest(self) -> str:
        payload = {k: v for k, v in asdict(self).items() if k not in ("input", "out")}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _add_log_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delimiter", default=",")
    p.add_argument("--case-column", default="caseId")
    p.add_argument("--task-column", default="task")
    p.add_argument("--lifecycle-column", default="lifecycle")
    p.add_argument("--keep", default="COMPLETE", help="lifecycle value to retain")
    p.add_argument("--prefix", default="", help="keep only tasks starting with this prefix")


def _log_config(args) -> LogConfig:
    return LogConfig(args.delimiter, args.case_column, args.task_column, args.lifecycle_column, args.keep)


def _read_log(path, config: LogConfig, prefix: str = ""):
    with open(path, "rb") as fh:
        log = parse_log(fh, config)
    return filter_prefix(log, prefix)


def _exclusion_arg(text: str) -> list[str]:
    members = [m.strip() for m in text.split(",") if m.strip()]
    if len(members) < 2:
        raise argparse.ArgumentTypeError("an exclusion group needs at least two comma-separated tasks")
    return members


def _write(out: Path, name: str, text: str, written: list[Path]) -> Path:
    path = out / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    written.append(path)
    return path


def _safe_name(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="procbn", description="Bayesian Network process mining toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", help="task occurrence counts of an event log")
    p.add_argument("log")
    _add_log_options(p)

    p = sub.add_parser("gen", help="generate a synthetic event log")
    p.add_argument("--preset", choices=sorted(PRESETS), default="loan")
    p.add_argument("--n-cases", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("pipeline", help="log -> network + chain -> evaluation reports")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="output directory")
    _add_log_options(p)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--pseudocount", type=float, default=1.0)
    p.add_argument("--exclusion", action="append", type=_exclusion_arg, metavar="A,B[,C...]",
                   help="mutually exclusive tasks, edge direction follows the listed order (repeatable)")
    p.add_argument("--no-exclusions", action="store_true", help="skip the default loan exclusion group")
    p.add_argument("--no-absent-propagation", action="store_true")
    p.add_argument("--no-virtual-ends", action="store_true", help="Markov chain without START/END states")
    p.add_argument("--observed", action="append", default=[],
                   help="variables to report conditionals for (default: every variable)")

    p = sub.add_parser("learn", help="fit CPTs from a training file")
    p.add_argument("--training", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--structure", help="network file whose parent sets are reused")
    src.add_argument("--log", help="event log to discover the structure from")
    _add_log_options(p)
    p.add_argument("--pseudocount", type=float, default=1.0)
    p.add_argument("--absent-propagation", action="store_true")
    p.add_argument("--exclusion", action="append", type=_exclusion_arg, default=[], metavar="A,B[,C...]")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("query", help="posterior of one variable given evidence")
    p.add_argument("--network", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--evidence", action="append", default=[], metavar="VAR=present|absent")

    p = sub.add_parser("eval", help="evaluate a network and chain on a test log")
    p.add_argument("--network", required=True)
    p.add_argument("--chain", required=True)
    p.add_argument("--test", required=True)
    _add_log_options(p)
    p.add_argument("--observed", action="append", default=[])
    p.add_argument("--out", help="directory for machine-readable reports")

    p = sub.add_parser("export-dot", help="write DOT renderings")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--log")
    src.add_argument("--network")
    src.add_argument("--chain")
    _add_log_options(p)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def cmd_stats(args) -> int:
    log = _read_log(args.log, _log_config(args), args.prefix)
    stats = log_statistics(log)
    total = sum(stats.values())
    if not stats:
        print("0 events")
        return EXIT_OK
    width = max(len("Task"), *(len(t) for t in stats))
    print(f"{'Task':<{width}}  {'Occurrences':>11}")
    for task in sorted(stats):
        print(f"{task:<{width}}  {stats[task]:>11d}")
    print(f"{total} events in {len(log)} cases")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.n_cases < 1:
        raise UsageError("--n-cases must be positive")
    spec = PRESETS[args.preset](n_cases=args.n_cases, seed=args.seed)
    log = generate(spec)
    written: list[Path] = []
    path = _write(Path(args.out), f"{args.preset}_log.csv", dumps_log(log), written)
    print(f"generated {len(log)} cases")
    print(path)
    return EXIT_OK


def _resolve_exclusions(config: PipelineConfig, variables) -> list[list[str]]:
    if config.exclusions is not None:
        return config.exclusions
    if all(m in variables for m in LOAN_EXCLUSION):
        return [list(LOAN_EXCLUSION)]
    return []


def run_pipeline(config: PipelineConfig) -> list[Path]:
    """Run every stage and persist its artifact; returns the written paths."""
    out = Path(config.out)
    written: list[Path] = []

    def stage(name, fn, *a, **kw):
        try:
            return fn(*a, **kw)
        except (ProcBNError, OSError, ValueError) as exc:
            raise StageError(name, exc) from exc

    log = stage("parse", _read_log, config.input, config.log_config)
    log = stage("filter", filter_prefix, log, config.prefix)
    train, test = stage("split", split_cases, log, config.train_fraction, config.seed)
    graph = stage("graph", build_transition_graph, train)
    dag = stage("break_cycles", break_cycles, graph)
    structure = stage("structure", to_structure, dag)
    matrix = stage("encode", encode_presence, train, structure.variables)
    groups = [ExclusionGroup(tuple(g)) for g in _resolve_exclusions(config, structure.variables)]
    net = stage(
        "learn",
        learn_with_corrections,
        structure,
        matrix,
        LearnConfig(pseudocount=config.pseudocount),
        groups,
        config.absent_propagation,
    )
    chain = stage("markov", build_markov_chain, train, config.virtual_ends)
    comparison = stage("evaluate", compare_sequences, net, chain, test)

    observed = config.observed or list(net.variables)
    reports, missing = [], []
    test_tasks = {t for trace in test for t in trace.tasks}
    for v in observed:
        if v not in net.cpts:
            raise StageError("evaluate", ValueError(f"unknown observed variable {v!r}"))
        if v in test_tasks:
            reports.append(stage("evaluate", conditional_report, net, test, v))
        else:
            missing.append(v)

    def persist():
        _write(out, "train_log.csv", dumps_log(train), written)
        _write(out, "test_log.csv", dumps_log(test), written)
        _write(out, "train.dat", dumps_training(matrix), written)
        _write(out, "transitions.dot", transition_graph_to_dot(graph), written)
        _write(out, "dag.dot", dag_to_dot(dag), written)
        _write(out, "network.bn", dumps_network(net), written)
        _write(out, "network.dot", network_to_dot(net), written)
        _write(out, "chain.csv", dumps_chain(chain), written)
        _write(out, "chain.dot", chain_to_dot(chain), written)
        _write(out, "reports/sequences.txt", format_comparison(comparison), written)
        _write(out, "reports/sequences.csv", comparison_to_csv(comparison), written)
        for report in reports:
            stem = f"reports/conditional_{_safe_name(report.observed)}"
            _write(out, stem + ".txt", format_conditional(report), written)
            _write(out, stem + ".csv", conditional_to_csv(report), written)
        manifest = {
            "config": asdict(config),
            "config_sha256": config.digest(),
            "seed": config.seed,
            "cases": {"total": len(log), "train": len(train), "test": len(test)},
            "variables": list(net.variables),
            "removed_edges": [[r.source, r.target, r.count, r.reason] for r in dag.removed],
            "exclusions": _resolve_exclusions(config, net.variables),
            "observed_without_test_support": missing,
            "artifacts": {
                str(p.relative_to(out)): hashlib.sha256(p.read_bytes()).hexdigest() for p in written
            },
        }
        _write(out, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n", written)

    stage("write", persist)
    print(format_comparison(comparison), end="")
    if missing:
        print(f"# no test trace contains {', '.join(missing)}; conditional reports skipped")
    return written


def cmd_pipeline(args) -> int:
    config = PipelineConfig(
        input=args.input,
        out=args.out,
        prefix=args.prefix,
        keep=args.keep,
        delimiter=args.delimiter,
        case_column=args.case_column,
        task_column=args.task_column,
        lifecycle_column=args.lifecycle_column,
        train_fraction=args.train_fraction,
        seed=args.seed,
        pseudocount=args.pseudocount,
        absent_propagation=not args.no_absent_propagation,
        exclusions=[] if args.no_exclusions else args.exclusion,
        virtual_ends=not args.no_virtual_ends,
        observed=args.observed,
    )
    for path in run_pipeline(config):
        print(path)
    return EXIT_OK


def cmd_learn(args) -> int:
    matrix = loads_training(Path(args.training).read_text(encoding="utf-8"))
    if args.structure:
        base = loads_network(Path(args.structure).read_text(encoding="utf-8"))
    else:
        log = _read_log(args.log, _log_config(args), args.prefix)
        base = to_structure(break_cycles(build_transition_graph(log)))
    net = learn_with_corrections(
        base,
        matrix,
        LearnConfig(pseudocount=args.pseudocount),
        [ExclusionGroup(tuple(g)) for g in args.exclusion],
        args.absent_propagation,
    )
    written: list[Path] = []
    print(_write(Path(args.out), "network.bn", dumps_network(net), written))
    return EXIT_OK


def _parse_evidence(items) -> dict[str, str]:
    evidence = {}
    for item in items:
        name, sep, state = item.rpartition("=")
        if not sep or not name or state.strip().lower() not in ("present", "absent"):
            raise UsageError(f"evidence must look like VAR=present or VAR=absent, got {item!r}")
        evidence[name.strip()] = state.strip().lower()
    return evidence


def cmd_query(args) -> int:
    net: BayesianNetwork = loads_network(Path(args.network).read_text(encoding="utf-8"))
    evidence = _parse_evidence(args.evidence)
    post = infer(net, args.query, evidence)
    given = ", ".join(f"{k}={v}" for k, v in evidence.items())
    cond = f" | {given}" if given else ""
    print(f"Pr({post.variable} = present{cond}) = {post.p_present:.6f}")
    print(f"Pr({post.variable} = absent{cond}) = {post.p_absent:.6f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    net = loads_network(Path(args.network).read_text(encoding="utf-8"))
    chain = loads_chain(Path(args.chain).read_text(encoding="utf-8"))
    test = _read_log(args.test, _log_config(args), args.prefix)
    comparison = compare_sequences(net, chain, test)
    print(format_comparison(comparison), end="")
    reports = [conditional_report(net, test, v) for v in args.observed]
    for report in reports:
        print()
        print(format_conditional(report), end="")
    if args.out:
        out, written = Path(args.out), []
        _write(out, "sequences.csv", comparison_to_csv(comparison), written)
        for report in reports:
            _write(out, f"conditional_{_safe_name(report.observed)}.csv", conditional_to_csv(report), written)
        for path in written:
            print(path)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    out, written = Path(args.out), []
    if args.log:
        log = _read_log(args.log, _log_config(args), args.prefix)
        graph = build_transition_graph(log)
        _write(out, "transitions.dot", transition_graph_to_dot(graph), written)
        _write(out, "dag.dot", dag_to_dot(break_cycles(graph)), written)
    elif args.network:
        net = loads_network(Path(args.network).read_text(encoding="utf-8"))
        _write(out, "network.dot", network_to_dot(net), written)
    else:
        chain = loads_chain(Path(args.chain).read_text(encoding="utf-8"))
        _write(out, "chain.dot", chain_to_dot(chain), written)
    for path in written:
        print(path)
    return EXIT_OK


COMMANDS = {
    "stats": cmd_stats,
    "gen": cmd_gen,
    "pipeline": cmd_pipeline,
    "learn": cmd_learn,
    "query": cmd_query,
    "eval": cmd_eval,
    "export-dot": cmd_export_dot,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --help/--version exit 0, argument errors exit 1
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"procbn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"procbn: {exc}", file=sys.stderr)
        cause = exc.cause
        if isinstance(cause, ProcBNError):
            return cause.exit_code
        return EXIT_DATA if isinstance(cause, OSError) else EXIT_MODEL
    except ProcBNError as exc:
        print(f"procbn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"procbn: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
