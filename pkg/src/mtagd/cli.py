"""Command-line front end for the design pipeline.

Commands: ingest, validate, stats, connect, design, classify, export.
Standard output carries only payload; diagnostics go to standard error.
Exit codes: 0 success, 1 usage, 2 parse/validation, 3 unknown entity,
4 decoder cycle, 5 internal.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from collections.abc import Sequence

from . import __version__
from .connect import ConnectionPlan, connect_exact, connect_greedy
from .design import Classification, DesignReport, Mtag, SharePolicy, classify, design
from .dot import mtag_to_dot, mtkg_to_dot
from .errors import (
    DecoderCycleError,
    DocumentError,
    MtagdError,
    RecordParseError,
    UnknownTaskError,
)
from .ingest import aggregate, load_records
from .model import Mtkg, stats as graph_stats, validate_mtkg
from .serialize import (
    canonical_json,
    load_mtag,
    load_mtkg,
    plan_payload,
    report_payload,
    save_mtag,
    save_mtkg,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_UNKNOWN_ENTITY = 3
EXIT_CYCLE = 4
EXIT_INTERNAL = 5


@dataclass
class CliConfig:
    """Resolved option set shared by the pipeline commands."""

    share_policy: SharePolicy = SharePolicy.ANY
    theta: float = 1.0
    cycle_mode: str = "error"
    solver: str = "exact"
    budget: int | None = None
    output_format: str = "text"

    def __post_init__(self) -> None:
        if not 0 < self.theta <= 1:
            raise ValueError(f"theta must be in (0, 1], got {self.theta}")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; this project reserves 2 for parse
    errors, so remap."""

    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="mtagd", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mtagd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, tasks: bool = False, pipeline: bool = False):
        if tasks:
            p.add_argument("--tasks", help="comma-separated task ids")
            p.add_argument("--tasks-file", help="file with one task id per line")
        if pipeline:
            p.add_argument("--solver", choices=["exact", "greedy"], default="exact")
            p.add_argument("--budget", type=int, default=None, help="max number of added tasks")
            p.add_argument("--share-policy", choices=[p.value for p in SharePolicy], default="any")
            p.add_argument("--theta", type=float, default=1.0)
            p.add_argument("--cycle-mode", choices=["error", "warn"], default="error")
        p.add_argument("--format", dest="output_format", choices=["json", "dot", "text"], default="text")

    p = sub.add_parser("ingest", help="aggregate paper records into a knowledge graph")
    p.add_argument("records_path")
    p.add_argument("--out", required=True, help="output path for the graph document")
    p.add_argument("--format", dest="output_format", choices=["json", "text"], default="text")

    p = sub.add_parser("validate", help="report invariant violations of a graph document")
    p.add_argument("mtkg_path")
    p.add_argument("--format", dest="output_format", choices=["json", "text"], default="text")

    p = sub.add_parser("stats", help="summarize a knowledge graph")
    p.add_argument("mtkg_path")
    p.add_argument("--format", dest="output_format", choices=["json", "text"], default="text")

    p = sub.add_parser("connect", help="choose auxiliary tasks for the given terminals")
    p.add_argument("mtkg_path")
    add_common(p, tasks=True, pipeline=True)

    p = sub.add_parser("design", help="run the full pipeline and emit the architecture")
    p.add_argument("mtkg_path")
    p.add_argument("--out", help="write the selected format here instead of stdout")
    add_common(p, tasks=True, pipeline=True)
    p.set_defaults(output_format="text")

    p = sub.add_parser("classify", help="classify an architecture document")
    p.add_argument("mtag_path")
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--format", dest="output_format", choices=["json", "text"], default="text")

    p = sub.add_parser("export", help="re-emit a graph or architecture document")
    p.add_argument("doc_path")
    p.add_argument("--out", help="write here instead of stdout")
    p.add_argument("--format", dest="output_format", choices=["json", "dot"], default="dot")
    return parser


def _read_tasks(args: argparse.Namespace) -> list[str]:
    tasks: list[str] = []
    if getattr(args, "tasks", None):
        tasks.extend(t.strip() for t in args.tasks.split(",") if t.strip())
    if getattr(args, "tasks_file", None):
        for line in Path(args.tasks_file).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line:
                tasks.append(line)
    return tasks


def _config(args: argparse.Namespace) -> CliConfig:
    try:
        return CliConfig(
            share_policy=SharePolicy(getattr(args, "share_policy", "any")),
            theta=getattr(args, "theta", 1.0),
            cycle_mode=getattr(args, "cycle_mode", "error"),
            solver=getattr(args, "solver", "exact"),
            budget=getattr(args, "budget", None),
            output_format=getattr(args, "output_format", "text"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_graph(path: str, strict: bool = True) -> Mtkg:
    return load_mtkg(Path(path).read_text(encoding="utf-8"), strict=strict)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _stats_lines(g: Mtkg) -> str:
    s = graph_stats(g)
    lines = [
        f"tasks={s.task_count} edges={s.directed_edge_count}"
        f" bi_pairs={s.bi_pair_count} uni={s.uni_edge_count}"
    ]
    for label, hist in (
        ("w_trans", s.w_trans_hist),
        ("w_share_e", s.w_share_e_hist),
        ("w_share_d", s.w_share_d_hist),
    ):
        lines.append(f"{label}: " + " ".join(f"{v}:{n}" for v, n in hist))
    return "\n".join(lines) + "\n"


def _stats_payload(g: Mtkg) -> dict:
    s = graph_stats(g)
    return {
        "task_count": s.task_count,
        "directed_edge_count": s.directed_edge_count,
        "bi_pair_count": s.bi_pair_count,
        "uni_edge_count": s.uni_edge_count,
        "w_trans_hist": [list(p) for p in s.w_trans_hist],
        "w_share_e_hist": [list(p) for p in s.w_share_e_hist],
        "w_share_d_hist": [list(p) for p in s.w_share_d_hist],
    }


def cmd_ingest(args: argparse.Namespace) -> int:
    records = load_records(args.records_path)
    g = aggregate(records)
    Path(args.out).write_text(save_mtkg(g), encoding="utf-8")
    if args.output_format == "json":
        sys.stdout.write(canonical_json(_stats_payload(g)))
    else:
        sys.stdout.write(_stats_lines(g))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    g = _load_graph(args.mtkg_path, strict=False)
    violations = validate_mtkg(g)
    if args.output_format == "json":
        sys.stdout.write(canonical_json(violations))
    elif violations:
        sys.stdout.write("\n".join(violations) + "\n")
    else:
        sys.stdout.write("valid\n")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    g = _load_graph(args.mtkg_path)
    if args.output_format == "json":
        sys.stdout.write(canonical_json(_stats_payload(g)))
    else:
        sys.stdout.write(_stats_lines(g))
    return EXIT_OK


def _run_connect(g: Mtkg, tasks: list[str], cfg: CliConfig) -> ConnectionPlan:
    if cfg.solver == "greedy":
        return connect_greedy(g, tasks)
    return connect_exact(g, tasks, budget=cfg.budget)


def _plan_lines(plan: ConnectionPlan) -> str:
    lines = [
        "spec: " + " ".join(plan.t_spec),
        "add: " + (" ".join(plan.t_add) if plan.t_add else "(none)"),
        f"coverage: {plan.coverage}/{len(plan.t_spec)}",
        "components: " + " | ".join(",".join(c) for c in plan.components),
        f"exact: {'yes' if plan.exact else 'no'}",
    ]
    if plan.note:
        lines.append(f"note: {plan.note}")
    return "\n".join(lines) + "\n"


def cmd_connect(args: argparse.Namespace) -> int:
    cfg = _config(args)
    tasks = _read_tasks(args)
    if not tasks:
        raise UsageError("no tasks given: use --tasks or --tasks-file")
    g = _load_graph(args.mtkg_path)
    plan = _run_connect(g, tasks, cfg)
    if cfg.output_format == "json":
        sys.stdout.write(canonical_json(plan_payload(plan)))
    else:
        sys.stdout.write(_plan_lines(plan))
    return EXIT_OK


def _ordered_passes(report: DesignReport) -> list[tuple[str, str]]:
    """Cross-decoder passes in topological order of source task, so a chain
    reads left to right."""
    passes = [(p.src, p.dst) for p in report.decoder_pass_edges]
    nodes = sorted({t for p in passes for t in p})
    indeg = {t: 0 for t in nodes}
    for _, b in passes:
        indeg[b] += 1
    ready = sorted(t for t in nodes if indeg[t] == 0)
    position: dict[str, int] = {}
    while ready:
        current = ready.pop(0)
        position[current] = len(position)
        for a, b in sorted(passes):
            if a == current:
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
        ready.sort()
    # cyclic leftovers keep sorted order after the acyclic prefix
    return sorted(passes, key=lambda p: (position.get(p[0], len(nodes)), p))


def _design_report_lines(report: DesignReport, extra_warnings: Sequence[str]) -> str:
    plan = report.plan
    lines = [
        "tasks: " + " ".join(plan.selected_tasks),
        "add: " + (" ".join(plan.t_add) if plan.t_add else "(none)"),
        f"coverage: {plan.coverage}/{len(plan.t_spec)}",
    ]
    passes = _ordered_passes(report)
    lines.append(
        "decoder passes: "
        + (" ".join(f"D({a})->D({b})" for a, b in passes) if passes else "(none)")
    )
    for decision in report.share_decisions:
        for kind, shared, checks in (
            ("encoders", decision.share_encoders, decision.encoder_checks),
            ("decoders", decision.share_decoders, decision.decoder_checks),
        ):
            verdict = "share" if shared else "keep separate"
            detail = "; ".join(c.render() for c in checks)
            if kind == "decoders" and not decision.bidirectional:
                detail += "; not bi-directional"
            lines.append(f"{kind} {decision.task_a}~{decision.task_b}: {verdict} ({detail})")
    for group in report.sharing_groups.encoders:
        lines.append("encoder group: " + " ".join(group))
    for group in report.sharing_groups.decoders:
        lines.append("decoder group: " + " ".join(group))
    for warning in list(report.warnings) + list(extra_warnings):
        lines.append(f"warning: {warning}")
    lines.append(f"classification: {report.classification.value}")
    return "\n".join(lines) + "\n"


def cmd_design(args: argparse.Namespace) -> int:
    cfg = _config(args)
    tasks = _read_tasks(args)
    if not tasks:
        raise UsageError("no tasks given: use --tasks or --tasks-file")
    g = _load_graph(args.mtkg_path)
    plan = _run_connect(g, tasks, cfg)
    arch, report = design(
        g, plan, cfg.share_policy, theta=cfg.theta, on_cycle=cfg.cycle_mode
    )
    extra_warnings = ["nothing to connect"] if len(plan.t_spec) == 1 else []
    report_text = _design_report_lines(report, extra_warnings)
    if cfg.output_format == "json":
        payload = save_mtag(arch, report)
    elif cfg.output_format == "dot":
        payload = mtag_to_dot(arch)
    else:
        payload = report_text
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
        sys.stdout.write(report_text)
    else:
        sys.stdout.write(payload)
    for warning in list(report.warnings) + extra_warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    cfg = _config(args)
    arch, _report = load_mtag(Path(args.mtag_path).read_text(encoding="utf-8"))
    result = classify(arch, cfg.theta)
    if args.output_format == "json":
        sys.stdout.write(canonical_json({"classification": result.value}))
    else:
        sys.stdout.write(result.value + "\n")
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    text = Path(args.doc_path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    if isinstance(doc, dict) and "r_pass" in doc:
        arch, report = load_mtag(text)
        payload = save_mtag(arch, report) if args.output_format == "json" else mtag_to_dot(arch)
    else:
        g = load_mtkg(text)
        payload = save_mtkg(g) if args.output_format == "json" else mtkg_to_dot(g)
    _emit(payload, args.out)
    return EXIT_OK


class UsageError(MtagdError):
    """Bad command invocation detected after argparse."""


_COMMANDS = {
    "ingest": cmd_ingest,
    "validate": cmd_validate,
    "stats": cmd_stats,
    "connect": cmd_connect,
    "design": cmd_design,
    "classify": cmd_classify,
    "export": cmd_export,
}


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("MTAGD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mtagd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RecordParseError, DocumentError) as exc:
        print(f"mtagd: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnknownTaskError as exc:
        print(f"mtagd: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_ENTITY
    except DecoderCycleError as exc:
        print(f"mtagd: {exc}", file=sys.stderr)
        return EXIT_CYCLE
    except FileNotFoundError as exc:
        print(f"mtagd: parse error: cannot read {exc.filename}", file=sys.stderr)
        return EXIT_PARSE
    except (MtagdError, ValueError) as exc:
        print(f"mtagd: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
