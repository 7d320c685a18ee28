"""Canonical JSON documents for knowledge graphs and architectures.

Serialization is byte-stable: mappings are emitted with sorted keys and
entries in sorted order, so structurally equal values produce identical
documents and diffs stay readable. Loading validates the schema (unknown
fields rejected, paths reported) and re-checks all model invariants.
"""

from __future__ import annotations

import json
import logging
from fractions import Fraction
from typing import Any

from .connect import ConnectionPlan
from .design import (
    Classification,
    Comparison,
    DesignReport,
    ModuleKind,
    ModuleRef,
    Mtag,
    validate_mtag,
)
from .errors import DocumentError
from .model import EdgeWeights, Mtkg, TaskInfo, validate_mtkg

log = logging.getLogger(__name__)

FORMAT_VERSION = "1.0"

_MODULE_KINDS = {k.value: k for k in ModuleKind}


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _parse_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc


def _check_version(doc: dict, path: str) -> None:
    version = doc.get("format_version")
    if not isinstance(version, str):
        raise DocumentError(f"{path}.format_version", "missing or not a string")
    major = version.split(".", 1)[0]
    if major != FORMAT_VERSION.split(".", 1)[0]:
        raise DocumentError(
            f"{path}.format_version", f"unsupported major version {version!r}"
        )
    if version != FORMAT_VERSION:
        log.warning("document version %s read as %s", version, FORMAT_VERSION)


def _require_fields(obj: dict, fields: set[str], path: str) -> None:
    if not isinstance(obj, dict):
        raise DocumentError(path, "must be an object")
    unknown = sorted(set(obj) - fields)
    if unknown:
        raise DocumentError(path, f"unknown field {unknown[0]!r}")
    missing = sorted(fields - set(obj))
    if missing:
        raise DocumentError(path, f"missing field {missing[0]!r}")


def _require_count(value: object, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise DocumentError(path, "must be an integer")
    return value


def _require_str(value: object, path: str) -> str:
    if not isinstance(value, str):
        raise DocumentError(path, "must be a string")
    return value


def save_mtkg(g: Mtkg) -> str:
    """Serialize a knowledge graph to canonical document text."""
    payload = {
        "format_version": FORMAT_VERSION,
        "tasks": [
            {
                "id": info.id,
                "display_name": info.display_name,
                "domain_tags": sorted(info.domain_tags),
            }
            for info in g.tasks.values()
        ],
        "edges": [
            {
                "src": src,
                "dst": dst,
                "w_trans": w.w_trans,
                "w_share_e": w.w_share_e,
                "w_share_d": w.w_share_d,
            }
            for (src, dst), w in g.edges.items()
        ],
    }
    return canonical_json(payload)


def load_mtkg(text: str, strict: bool = True) -> Mtkg:
    """Parse a knowledge-graph document.

    With ``strict`` (the default) any model-invariant violation rejects the
    document; pass ``strict=False`` to obtain the graph for inspection.
    """
    doc = _parse_json(text)
    if not isinstance(doc, dict):
        raise DocumentError("document", "top level must be an object")
    _require_fields(doc, {"format_version", "tasks", "edges"}, "document")
    _check_version(doc, "document")
    if not isinstance(doc["tasks"], list):
        raise DocumentError("tasks", "must be a list")
    if not isinstance(doc["edges"], list):
        raise DocumentError("edges", "must be a list")

    tasks: dict[str, TaskInfo] = {}
    for i, raw in enumerate(doc["tasks"]):
        path = f"tasks[{i}]"
        _require_fields(raw, {"id", "display_name", "domain_tags"}, path)
        task_id = _require_str(raw["id"], f"{path}.id")
        if task_id in tasks:
            raise DocumentError(f"{path}.id", f"duplicate task id {task_id!r}")
        if not isinstance(raw["domain_tags"], list):
            raise DocumentError(f"{path}.domain_tags", "must be a list")
        tasks[task_id] = TaskInfo(
            id=task_id,
            display_name=_require_str(raw["display_name"], f"{path}.display_name"),
            domain_tags=frozenset(
                _require_str(t, f"{path}.domain_tags[{j}]")
                for j, t in enumerate(raw["domain_tags"])
            ),
        )

    edges: dict[tuple[str, str], EdgeWeights] = {}
    for i, raw in enumerate(doc["edges"]):
        path = f"edges[{i}]"
        _require_fields(raw, {"src", "dst", "w_trans", "w_share_e", "w_share_d"}, path)
        key = (_require_str(raw["src"], f"{path}.src"), _require_str(raw["dst"], f"{path}.dst"))
        if key in edges:
            raise DocumentError(path, f"duplicate edge {key}")
        edges[key] = EdgeWeights(
            w_trans=_require_count(raw["w_trans"], f"{path}.w_trans"),
            w_share_e=_require_count(raw["w_share_e"], f"{path}.w_share_e"),
            w_share_d=_require_count(raw["w_share_d"], f"{path}.w_share_d"),
        )

    g = Mtkg(tasks=tasks, edges=edges)
    if strict:
        violations = validate_mtkg(g)
        if violations:
            raise DocumentError("document", "invariant violation: " + violations[0])
    return g


def _module_payload(m: ModuleRef) -> dict:
    return {"kind": m.kind.value, "task": m.task}


def _parse_module(raw: object, path: str) -> ModuleRef:
    _require_fields(raw, {"kind", "task"}, path)  # type: ignore[arg-type]
    assert isinstance(raw, dict)
    kind = _require_str(raw["kind"], f"{path}.kind")
    if kind not in _MODULE_KINDS:
        raise DocumentError(f"{path}.kind", f"unknown module kind {kind!r}")
    return ModuleRef(kind=_MODULE_KINDS[kind], task=_require_str(raw["task"], f"{path}.task"))


def _fraction_payload(f: Fraction) -> list[int]:
    return [f.numerator, f.denominator]


def report_payload(report: DesignReport) -> dict:
    """JSON-ready rendering of a design report (informational)."""
    return {
        "plan": {
            "t_spec": list(report.plan.t_spec),
            "t_add": list(report.plan.t_add),
            "coverage": report.plan.coverage,
            "components": [list(c) for c in report.plan.components],
            "exact": report.plan.exact,
            "note": report.plan.note,
        },
        "decoder_pass_edges": [
            {
                "src": p.src,
                "dst": p.dst,
                "w_trans": p.weights.w_trans,
                "w_share_e": p.weights.w_share_e,
                "w_share_d": p.weights.w_share_d,
            }
            for p in report.decoder_pass_edges
        ],
        "share_decisions": [
            {
                "pair": [d.task_a, d.task_b],
                "bidirectional": d.bidirectional,
                "share_encoders": d.share_encoders,
                "share_decoders": d.share_decoders,
                "encoder_checks": [_comparison_payload(c) for c in d.encoder_checks],
                "decoder_checks": [_comparison_payload(c) for c in d.decoder_checks],
            }
            for d in report.share_decisions
        ],
        "sharing_groups": {
            "encoders": [list(g) for g in report.sharing_groups.encoders],
            "decoders": [list(g) for g in report.sharing_groups.decoders],
        },
        "warnings": list(report.warnings),
        "classification": report.classification.value,
    }


def _comparison_payload(c: Comparison) -> dict:
    return {
        "direction": c.direction,
        "w_share": c.w_share,
        "w_trans": c.w_trans,
        "threshold": _fraction_payload(c.threshold),
        "satisfied": c.satisfied,
    }


def save_mtag(arch: Mtag, report: DesignReport | dict | None = None) -> str:
    """Serialize an architecture, optionally embedding its design report."""
    payload: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "tasks": list(arch.tasks),
        "r_pass": [
            {"from": _module_payload(a), "to": _module_payload(b)}
            for a, b in sorted(arch.r_pass)
        ],
        "r_share": [
            [_module_payload(a), _module_payload(b)] for a, b in sorted(arch.r_share)
        ],
    }
    if report is not None:
        payload["report"] = report_payload(report) if isinstance(report, DesignReport) else report
    return canonical_json(payload)


def load_mtag(text: str) -> tuple[Mtag, dict | None]:
    """Parse an architecture document; returns the graph and the embedded
    report payload, if any."""
    doc = _parse_json(text)
    if not isinstance(doc, dict):
        raise DocumentError("document", "top level must be an object")
    fields = {"format_version", "tasks", "r_pass", "r_share"}
    report = None
    if "report" in doc:
        fields.add("report")
        report = doc["report"]
        if not isinstance(report, dict):
            raise DocumentError("report", "must be an object")
    _require_fields(doc, fields, "document")
    _check_version(doc, "document")
    if not isinstance(doc["tasks"], list):
        raise DocumentError("tasks", "must be a list")
    tasks = tuple(_require_str(t, f"tasks[{i}]") for i, t in enumerate(doc["tasks"]))

    if not isinstance(doc["r_pass"], list):
        raise DocumentError("r_pass", "must be a list")
    r_pass = set()
    for i, raw in enumerate(doc["r_pass"]):
        path = f"r_pass[{i}]"
        _require_fields(raw, {"from", "to"}, path)
        r_pass.add((_parse_module(raw["from"], f"{path}.from"), _parse_module(raw["to"], f"{path}.to")))

    if not isinstance(doc["r_share"], list):
        raise DocumentError("r_share", "must be a list")
    r_share = set()
    for i, raw in enumerate(doc["r_share"]):
        path = f"r_share[{i}]"
        if not isinstance(raw, list) or len(raw) != 2:
            raise DocumentError(path, "must be a pair of modules")
        pair = (_parse_module(raw[0], f"{path}[0]"), _parse_module(raw[1], f"{path}[1]"))
        r_share.add(pair if pair[0] <= pair[1] else (pair[1], pair[0]))

    arch = Mtag(tasks=tasks, r_pass=frozenset(r_pass), r_share=frozenset(r_share))
    violations = validate_mtag(arch)
    if violations:
        raise DocumentError("document", "invariant violation: " + violations[0])
    return arch, report


def plan_payload(plan: ConnectionPlan) -> dict:
    """JSON-ready rendering of a connection plan."""
    return {
        "t_spec": list(plan.t_spec),
        "t_add": list(plan.t_add),
        "coverage": plan.coverage,
        "components": [list(c) for c in plan.components],
        "exact": plan.exact,
        "note": plan.note,
    }


def classification_of(value: str) -> Classification:
    try:
        return Classification(value)
    except ValueError as exc:
        raise DocumentError("classification", f"unknown value {value!r}") from exc
