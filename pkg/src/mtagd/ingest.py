"""Aggregate per-paper transfer records into a task knowledge graph.

Each record states, for one published method, which task pairs it
transferred knowledge between and whether it shared encoder or decoder
parameters. Aggregation counts distinct papers per directed edge, so one
paper contributes at most 1 to each weight of each edge no matter how its
assertions overlap. Papers describing several distinct methods must be
entered under distinct keys.

A curated seed corpus ships with the package; :func:`build_seed_dataset`
loads and aggregates it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import RecordParseError
from .model import EdgeKey, Mtkg, TaskId, TaskInfo, EdgeWeights, task_id_problem

DIRECTIONS = ("uni", "bi")

_ASSERTION_FIELDS = {"from", "to", "direction", "encoder_shared", "decoder_shared"}
_RECORD_FIELDS = {"paper_key", "assertions"}


@dataclass(frozen=True, slots=True)
class TransferAssertion:
    """One documented transfer between two tasks.

    ``direction`` is ``"uni"`` (from_task to to_task only) or ``"bi"``
    (jointly trainable, covers both directions). Decoder sharing implies
    joint training, so it is only legal on bi assertions.
    """

    from_task: TaskId
    to_task: TaskId
    direction: str
    encoder_shared: bool = False
    decoder_shared: bool = False

    def problem(self) -> str | None:
        """Why this assertion is invalid, or None."""
        for value in (self.from_task, self.to_task):
            issue = task_id_problem(value)
            if issue is not None:
                return issue
        if self.direction not in DIRECTIONS:
            return f"direction must be 'uni' or 'bi', got {self.direction!r}"
        if self.from_task == self.to_task:
            return f"self-transfer at {self.from_task}"
        if self.decoder_shared and self.direction == "uni":
            return "decoder_shared requires a bi-directional assertion"
        return None

    def covered_directions(self) -> tuple[EdgeKey, ...]:
        if self.direction == "bi":
            return ((self.from_task, self.to_task), (self.to_task, self.from_task))
        return ((self.from_task, self.to_task),)


@dataclass(frozen=True, slots=True)
class PaperRecord:
    """All transfer assertions made by one paper."""

    paper_key: str
    assertions: tuple[TransferAssertion, ...]


def _check_record(record: PaperRecord, location: str) -> None:
    if not record.paper_key or not isinstance(record.paper_key, str):
        raise RecordParseError(f"{location}.paper_key", "paper_key must be a non-empty string")
    if not record.assertions:
        raise RecordParseError(f"{location}.assertions", "assertions must be non-empty")
    seen: set[tuple[str, str, str]] = set()
    for i, assertion in enumerate(record.assertions):
        where = f"{location}.assertions[{i}]"
        issue = assertion.problem()
        if issue is not None:
            raise RecordParseError(where, issue)
        triple = (assertion.from_task, assertion.to_task, assertion.direction)
        if triple in seen:
            raise RecordParseError(where, f"duplicate assertion {triple}")
        seen.add(triple)


def _parse_assertion(raw: object, where: str) -> TransferAssertion:
    if not isinstance(raw, dict):
        raise RecordParseError(where, "assertion must be an object")
    unknown = set(raw) - _ASSERTION_FIELDS
    if unknown:
        raise RecordParseError(where, f"unknown field {sorted(unknown)[0]!r}")
    missing = _ASSERTION_FIELDS - set(raw)
    if missing:
        raise RecordParseError(where, f"missing field {sorted(missing)[0]!r}")
    for flag in ("encoder_shared", "decoder_shared"):
        if not isinstance(raw[flag], bool):
            raise RecordParseError(f"{where}.{flag}", "must be a boolean")
    return TransferAssertion(
        from_task=raw["from"],
        to_task=raw["to"],
        direction=raw["direction"],
        encoder_shared=raw["encoder_shared"],
        decoder_shared=raw["decoder_shared"],
    )


def parse_records(text: str) -> list[PaperRecord]:
    """Parse and validate a record document from JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RecordParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    if not isinstance(data, list):
        raise RecordParseError("document", "top level must be a list of records")
    records: list[PaperRecord] = []
    keys_seen: set[str] = set()
    for i, raw in enumerate(data):
        where = f"records[{i}]"
        if not isinstance(raw, dict):
            raise RecordParseError(where, "record must be an object")
        unknown = set(raw) - _RECORD_FIELDS
        if unknown:
            raise RecordParseError(where, f"unknown field {sorted(unknown)[0]!r}")
        missing = _RECORD_FIELDS - set(raw)
        if missing:
            raise RecordParseError(where, f"missing field {sorted(missing)[0]!r}")
        if not isinstance(raw["assertions"], list):
            raise RecordParseError(f"{where}.assertions", "must be a list")
        assertions = tuple(
            _parse_assertion(a, f"{where}.assertions[{j}]")
            for j, a in enumerate(raw["assertions"])
        )
        record = PaperRecord(paper_key=raw["paper_key"], assertions=assertions)
        _check_record(record, where)
        if record.paper_key in keys_seen:
            raise RecordParseError(f"{where}.paper_key", f"duplicate paper_key {record.paper_key!r}")
        keys_seen.add(record.paper_key)
        records.append(record)
    return records


def load_records(path: str | Path) -> list[PaperRecord]:
    """Load a record document from a UTF-8 JSON file."""
    return parse_records(Path(path).read_text(encoding="utf-8"))


def aggregate(records: list[PaperRecord]) -> Mtkg:
    """Count papers per directed edge and build the knowledge graph.

    For each edge: ``w_trans`` is the number of distinct papers with an
    assertion covering that direction, and the share weights count how many
    of those papers shared the respective module. A bi assertion covers and
    shares in both directions at once.
    """
    keys_seen: set[str] = set()
    # per directed edge: the set of paper keys covering / sharing it
    trans: dict[EdgeKey, set[str]] = {}
    share_e: dict[EdgeKey, set[str]] = {}
    share_d: dict[EdgeKey, set[str]] = {}
    task_ids: set[TaskId] = set()
    for r, record in enumerate(records):
        where = f"record {record.paper_key!r}" if record.paper_key else f"records[{r}]"
        _check_record(record, where)
        if record.paper_key in keys_seen:
            raise RecordParseError(where, "duplicate paper_key")
        keys_seen.add(record.paper_key)
        for assertion in record.assertions:
            task_ids.update((assertion.from_task, assertion.to_task))
            for key in assertion.covered_directions():
                trans.setdefault(key, set()).add(record.paper_key)
                if assertion.encoder_shared:
                    share_e.setdefault(key, set()).add(record.paper_key)
                if assertion.decoder_shared:
                    share_d.setdefault(key, set()).add(record.paper_key)
    edges = {
        key: EdgeWeights(
            w_trans=len(papers),
            w_share_e=len(share_e.get(key, ())),
            w_share_d=len(share_d.get(key, ())),
        )
        for key, papers in trans.items()
    }
    return Mtkg(tasks={t: TaskInfo(t) for t in task_ids}, edges=edges)


def seed_corpus_path() -> Path:
    """Filesystem path of the packaged seed corpus."""
    return Path(resources.files("mtagd").joinpath("data/seed_corpus.json"))  # type: ignore[arg-type]


def build_seed_dataset() -> Mtkg:
    """Aggregate the packaged seed corpus into a knowledge graph."""
    text = resources.files("mtagd").joinpath("data/seed_corpus.json").read_text("utf-8")
    return aggregate(parse_records(text))
