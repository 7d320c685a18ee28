"""Exception types shared across the package."""

from __future__ import annotations

import difflib
from collections.abc import Iterable


class MtagdError(Exception):
    """Base class for all errors raised by this package."""


class UnknownTaskError(MtagdError):
    """A referenced task id does not exist in the graph."""

    def __init__(self, task: str, known: Iterable[str] = ()):
        self.task = task
        self.suggestions = difflib.get_close_matches(task, list(known), n=3)
        msg = f"unknown task {task!r}"
        if self.suggestions:
            msg += " (did you mean: " + ", ".join(self.suggestions) + "?)"
        super().__init__(msg)


class RecordParseError(MtagdError):
    """A paper-record document or one of its records is invalid.

    ``location`` points at the offending element, e.g.
    ``records[3].assertions[1].direction``.
    """

    def __init__(self, location: str, reason: str):
        self.location = location
        self.reason = reason
        super().__init__(f"{location}: {reason}")


class DocumentError(MtagdError):
    """A serialized graph document is malformed or violates an invariant."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class DecoderCycleError(MtagdError):
    """The derived decoder-to-decoder passes contain a directed cycle."""

    def __init__(self, cycle: tuple[str, ...]):
        self.cycle = cycle
        chain = " -> ".join(cycle + cycle[:1])
        super().__init__(f"decoder passes form a cycle: {chain}")


class OracleSizeError(MtagdError):
    """The brute-force oracle was asked to handle a graph above its size cap."""
