"""Task knowledge graph: tasks, weighted transfer edges, validation, stats.

The graph is directed and multi-weighted. Each edge (src, dst) records how
many studied methods transferred knowledge in that direction (``w_trans``)
and how many of those shared encoder or decoder parameters (``w_share_e``,
``w_share_d``). A jointly-trainable task pair is stored as two directed
edges, one per direction, each with its own weights.

Values are immutable after construction. Construction is permissive: a
structurally broken graph can be built and then inspected with
:func:`validate_mtkg`, which reports violations as data instead of raising.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from collections.abc import Iterable, Mapping

from .errors import UnknownTaskError

TaskId = str

EdgeKey = tuple[TaskId, TaskId]


def task_id_problem(value: object) -> str | None:
    """Return why ``value`` is not a well-formed task id, or None if it is.

    Ids are opaque case-sensitive tokens: non-empty, no whitespace.
    """
    if not isinstance(value, str):
        return f"task id must be a string, got {type(value).__name__}"
    if not value:
        return "task id must be non-empty"
    if any(c.isspace() for c in value):
        return f"task id {value!r} contains whitespace"
    return None


@dataclass(frozen=True, slots=True)
class TaskInfo:
    """Display metadata for one task node."""

    id: TaskId
    display_name: str = ""
    domain_tags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.display_name:
            object.__setattr__(self, "display_name", self.id)
        object.__setattr__(self, "domain_tags", frozenset(self.domain_tags))


@dataclass(frozen=True, slots=True)
class EdgeWeights:
    """Per-edge method counts: transfer, encoder sharing, decoder sharing."""

    w_trans: int
    w_share_e: int = 0
    w_share_d: int = 0

    def as_triple(self) -> tuple[int, int, int]:
        return (self.w_trans, self.w_share_e, self.w_share_d)


@dataclass(frozen=True)
class Mtkg:
    """Directed multi-weighted task-relatedness graph.

    ``tasks`` maps task id to its info; ``edges`` maps ordered (src, dst)
    pairs to weights. Both mappings are kept in sorted key order so every
    traversal of the graph is deterministic.
    """

    tasks: dict[TaskId, TaskInfo] = field(default_factory=dict)
    edges: dict[EdgeKey, EdgeWeights] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tasks", dict(sorted(self.tasks.items())))
        object.__setattr__(self, "edges", dict(sorted(self.edges.items())))

    @property
    def task_ids(self) -> tuple[TaskId, ...]:
        return tuple(self.tasks)

    def has_task(self, task: TaskId) -> bool:
        return task in self.tasks

    def require_task(self, task: TaskId) -> None:
        if task not in self.tasks:
            raise UnknownTaskError(task, known=self.tasks)

    def weights(self, src: TaskId, dst: TaskId) -> EdgeWeights | None:
        return self.edges.get((src, dst))


def graph_from_edges(
    edge_weights: Mapping[EdgeKey, EdgeWeights | tuple[int, int, int]],
    tasks: Iterable[TaskInfo | TaskId] = (),
) -> Mtkg:
    """Build a graph from an edge-weight mapping.

    Tasks mentioned only as edge endpoints get default info. ``tasks`` adds
    extra (possibly isolated) nodes or overrides endpoint metadata.
    """
    infos: dict[TaskId, TaskInfo] = {}
    edges: dict[EdgeKey, EdgeWeights] = {}
    for (src, dst), w in edge_weights.items():
        if not isinstance(w, EdgeWeights):
            w = EdgeWeights(*w)
        edges[(src, dst)] = w
        for endpoint in (src, dst):
            infos.setdefault(endpoint, TaskInfo(endpoint))
    for t in tasks:
        info = t if isinstance(t, TaskInfo) else TaskInfo(t)
        infos[info.id] = info
    return Mtkg(tasks=infos, edges=edges)


def validate_mtkg(g: Mtkg) -> list[str]:
    """Check every graph invariant; return one message per violation.

    An empty list means the graph is valid. Violations are data, not
    failures: broken graphs are examinable.
    """
    violations: list[str] = []
    for key, info in sorted(g.tasks.items()):
        problem = task_id_problem(key)
        if problem is not None:
            violations.append(problem)
        if info.id != key:
            violations.append(f"task stored under {key!r} carries id {info.id!r}")
    for (src, dst), w in sorted(g.edges.items()):
        edge = f"({src},{dst})"
        if src == dst:
            violations.append(f"self-loop at {src}")
        for endpoint in dict.fromkeys((src, dst)):
            if endpoint not in g.tasks:
                violations.append(f"edge {edge} references unknown task {endpoint!r}")
        if w.w_trans < 1:
            violations.append(f"w_trans must be >= 1 on {edge}")
        if w.w_share_e < 0:
            violations.append(f"w_share_e must be >= 0 on {edge}")
        if w.w_share_d < 0:
            violations.append(f"w_share_d must be >= 0 on {edge}")
        if w.w_share_e > w.w_trans:
            violations.append(f"w_share_e exceeds w_trans on {edge}")
        if w.w_share_d > w.w_trans:
            violations.append(f"w_share_d exceeds w_trans on {edge}")
    return violations


def is_bidirectional(g: Mtkg, a: TaskId, b: TaskId) -> bool:
    """True iff both directed edges (a, b) and (b, a) exist."""
    g.require_task(a)
    g.require_task(b)
    if a == b:
        raise ValueError(f"self query: {a!r} paired with itself")
    return (a, b) in g.edges and (b, a) in g.edges


def undirected_view(g: Mtkg) -> set[tuple[TaskId, TaskId]]:
    """Collapse directions: the set of unordered task pairs with any edge.

    Pairs are returned as sorted 2-tuples. This is the connectivity
    substrate used when selecting auxiliary tasks: a one-way transfer still
    links its endpoints for subgraph-building purposes.
    """
    return {(a, b) if a <= b else (b, a) for (a, b) in g.edges}


@dataclass(frozen=True, slots=True)
class MtkgStats:
    """Counts and weight histograms for one graph.

    ``directed_edge_count == 2 * bi_pair_count + uni_edge_count`` always
    holds, so both edge-counting conventions can be read off directly.
    """

    task_count: int
    directed_edge_count: int
    bi_pair_count: int
    uni_edge_count: int
    w_trans_hist: tuple[tuple[int, int], ...]
    w_share_e_hist: tuple[tuple[int, int], ...]
    w_share_d_hist: tuple[tuple[int, int], ...]


def _histogram(values: Iterable[int]) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(Counter(values).items()))


def stats(g: Mtkg) -> MtkgStats:
    """Summarize a valid graph: node/edge counts and weight histograms."""
    bi_pairs = sum(1 for (a, b) in undirected_view(g) if (b, a) in g.edges and (a, b) in g.edges)
    directed = len(g.edges)
    return MtkgStats(
        task_count=len(g.tasks),
        directed_edge_count=directed,
        bi_pair_count=bi_pairs,
        uni_edge_count=directed - 2 * bi_pairs,
        w_trans_hist=_histogram(w.w_trans for w in g.edges.values()),
        w_share_e_hist=_histogram(w.w_share_e for w in g.edges.values()),
        w_share_d_hist=_histogram(w.w_share_d for w in g.edges.values()),
    )
