"""Architecture synthesis: derive module wiring from the selected subgraph.

The architecture graph has one encoder and one decoder per task. Wiring is
derived from the knowledge graph restricted to the selected tasks:

* every task gets its own encoder-to-decoder pass;
* a one-way transfer edge (reverse direction absent) becomes a
  decoder-to-decoder pass in the same direction;
* a task pair shares encoders when strictly more than half of its
  transferring methods shared them, and likewise for decoders, except that
  decoder sharing additionally requires the pair to be jointly trainable
  (edges in both directions).

Thresholds are compared in exact rational arithmetic; an odd method count
can never be "half shared". Cross-decoder passes must form a DAG for the
result to be trainable step by step; a cycle is an error by default and
can be downgraded to a warning for inspection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .connect import ConnectionPlan
from .errors import DecoderCycleError
from .model import EdgeWeights, Mtkg, TaskId


class ModuleKind(Enum):
    ENCODER = "encoder"
    DECODER = "decoder"

    @property
    def tag(self) -> str:
        return "E" if self is ModuleKind.ENCODER else "D"


@dataclass(frozen=True, slots=True, order=True)
class ModuleRef:
    """One encoder or decoder module, identified by kind and task."""

    sort_rank: int = field(init=False, repr=False, compare=True)
    kind: ModuleKind = field(compare=False)
    task: TaskId = field(compare=True)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sort_rank", 0 if self.kind is ModuleKind.ENCODER else 1)

    def __str__(self) -> str:
        return f"{self.kind.tag}({self.task})"


def enc(task: TaskId) -> ModuleRef:
    return ModuleRef(kind=ModuleKind.ENCODER, task=task)


def dec(task: TaskId) -> ModuleRef:
    return ModuleRef(kind=ModuleKind.DECODER, task=task)


PassEdge = tuple[ModuleRef, ModuleRef]
SharePair = tuple[ModuleRef, ModuleRef]


def share_pair(a: ModuleRef, b: ModuleRef) -> SharePair:
    """Canonical form of an unordered sharing pair."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Mtag:
    """Multi-task architecture graph over encoder/decoder modules.

    ``r_pass`` holds directed information-passing edges, ``r_share``
    unordered parameter-sharing pairs in canonical order. Sharing pairs are
    always encoder-encoder or decoder-decoder.
    """

    tasks: tuple[TaskId, ...]
    r_pass: frozenset[PassEdge]
    r_share: frozenset[SharePair]

    def cross_decoder_passes(self) -> list[tuple[TaskId, TaskId]]:
        """Task pairs with a decoder-to-decoder pass, sorted."""
        return sorted(
            (a.task, b.task)
            for a, b in self.r_pass
            if a.kind is ModuleKind.DECODER and b.kind is ModuleKind.DECODER and a.task != b.task
        )

    def share_pairs(self, kind: ModuleKind) -> list[tuple[TaskId, TaskId]]:
        return sorted(
            (a.task, b.task) for a, b in self.r_share if a.kind is kind and b.kind is kind
        )


def validate_mtag(arch: Mtag) -> list[str]:
    """Structural invariant check; one message per violation, empty if OK."""
    violations: list[str] = []
    tasks = set(arch.tasks)
    if len(arch.tasks) != len(tasks):
        violations.append("duplicate task ids")
    for a, b in sorted(arch.r_pass):
        for m in (a, b):
            if m.task not in tasks:
                violations.append(f"pass {a}->{b} references unknown task {m.task!r}")
        if a == b:
            violations.append(f"module {a} passes to itself")
    for t in sorted(tasks):
        if (enc(t), dec(t)) not in arch.r_pass:
            violations.append(f"missing encoder-to-decoder pass for {t}")
    for a, b in sorted(arch.r_share):
        if a.kind is not b.kind:
            violations.append(f"mixed-kind sharing pair {a}~{b}")
        if a == b:
            violations.append(f"module {a} shares with itself")
        if (a, b) != share_pair(a, b):
            violations.append(f"sharing pair {a}~{b} not in canonical order")
        for m in (a, b):
            if m.task not in tasks:
                violations.append(f"share {a}~{b} references unknown task {m.task!r}")
    return violations


class SharePolicy(str, Enum):
    """How to combine the two directed edges of a pair when testing the
    sharing condition: satisfied on any direction, on all, or on summed
    weights. Ingested bi edges are symmetric, where all three coincide.
    """

    ANY = "any"
    ALL = "all"
    SUM = "sum"


@dataclass(frozen=True, slots=True)
class Comparison:
    """One evaluated sharing inequality: w_share > w_trans / 2."""

    direction: str
    w_share: int
    w_trans: int

    @property
    def threshold(self) -> Fraction:
        return Fraction(self.w_trans, 2)

    @property
    def satisfied(self) -> bool:
        return self.w_share > self.threshold

    def render(self) -> str:
        op = ">" if self.satisfied else "<="
        return f"{self.direction}: {self.w_share} {op} {self.w_trans}/2"


@dataclass(frozen=True, slots=True)
class ShareDecision:
    """Outcome and evidence of the sharing test for one task pair."""

    task_a: TaskId
    task_b: TaskId
    bidirectional: bool
    share_encoders: bool
    share_decoders: bool
    encoder_checks: tuple[Comparison, ...]
    decoder_checks: tuple[Comparison, ...]


def _directional_checks(
    a: TaskId,
    b: TaskId,
    w_ab: EdgeWeights | None,
    w_ba: EdgeWeights | None,
    pick: str,
    policy: SharePolicy,
) -> tuple[bool, tuple[Comparison, ...]]:
    if policy is SharePolicy.SUM:
        total_share = sum(getattr(w, pick) for w in (w_ab, w_ba) if w is not None)
        total_trans = sum(w.w_trans for w in (w_ab, w_ba) if w is not None)
        check = Comparison(f"{a}<->{b} summed", total_share, total_trans)
        return check.satisfied, (check,)
    checks = []
    if w_ab is not None:
        checks.append(Comparison(f"{a}->{b}", getattr(w_ab, pick), w_ab.w_trans))
    if w_ba is not None:
        checks.append(Comparison(f"{b}->{a}", getattr(w_ba, pick), w_ba.w_trans))
    results = [c.satisfied for c in checks]
    verdict = any(results) if policy is SharePolicy.ANY else all(results)
    return verdict, tuple(checks)


def evaluate_sharing(
    g: Mtkg, a: TaskId, b: TaskId, policy: SharePolicy = SharePolicy.ANY
) -> ShareDecision:
    """Decide encoder and decoder sharing for one adjacent task pair."""
    g.require_task(a)
    g.require_task(b)
    a, b = min(a, b), max(a, b)
    w_ab = g.weights(a, b)
    w_ba = g.weights(b, a)
    if w_ab is None and w_ba is None:
        raise ValueError(f"no edge between {a} and {b}")
    bidirectional = w_ab is not None and w_ba is not None
    enc_ok, enc_checks = _directional_checks(a, b, w_ab, w_ba, "w_share_e", policy)
    dec_ok, dec_checks = _directional_checks(a, b, w_ab, w_ba, "w_share_d", policy)
    return ShareDecision(
        task_a=a,
        task_b=b,
        bidirectional=bidirectional,
        share_encoders=enc_ok,
        share_decoders=bidirectional and dec_ok,
        encoder_checks=enc_checks,
        decoder_checks=dec_checks,
    )


@dataclass(frozen=True, slots=True)
class DecoderPass:
    """A derived decoder-to-decoder pass and the edge that induced it."""

    src: TaskId
    dst: TaskId
    weights: EdgeWeights


@dataclass(frozen=True, slots=True)
class SharingGroups:
    """Connected components of the sharing relation, per module kind.

    Each group is a sorted tuple of task ids whose modules of that kind all
    end up with common parameters.
    """

    encoders: tuple[tuple[TaskId, ...], ...]
    decoders: tuple[tuple[TaskId, ...], ...]


class Classification(str, Enum):
    JOINT_TRAINING = "JointTraining"
    MULTI_STEP = "MultiStep"
    HYBRID = "Hybrid"


@dataclass(frozen=True)
class DesignReport:
    """Diagnostics accompanying a designed architecture."""

    plan: ConnectionPlan
    decoder_pass_edges: tuple[DecoderPass, ...]
    share_decisions: tuple[ShareDecision, ...]
    sharing_groups: SharingGroups
    warnings: tuple[str, ...]
    classification: Classification


def _find_cycle(adjacency: dict[TaskId, list[TaskId]]) -> tuple[TaskId, ...] | None:
    """First directed cycle by DFS from sorted roots, rotated to start at
    its smallest node; None when acyclic."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in adjacency}
    stack: list[TaskId] = []

    def visit(node: TaskId) -> tuple[TaskId, ...] | None:
        color[node] = GRAY
        stack.append(node)
        for nxt in adjacency[node]:
            if color[nxt] == GRAY:
                cycle = tuple(stack[stack.index(nxt):])
                pivot = cycle.index(min(cycle))
                return cycle[pivot:] + cycle[:pivot]
            if color[nxt] == WHITE:
                found = visit(nxt)
                if found is not None:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for root in sorted(adjacency):
        if color[root] == WHITE:
            found = visit(root)
            if found is not None:
                return found
    return None


def _share_groups(pairs: list[tuple[TaskId, TaskId]]) -> tuple[tuple[TaskId, ...], ...]:
    parent: dict[TaskId, TaskId] = {}

    def find(x: TaskId) -> TaskId:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        parent[find(a)] = find(b)
    groups: dict[TaskId, list[TaskId]] = {}
    for node in parent:
        groups.setdefault(find(node), []).append(node)
    return tuple(sorted(tuple(sorted(g)) for g in groups.values()))


def sharing_groups(arch: Mtag) -> SharingGroups:
    """Partition shared modules into maximal mutually-sharing groups."""
    return SharingGroups(
        encoders=_share_groups(arch.share_pairs(ModuleKind.ENCODER)),
        decoders=_share_groups(arch.share_pairs(ModuleKind.DECODER)),
    )


def _has_decoder_chain(tasks: tuple[TaskId, ...], passes: list[tuple[TaskId, TaskId]]) -> bool:
    """Whether some task ordering makes the cross-decoder passes a superset
    of the consecutive chain, i.e. the pass digraph has a Hamiltonian path.
    """
    n = len(tasks)
    if n == 1:
        return True
    if len(passes) < n - 1:
        return False
    index = {t: i for i, t in enumerate(tasks)}
    succ = [0] * n
    indeg = [0] * n
    for a, b in passes:
        succ[index[a]] |= 1 << index[b]
        indeg[index[b]] += 1

    cycle = _find_cycle({t: sorted(b for a, b in passes if a == t) for t in tasks})
    if cycle is None:
        # A DAG admits a Hamiltonian path iff its topological order is
        # unique: Kahn's queue must hold exactly one node at every step.
        ready = [i for i in range(n) if indeg[i] == 0]
        for _ in range(n):
            if len(ready) != 1:
                return False
            current = ready.pop()
            for j in range(n):
                if succ[current] >> j & 1:
                    indeg[j] -= 1
                    if indeg[j] == 0:
                        ready.append(j)
        return True

    # Cyclic pass graphs can still contain a chain; bitmask DP over
    # (visited set, last node) states. Exponential in n, fine at the task
    # counts architectures actually have.
    full = (1 << n) - 1
    states = {(1 << i, i) for i in range(n)}
    seen = set(states)
    while states:
        next_states = set()
        for visited, last in states:
            if visited == full:
                return True
            remaining = succ[last] & ~visited
            j = 0
            while remaining:
                if remaining & 1:
                    state = (visited | (1 << j), j)
                    if state not in seen:
                        seen.add(state)
                        next_states.add(state)
                remaining >>= 1
                j += 1
        states = next_states
    return False


def classify(arch: Mtag, theta: float | Fraction = 1.0) -> Classification:
    """Classify an architecture against the two canonical training shapes.

    Joint training: decoders consume only their own encoder and at least a
    ``theta`` fraction of all cross-task module pairs share parameters.
    Multi-step: the decoders admit a full dependency chain, no decoders
    share, and encoder sharing meets ``theta``. Anything else is hybrid.
    A single-task architecture satisfies both and counts as joint.
    """
    n = len(arch.tasks)
    cross_passes = arch.cross_decoder_passes()
    n_pairs = n * (n - 1) // 2
    # Read a float theta as the decimal literal it was written as, so that
    # a share fraction of exactly 4/5 meets theta=0.8.
    theta_frac = theta if isinstance(theta, Fraction) else Fraction(str(theta))
    if not 0 < theta_frac <= 1:
        raise ValueError(f"theta must be in (0, 1], got {theta}")

    def meets(share_count: int, possible: int) -> bool:
        if possible == 0:
            return True
        return Fraction(share_count, possible) >= theta_frac

    enc_shares = arch.share_pairs(ModuleKind.ENCODER)
    dec_shares = arch.share_pairs(ModuleKind.DECODER)
    self_passes_only = not cross_passes and all(
        a.kind is ModuleKind.ENCODER and b.kind is ModuleKind.DECODER and a.task == b.task
        for a, b in arch.r_pass
    )
    if self_passes_only and meets(len(enc_shares) + len(dec_shares), 2 * n_pairs):
        return Classification.JOINT_TRAINING
    if (
        not dec_shares
        and meets(len(enc_shares), n_pairs)
        and _has_decoder_chain(arch.tasks, cross_passes)
    ):
        return Classification.MULTI_STEP
    return Classification.HYBRID


def decoder_cycle(arch: Mtag) -> tuple[TaskId, ...] | None:
    """A directed cycle among cross-decoder passes, or None."""
    adjacency: dict[TaskId, list[TaskId]] = {t: [] for t in arch.tasks}
    for a, b in arch.cross_decoder_passes():
        adjacency[a].append(b)
    return _find_cycle(adjacency)


def design(
    g: Mtkg,
    plan: ConnectionPlan,
    policy: SharePolicy = SharePolicy.ANY,
    *,
    theta: float = 1.0,
    on_cycle: str = "error",
) -> tuple[Mtag, DesignReport]:
    """Synthesize the architecture graph for a connection plan.

    Pure function of its inputs: identical arguments always produce an
    identical architecture and report. ``on_cycle`` is ``"error"`` (raise
    on cyclic decoder passes) or ``"warn"`` (emit the cyclic graph plus a
    warning).
    """
    if on_cycle not in ("error", "warn"):
        raise ValueError(f"on_cycle must be 'error' or 'warn', got {on_cycle!r}")
    overlap = set(plan.t_spec) & set(plan.t_add)
    if overlap:
        raise ValueError(f"invalid plan: t_add overlaps t_spec: {sorted(overlap)}")
    for t in plan.selected_tasks:
        g.require_task(t)

    tasks = plan.selected_tasks
    in_subgraph = set(tasks)
    sub_edges = {
        (a, b): w for (a, b), w in g.edges.items() if a in in_subgraph and b in in_subgraph
    }

    r_pass: set[PassEdge] = {(enc(t), dec(t)) for t in tasks}
    decoder_passes: list[DecoderPass] = []
    for (a, b), w in sorted(sub_edges.items()):
        if (b, a) not in sub_edges:
            r_pass.add((dec(a), dec(b)))
            decoder_passes.append(DecoderPass(src=a, dst=b, weights=w))

    warnings: list[str] = []
    adjacency: dict[TaskId, list[TaskId]] = {t: [] for t in tasks}
    for p in decoder_passes:
        adjacency[p.src].append(p.dst)
    cycle = _find_cycle(adjacency)
    if cycle is not None:
        if on_cycle == "error":
            raise DecoderCycleError(cycle)
        chain = " -> ".join(cycle + cycle[:1])
        warnings.append(f"decoder passes form a cycle: {chain}")

    pairs = sorted({(min(a, b), max(a, b)) for (a, b) in sub_edges})
    decisions: list[ShareDecision] = []
    r_share: set[SharePair] = set()
    for a, b in pairs:
        decision = evaluate_sharing(g, a, b, policy)
        decisions.append(decision)
        if decision.share_encoders:
            r_share.add(share_pair(enc(a), enc(b)))
        if decision.share_decoders:
            r_share.add(share_pair(dec(a), dec(b)))

    arch = Mtag(tasks=tasks, r_pass=frozenset(r_pass), r_share=frozenset(r_share))

    if plan.coverage < len(plan.t_spec):
        best = max(plan.components, key=lambda c: len(set(c) & set(plan.t_spec)))
        left_out = sorted(set(plan.t_spec) - set(best))
        warnings.append(
            "disconnected terminals kept with self pass only: " + ", ".join(left_out)
        )

    report = DesignReport(
        plan=plan,
        decoder_pass_edges=tuple(decoder_passes),
        share_decisions=tuple(decisions),
        sharing_groups=sharing_groups(arch),
        warnings=tuple(warnings),
        classification=classify(arch, theta),
    )
    return arch, report
