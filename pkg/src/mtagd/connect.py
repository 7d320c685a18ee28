"""Auxiliary-task selection: connect the specified tasks with fewest extras.

Given terminals (the tasks the user wants trained together), pick the
smallest set of additional tasks whose inclusion maximizes how many
terminals end up in a single connected component of the induced subgraph.
Connectivity ignores edge direction: a one-way transfer still links two
tasks for subgraph-selection purposes.

The objective is lexicographic: maximize coverage first, then minimize the
number of added tasks, then prefer the lexicographically smallest sorted
addition set. ``connect_exact`` solves it by iterative deepening on the
addition count; ``brute_force_connect`` is the independent enumeration
oracle; ``connect_greedy`` is a cheap path-merging heuristic for graphs
where exact search is infeasible.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import combinations
from collections.abc import Iterable

from .errors import OracleSizeError, UnknownTaskError
from .model import Mtkg, TaskId, undirected_view

ORACLE_MAX_TASKS = 20


@dataclass(frozen=True, slots=True)
class ConnectionPlan:
    """Result of auxiliary-task selection.

    ``coverage`` counts the terminals inside the component of the induced
    subgraph on ``t_spec + t_add`` that contains the most terminals.
    ``components`` is the full partition of those tasks. ``exact`` is False
    only for heuristic plans; a budget-limited exact search stays exact and
    reports the shortfall in ``note``.
    """

    t_spec: tuple[TaskId, ...]
    t_add: tuple[TaskId, ...]
    coverage: int
    components: tuple[tuple[TaskId, ...], ...]
    exact: bool
    note: str | None = None

    @property
    def selected_tasks(self) -> tuple[TaskId, ...]:
        return tuple(sorted(set(self.t_spec) | set(self.t_add)))


class _UnionFind:
    """Disjoint sets with path compression, keyed by task id."""

    def __init__(self, items: Iterable[TaskId]):
        self.parent = {x: x for x in items}

    def find(self, x: TaskId) -> TaskId:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: TaskId, y: TaskId) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx


def _check_terminals(g: Mtkg, t_spec: Iterable[TaskId]) -> tuple[TaskId, ...]:
    terminals = tuple(sorted(set(t_spec)))
    if not terminals:
        raise ValueError("t_spec must be non-empty")
    for t in terminals:
        if not g.has_task(t):
            raise UnknownTaskError(t, known=g.tasks)
    return terminals


def _adjacency(g: Mtkg) -> dict[TaskId, tuple[TaskId, ...]]:
    neighbors: dict[TaskId, set[TaskId]] = {t: set() for t in g.tasks}
    for a, b in undirected_view(g):
        neighbors[a].add(b)
        neighbors[b].add(a)
    return {t: tuple(sorted(ns)) for t, ns in sorted(neighbors.items())}


def _components_of(
    nodes: frozenset[TaskId], adj: dict[TaskId, tuple[TaskId, ...]]
) -> tuple[tuple[TaskId, ...], ...]:
    """Connected components of the induced subgraph, each sorted, all sorted."""
    uf = _UnionFind(nodes)
    for a in nodes:
        for b in adj[a]:
            if b in nodes:
                uf.union(a, b)
    groups: dict[TaskId, list[TaskId]] = {}
    for n in nodes:
        groups.setdefault(uf.find(n), []).append(n)
    return tuple(sorted(tuple(sorted(group)) for group in groups.values()))


def _coverage_of(
    nodes: frozenset[TaskId],
    adj: dict[TaskId, tuple[TaskId, ...]],
    terminals: frozenset[TaskId],
) -> int:
    uf = _UnionFind(nodes)
    for a in nodes:
        for b in adj[a]:
            if b in nodes:
                uf.union(a, b)
    counts: dict[TaskId, int] = {}
    for t in terminals:
        root = uf.find(t)
        counts[root] = counts.get(root, 0) + 1
    return max(counts.values())


def _make_plan(
    g: Mtkg,
    terminals: tuple[TaskId, ...],
    t_add: Iterable[TaskId],
    exact: bool,
    note: str | None = None,
) -> ConnectionPlan:
    adj = _adjacency(g)
    t_add = tuple(sorted(t_add))
    nodes = frozenset(terminals) | frozenset(t_add)
    components = _components_of(nodes, adj)
    coverage = max(len(set(c) & set(terminals)) for c in components)
    return ConnectionPlan(
        t_spec=terminals,
        t_add=t_add,
        coverage=coverage,
        components=components,
        exact=exact,
        note=note,
    )


def _max_attainable_coverage(
    adj: dict[TaskId, tuple[TaskId, ...]], terminals: frozenset[TaskId]
) -> tuple[int, list[TaskId]]:
    """Best possible coverage plus the pruned candidate pool.

    Coverage can never exceed the terminal count of the richest component
    of the full graph. Only non-terminals inside components holding at
    least two terminals can be part of a minimal useful addition set, so
    the search pool is restricted to those.
    """
    full_components = _components_of(frozenset(adj), adj)
    target = 1
    pool: set[TaskId] = set()
    for component in full_components:
        members = set(component)
        n_terms = len(members & terminals)
        target = max(target, n_terms)
        if n_terms >= 2:
            pool.update(members - terminals)
    return target, sorted(pool)


def connect_exact(
    g: Mtkg, t_spec: Iterable[TaskId], budget: int | None = None
) -> ConnectionPlan:
    """Optimal auxiliary-task selection by iterative deepening.

    Addition sets are enumerated by increasing size, lexicographically
    within each size, keeping the first set that strictly improves
    coverage. The first size at which the attainable maximum is reached is
    therefore minimal, and the kept set is the lexicographic tie-break
    winner. With a ``budget``, sizes beyond it are not explored; the best
    plan found is still exact for the restricted problem and carries a note
    when the unrestricted maximum was out of reach.
    """
    terminals = _check_terminals(g, t_spec)
    term_set = frozenset(terminals)
    adj = _adjacency(g)
    target, pool = _max_attainable_coverage(adj, term_set)
    k_cap = len(pool) if budget is None else min(max(budget, 0), len(pool))

    best_cov = -1
    best_add: tuple[TaskId, ...] = ()
    for k in range(k_cap + 1):
        for combo in combinations(pool, k):
            cov = _coverage_of(term_set | frozenset(combo), adj, term_set)
            if cov > best_cov:
                best_cov, best_add = cov, combo
        if best_cov >= target:
            break

    note = None
    if best_cov < target:
        note = (
            f"budget {budget} reached: coverage {best_cov} of attainable {target}"
        )
    return _make_plan(g, terminals, best_add, exact=True, note=note)


def brute_force_connect(g: Mtkg, t_spec: Iterable[TaskId]) -> ConnectionPlan:
    """Exhaustive oracle over every subset of non-terminal tasks.

    Independent of the production solver: no candidate pruning, plain
    breadth-first connectivity. Guarded to small graphs.
    """
    if len(g.tasks) > ORACLE_MAX_TASKS:
        raise OracleSizeError(f"oracle size limit: {len(g.tasks)} tasks > {ORACLE_MAX_TASKS}")
    terminals = _check_terminals(g, t_spec)
    term_set = set(terminals)
    candidates = sorted(set(g.tasks) - term_set)

    def bfs_coverage(nodes: set[TaskId]) -> int:
        best = 0
        seen: set[TaskId] = set()
        for start in sorted(nodes):
            if start in seen:
                continue
            queue = [start]
            seen.add(start)
            reached = 0
            while queue:
                current = queue.pop()
                if current in term_set:
                    reached += 1
                for a, b in g.edges:
                    other = None
                    if a == current and b in nodes:
                        other = b
                    elif b == current and a in nodes:
                        other = a
                    if other is not None and other not in seen:
                        seen.add(other)
                        queue.append(other)
            best = max(best, reached)
        return best

    target = bfs_coverage(term_set | set(candidates))
    best_cov = -1
    best_add: tuple[TaskId, ...] = ()
    for k in range(len(candidates) + 1):
        for combo in combinations(candidates, k):
            cov = bfs_coverage(term_set | set(combo))
            if cov > best_cov:
                best_cov, best_add = cov, combo
        if best_cov >= target:
            break
    return _make_plan(g, terminals, best_add, exact=True)


def _cheapest_link(
    comp_a: tuple[TaskId, ...],
    comp_b: tuple[TaskId, ...],
    adj: dict[TaskId, tuple[TaskId, ...]],
    selected: set[TaskId],
) -> tuple[int, tuple[TaskId, ...]] | None:
    """Cheapest path between two node sets, cost = new nodes used.

    Deterministic Dijkstra keyed on (cost, path), so ties fall to the
    lexicographically smallest node sequence.
    """
    targets = set(comp_b)
    heap: list[tuple[int, tuple[TaskId, ...]]] = [(0, (n,)) for n in sorted(comp_a)]
    heapq.heapify(heap)
    settled: set[TaskId] = set()
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in settled:
            continue
        settled.add(node)
        if node in targets:
            return cost, tuple(n for n in path if n not in selected)
        for nxt in adj[node]:
            if nxt in settled:
                continue
            step = 0 if nxt in selected else 1
            heapq.heappush(heap, (cost + step, path + (nxt,)))
    return None


def connect_greedy(g: Mtkg, t_spec: Iterable[TaskId]) -> ConnectionPlan:
    """Heuristic selection: repeatedly merge the two terminal components
    reachable through the fewest new nodes (ties lexicographic).

    Never reports worse coverage than adding nothing; may add more tasks
    than the exact solver.
    """
    terminals = _check_terminals(g, t_spec)
    term_set = frozenset(terminals)
    adj = _adjacency(g)
    selected: set[TaskId] = set(terminals)

    while True:
        components = _components_of(frozenset(selected), adj)
        terminal_comps = [c for c in components if set(c) & term_set]
        if len(terminal_comps) <= 1:
            break
        best: tuple[int, tuple[TaskId, ...]] | None = None
        for comp_a, comp_b in combinations(terminal_comps, 2):
            link = _cheapest_link(comp_a, comp_b, adj, selected)
            if link is None:
                continue
            cost, new_nodes = link
            candidate = (cost, tuple(sorted(new_nodes)))
            if best is None or candidate < best:
                best = candidate
        if best is None:
            break
        selected.update(best[1])

    return _make_plan(g, terminals, selected - term_set, exact=False)
