"""Graphviz DOT rendering for knowledge graphs and architectures.

Output is deterministic: nodes and edges appear in sorted order with fixed
formatting, so renders are diffable and usable as golden files.
"""

from __future__ import annotations

from .design import Mtag
from .model import Mtkg, undirected_view


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _weight_label(w) -> str:
    return f"{w.w_trans}/{w.w_share_e}/{w.w_share_d}"


def mtkg_to_dot(g: Mtkg, name: str = "mtkg") -> str:
    """Render a knowledge graph.

    Jointly-trainable pairs are drawn once with ``dir=both``; one-way
    transfers keep their arrow. Labels are ``w_trans/w_share_e/w_share_d``,
    with both directions shown when a bi pair carries asymmetric weights.
    """
    lines = [f"digraph {name} {{"]
    for info in g.tasks.values():
        attrs = ""
        if info.display_name != info.id:
            attrs = f" [label={_quote(info.display_name)}]"
        lines.append(f"  {_quote(info.id)}{attrs};")
    for a, b in sorted(undirected_view(g)):
        w_ab = g.weights(a, b)
        w_ba = g.weights(b, a)
        if w_ab is not None and w_ba is not None:
            label = _weight_label(w_ab)
            if w_ab != w_ba:
                label = f"{_weight_label(w_ab)}|{_weight_label(w_ba)}"
            lines.append(f"  {_quote(a)} -> {_quote(b)} [dir=both, label={_quote(label)}];")
        elif w_ab is not None:
            lines.append(f"  {_quote(a)} -> {_quote(b)} [label={_quote(_weight_label(w_ab))}];")
        else:
            assert w_ba is not None
            lines.append(f"  {_quote(b)} -> {_quote(a)} [label={_quote(_weight_label(w_ba))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def mtag_to_dot(arch: Mtag, name: str = "mtag") -> str:
    """Render an architecture graph.

    Encoders are boxes, decoders ellipses; information passes are solid
    arrows, sharing pairs dashed undirected edges.
    """
    lines = [f"digraph {name} {{"]
    for task in arch.tasks:
        lines.append(f'  {_quote(f"E_{task}")} [shape=box, label={_quote(f"E({task})")}];')
        lines.append(f'  {_quote(f"D_{task}")} [shape=ellipse, label={_quote(f"D({task})")}];')
    for a, b in sorted(arch.r_pass):
        lines.append(
            f"  {_quote(f'{a.kind.tag}_{a.task}')} -> {_quote(f'{b.kind.tag}_{b.task}')};"
        )
    for a, b in sorted(arch.r_share):
        lines.append(
            f"  {_quote(f'{a.kind.tag}_{a.task}')} -> {_quote(f'{b.kind.tag}_{b.task}')}"
            " [dir=none, style=dashed];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
