"""Snapshot serialization: JSON (round-trippable) and Graphviz DOT."""
from __future__ import annotations

import json
from typing import Optional

from .graph import Snapshot

SCHEMA = "procmap-snapshot/1"
START_NODE = "__start__"
END_NODE = "__end__"


def to_dict(snap: Snapshot) -> dict:
    d = {
        "schema": SCHEMA,
        "idx": snap.idx,
        "nodes": {a: snap.nodes[a] for a in sorted(snap.nodes)},
        "arcs": [[s, t, snap.arcs[(s, t)]] for s, t in sorted(snap.arcs)],
        "meta": {k: snap.meta[k] for k in sorted(snap.meta)},
    }
    if snap.starts is not None:
        d["starts"] = {a: snap.starts[a] for a in sorted(snap.starts)}
    if snap.ends is not None:
        d["ends"] = {a: snap.ends[a] for a in sorted(snap.ends)}
    return d


def to_json(snap: Snapshot) -> str:
    return json.dumps(to_dict(snap), indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def from_dict(d: dict) -> Snapshot:
    if d.get("schema") != SCHEMA:
        raise ValueError(f"not a {SCHEMA} document")
    arcs = {}
    for s, t, f in d["arcs"]:
        arcs[(s, t)] = int(f)
    return Snapshot(
        nodes={a: int(f) for a, f in d["nodes"].items()},
        arcs=arcs,
        idx=int(d.get("idx", 0)),
        starts=d.get("starts"),
        ends=d.get("ends"),
        meta=d.get("meta", {}),
    )


def from_json(text: str) -> Snapshot:
    try:
        return from_dict(json.loads(text))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed snapshot: {exc}") from None


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _penwidth(f: int, top: int) -> str:
    return f"{1.0 + 5.0 * f / top:.2f}" if top else "1.00"


def to_dot(snap: Snapshot, with_start_end: bool = False, name: str = "process_map") -> str:
    """Render a snapshot as a DOT digraph.

    Edges are labeled with their frequency and drawn thicker the more
    frequent they are relative to the heaviest edge.  ``with_start_end``
    adds virtual start/end nodes; it needs case-boundary counts in the
    snapshot.
    """
    if with_start_end and (snap.starts is None or snap.ends is None):
        raise ValueError("snapshot carries no case start/end counts")
    edges = [(s, t, f) for (s, t), f in sorted(snap.arcs.items())]
    if with_start_end:
        edges += [(START_NODE, a, f) for a, f in sorted(snap.starts.items())]
        edges += [(a, END_NODE, f) for a, f in sorted(snap.ends.items())]
    top = max((f for _, _, f in edges), default=0)
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=box, style=rounded];"]
    if with_start_end:
        lines.append(f'  {_quote(START_NODE)} [label="", shape=circle, style=filled, fillcolor=green];')
        lines.append(f'  {_quote(END_NODE)} [label="", shape=doublecircle, style=filled, fillcolor=red];')
    for a in sorted(snap.nodes):
        label = _quote(f"{a}\n{snap.nodes[a]}")
        lines.append(f"  {_quote(a)} [label={label}];")
    for s, t, f in edges:
        lines.append(f'  {_quote(s)} -> {_quote(t)} [label="{f}", penwidth={_penwidth(f, top)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_snapshot(snap: Snapshot, path, fmt: str = "json", with_start_end: bool = False,
                   encoding: Optional[str] = "utf-8"):
    text = to_json(snap) if fmt == "json" else to_dot(snap, with_start_end)
    with open(path, "w", encoding=encoding, newline="\n") as fh:
        fh.write(text)
