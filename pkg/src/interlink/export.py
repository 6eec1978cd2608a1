"""Byte-stable writers for CSV, JSON, GraphML and DOT outputs."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import networkx as nx

from .graph import InterlinkNetwork, weight_matrix


def fmt(x) -> str:
    """Shortest representation capped at 9 significant digits."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0:
        return "0"
    return format(x, ".9g")


def stable_float(x: float) -> float:
    return float(fmt(x))


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return path


def _jsonable(obj):
    if isinstance(obj, float):
        return stable_float(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_edges(path, g: InterlinkNetwork) -> Path:
    return write_csv(
        path,
        ["source", "target", "weight", "p", "resolution"],
        ([e.source, e.target, e.weight, e.p, e.resolution] for e in g.edges),
    )


def write_heatmap(path, g: InterlinkNetwork) -> Path:
    m, labels = weight_matrix(g)
    return write_csv(path, ["source"] + labels, ([labels[i]] + list(m[i]) for i in range(len(labels))))


def to_networkx(g: InterlinkNetwork) -> nx.DiGraph:
    isolates = set(g.isolates())
    d = nx.DiGraph()
    for n in g.nodes:
        sdg = g.sdg(n)
        d.add_node(n, label=g.label(n), sdg=-1 if sdg is None else sdg, isolate=n in isolates)
    for e in g.edges:
        d.add_edge(e.source, e.target, weight=stable_float(e.weight), p=stable_float(e.p), resolution=e.resolution)
    return d


def write_graphml(path, g: InterlinkNetwork) -> Path:
    nx.write_graphml(to_networkx(g), str(path))
    return Path(path)


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_dot(path, g: InterlinkNetwork) -> Path:
    isolates = set(g.isolates())
    lines = ["digraph interlink {"]
    for n in g.nodes:
        attrs = [f"label={_dot_id(g.label(n) or n)}"]
        if g.sdg(n) is not None:
            attrs.append(f"sdg={g.sdg(n)}")
        if n in isolates:
            attrs.append("isolate=true")
        lines.append(f"  {_dot_id(n)} [{', '.join(attrs)}];")
    for e in g.edges:
        w = fmt(e.weight)
        lines.append(f"  {_dot_id(e.source)} -> {_dot_id(e.target)} [weight={w}, label=\"{w}\"];")
    lines.append("}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
