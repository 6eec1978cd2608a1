"""Directed weighted interlinkage network and subnetwork extraction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ConsistencyError, ParameterError

RESOLUTIONS = ("unopposed", "dominant", "tie-kept")


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float
    p: float = 0.0
    resolution: str = "unopposed"


class Strength(NamedTuple):
    k_out: int
    s_out_signed: float
    s_out_pos: float
    s_out_neg: float


class InterlinkNetwork:
    """Immutable directed weighted graph over indicator ids.

    Node order is the construction order; ``meta`` maps id to ``(label, sdg)``.
    """

    def __init__(self, nodes: Iterable[str], edges: Iterable[Edge] = (), meta=None):
        self.nodes = tuple(nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise ConsistencyError("duplicate node ids")
        self.meta = dict(meta or {})
        self.edges = tuple(edges)
        known = set(self.nodes)
        self._out: dict[str, list[Edge]] = {n: [] for n in self.nodes}
        self._in: dict[str, list[Edge]] = {n: [] for n in self.nodes}
        seen = set()
        for e in self.edges:
            if e.source not in known or e.target not in known:
                missing = e.source if e.source not in known else e.target
                raise ConsistencyError(f"edge {e.source}->{e.target} references unknown node {missing!r}")
            if e.source == e.target:
                raise ConsistencyError(f"self-loop on {e.source!r}")
            key = (e.source, e.target)
            if key in seen:
                raise ConsistencyError(f"duplicate edge {e.source}->{e.target}")
            seen.add(key)
            self._out[e.source].append(e)
            self._in[e.target].append(e)

    def __repr__(self):
        return f"InterlinkNetwork({len(self.nodes)} nodes, {len(self.edges)} edges)"

    def out_edges(self, node: str) -> list[Edge]:
        try:
            return self._out[node]
        except KeyError:
            raise KeyError(f"unknown node {node!r}") from None

    def in_edges(self, node: str) -> list[Edge]:
        try:
            return self._in[node]
        except KeyError:
            raise KeyError(f"unknown node {node!r}") from None

    def sdg(self, node: str) -> int | None:
        return self.meta.get(node, ("", None))[1]

    def label(self, node: str) -> str:
        return self.meta.get(node, ("", None))[0]

    def edge_keys(self) -> set[tuple[str, str]]:
        return {(e.source, e.target) for e in self.edges}

    def with_edges(self, edges: Iterable[Edge]) -> "InterlinkNetwork":
        return InterlinkNetwork(self.nodes, edges, self.meta)

    def isolates(self) -> list[str]:
        return [n for n in self.nodes if not self._out[n] and not self._in[n]]


def positive_subnetwork(g: InterlinkNetwork) -> InterlinkNetwork:
    """G+: same nodes, strictly positive edges only."""
    return g.with_edges(e for e in g.edges if e.weight > 0)


def strong_subnetwork(g_plus: InterlinkNetwork, tau: float = 0.9) -> InterlinkNetwork:
    """Edges of a positive network with weight >= tau (inclusive)."""
    if not 0 < tau <= 1:
        raise ParameterError(f"strong threshold must lie in (0, 1], got {tau}")
    if any(e.weight <= 0 for e in g_plus.edges):
        raise ParameterError("strong_subnetwork expects a positive-only network")
    return g_plus.with_edges(e for e in g_plus.edges if e.weight >= tau)


def sdg_order(g: InterlinkNetwork) -> list[str]:
    """Node ids sorted by SDG (missing last), then id."""
    return sorted(g.nodes, key=lambda n: (g.sdg(n) if g.sdg(n) is not None else 18, n))


def weight_matrix(g: InterlinkNetwork, order: list[str] | None = None) -> tuple[np.ndarray, list[str]]:
    """Dense matrix with rows as sources and columns as targets."""
    labels = sdg_order(g) if order is None else list(order)
    index = {n: i for i, n in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)))
    for e in g.edges:
        m[index[e.source], index[e.target]] = e.weight
    return m, labels


def from_matrix(m: np.ndarray, labels: list[str], meta=None) -> InterlinkNetwork:
    edges = [
        Edge(labels[i], labels[j], float(m[i, j]))
        for i in range(len(labels))
        for j in range(len(labels))
        if m[i, j] != 0
    ]
    return InterlinkNetwork(labels, edges, meta)


def degree_and_strength(g: InterlinkNetwork, node: str) -> Strength:
    weights = [e.weight for e in g.out_edges(node)]
    pos = sum(w for w in weights if w > 0)
    neg = sum(-w for w in weights if w < 0)
    return Strength(len(weights), pos - neg, float(pos), float(neg))
