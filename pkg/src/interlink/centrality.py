"""Opsahl weighted out-degree centrality on the positive network."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .classify import ClassificationRecord
from .errors import ContractViolation, ParameterError
from .graph import InterlinkNetwork


@dataclass(frozen=True)
class CentralityRecord:
    id: str
    k_out: int
    s_out: float
    alpha: float
    score: float


def opsahl_score(k: int, s: float, alpha: float) -> float:
    """``k**(1-alpha) * s**alpha``, zero whenever k is zero."""
    if not 0 <= alpha <= 1:
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")
    if k == 0:
        return 0.0
    if alpha == 0:
        return float(k)
    if alpha == 1:
        return float(s)
    if alpha == 0.5:
        return math.sqrt(k * s)
    return k ** (1 - alpha) * s**alpha


def opsahl_out(g_plus: InterlinkNetwork, node: str, alpha: float = 0.5) -> CentralityRecord:
    edges = g_plus.out_edges(node)
    if any(e.weight < 0 for e in edges):
        raise ContractViolation(f"negative edge out of {node!r}; centrality needs the positive network")
    k = len(edges)
    s = float(sum(e.weight for e in edges))
    return CentralityRecord(node, k, s, alpha, opsahl_score(k, s, alpha))


def rank_synergistic(
    g_plus: InterlinkNetwork, classes: list[ClassificationRecord], alpha: float = 0.5
) -> list[CentralityRecord]:
    """Score synergy-dominated nodes only; descending score, ties by id."""
    records = [opsahl_out(g_plus, c.id, alpha) for c in classes if c.synergy]
    return sorted(records, key=lambda r: (-r.score, r.id))
