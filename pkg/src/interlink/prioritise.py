"""Cluster-diversified selection of synergy-dominated indicators."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .centrality import CentralityRecord
from .classify import ClassificationRecord
from .errors import ConsistencyError, ParameterError
from .flowclust import Partition


@dataclass(frozen=True)
class Pick:
    category: str  # "cluster" | "isolated"
    module: int
    id: str
    sdg: int | None
    opsahl_score: float
    rationale: str
    flagged: bool = False


@dataclass
class PrioritisedSet:
    picks: list[Pick]
    skipped_clusters: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class RedundancySummary:
    top_n: int
    memberships: dict[int, int]
    modal_module: int
    concentration: float


def prioritise(
    partition: Partition,
    classes: Sequence[ClassificationRecord],
    centrality: Sequence[CentralityRecord],
    sdg: dict[str, int | None] | None = None,
) -> PrioritisedSet:
    """One top-scoring synergy-dominated member per multi-indicator module,
    followed by every synergy-dominated singleton."""
    label = {c.id: c for c in classes}
    score = {c.id: c for c in centrality}
    sdg = sdg or {}
    for node in partition.nodes:
        if node not in label:
            raise ConsistencyError(f"{node!r} is in the partition but has no classification")
        if label[node].synergy and node not in score:
            raise ConsistencyError(f"synergy-dominated {node!r} has no centrality record")

    cluster_picks, isolated, skipped = [], [], []
    for m, members in enumerate(partition.modules()):
        syn = [n for n in members if label[n].synergy]
        if len(members) == 1:
            if syn:
                n = syn[0]
                s = score[n]
                isolated.append(
                    Pick(
                        "isolated",
                        m,
                        n,
                        sdg.get(n),
                        s.score,
                        "single-indicator cluster, synergy-dominated"
                        + ("; no positive out-links" if s.k_out == 0 else ""),
                        flagged=s.k_out == 0,
                    )
                )
            continue
        if not syn:
            skipped.append(m)
            continue
        best = min(syn, key=lambda n: (-score[n].score, n))
        cluster_picks.append(
            Pick(
                "cluster",
                m,
                best,
                sdg.get(best),
                score[best].score,
                f"highest Opsahl score among {len(syn)} synergy-dominated of {len(members)} members",
            )
        )
    isolated.sort(key=lambda p: (p.sdg if p.sdg is not None else 18, p.id))
    return PrioritisedSet(cluster_picks + isolated, skipped)


def redundancy_report(
    ranking: Sequence[CentralityRecord], partition: Partition, top_n: int = 10
) -> RedundancySummary:
    """Module memberships of the top-n ranked indicators and their concentration."""
    if top_n < 1 or top_n > len(ranking):
        raise ParameterError(f"top_n must lie in [1, {len(ranking)}], got {top_n}")
    counts = Counter(partition.assignment[r.id] for r in ranking[:top_n])
    modal, modal_count = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return RedundancySummary(top_n, dict(sorted(counts.items())), modal, modal_count / top_n)
