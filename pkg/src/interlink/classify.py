"""Synergy / trade-off classification from outgoing strength shares."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .graph import InterlinkNetwork, degree_and_strength

SYNERGY = "synergy-dominated"
TRADEOFF = "trade-off-dominated"
UNCLASSIFIED = "unclassified-no-outflow"
LABELS = (SYNERGY, TRADEOFF, UNCLASSIFIED)


@dataclass(frozen=True)
class ClassificationRecord:
    id: str
    s_plus: float
    s_minus: float
    k_out: int
    label: str

    @property
    def synergy(self) -> bool:
        return self.label == SYNERGY


@dataclass
class ClassificationSummary:
    counts: dict[str, int]
    by_sdg: dict[int | None, dict[str, int]]


def classify_node(g: InterlinkNetwork, node: str) -> ClassificationRecord:
    """Positive/negative shares of total absolute outgoing weight.

    A node with no outgoing edges is ``unclassified-no-outflow`` and gets
    zero shares, since both ratios are 0/0 there.
    """
    st = degree_and_strength(g, node)
    total = st.s_out_pos + st.s_out_neg
    if st.k_out == 0 or total == 0:
        return ClassificationRecord(node, 0.0, 0.0, st.k_out, UNCLASSIFIED)
    s_plus = st.s_out_pos / total
    s_minus = st.s_out_neg / total
    return ClassificationRecord(node, s_plus, s_minus, st.k_out, SYNERGY if s_plus >= 0.5 else TRADEOFF)


def classify_all(g: InterlinkNetwork) -> tuple[list[ClassificationRecord], ClassificationSummary]:
    records = [classify_node(g, n) for n in g.nodes]
    counts = Counter({label: 0 for label in LABELS})
    counts.update(r.label for r in records)
    by_sdg: dict[int | None, dict[str, int]] = {}
    for r in records:
        row = by_sdg.setdefault(g.sdg(r.id), {label: 0 for label in LABELS})
        row[r.label] += 1
    return records, ClassificationSummary(dict(counts), by_sdg)
