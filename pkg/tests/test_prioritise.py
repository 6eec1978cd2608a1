import pytest

from interlink.centrality import CentralityRecord
from interlink.classify import SYNERGY, TRADEOFF, UNCLASSIFIED, ClassificationRecord
from interlink.errors import ConsistencyError, ParameterError
from interlink.flowclust import Partition
from interlink.prioritise import prioritise, redundancy_report


def partition(assignment):
    nodes = tuple(assignment)
    k = max(assignment.values()) + 1
    return Partition(nodes, dict(assignment), 1.0, [(1 / k, 0.0)] * k, 2.0, 1, 0, 42, 0.15, False, [1.0])


def rec(node, label):
    return ClassificationRecord(node, 1.0 if label == SYNERGY else 0.0, 0.0, 1, label)


@pytest.fixture
def setup():
    assign = {"a": 0, "b": 0, "c": 0, "d": 1, "e": 1, "f": 2, "g": 3, "h": 4}
    labels = {"a": SYNERGY, "b": SYNERGY, "c": TRADEOFF, "d": TRADEOFF, "e": TRADEOFF,
              "f": SYNERGY, "g": SYNERGY, "h": UNCLASSIFIED}
    classes = [rec(n, labels[n]) for n in assign]
    cent = [
        CentralityRecord("b", 3, 2.7, 0.5, 2.846),
        CentralityRecord("a", 2, 1.9, 0.5, 1.949),
        CentralityRecord("g", 1, 0.9, 0.5, 0.949),
        CentralityRecord("f", 0, 0.0, 0.5, 0.0),
    ]
    return partition(assign), classes, cent


def test_one_pick_per_cluster_then_isolated_by_sdg(setup):
    part, classes, cent = setup
    out = prioritise(part, classes, cent, {"f": 9, "g": 2})
    assert [(p.category, p.module, p.id) for p in out.picks] == [
        ("cluster", 0, "b"),
        ("isolated", 3, "g"),
        ("isolated", 2, "f"),
    ]
    assert out.skipped_clusters == [1]
    flagged = {p.id: p.flagged for p in out.picks}
    assert flagged == {"b": False, "g": False, "f": True}


def test_cluster_ties_break_by_id(setup):
    part, classes, _ = setup
    cent = [CentralityRecord(n, 1, 1.0, 0.5, 1.0) for n in ("b", "a", "f", "g")]
    assert prioritise(part, classes, cent).picks[0].id == "a"


def test_consistency_errors(setup):
    part, classes, cent = setup
    with pytest.raises(ConsistencyError):
        prioritise(part, classes[:-1], cent)
    with pytest.raises(ConsistencyError):
        prioritise(part, classes, cent[1:])


def test_redundancy_report(setup):
    part, _, cent = setup
    red = redundancy_report(cent, part, top_n=3)
    assert red.memberships == {0: 2, 3: 1}
    assert red.modal_module == 0 and red.concentration == pytest.approx(2 / 3)
    for bad in (0, 5):
        with pytest.raises(ParameterError):
            redundancy_report(cent, part, top_n=bad)
