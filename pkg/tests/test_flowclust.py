import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interlink.classify import SYNERGY, TRADEOFF, ClassificationRecord
from interlink.errors import ContractViolation, ConvergenceError, ParameterError
from interlink.flowclust import (
    cluster_report,
    map_equation,
    module_terms,
    plogp,
    search,
    stationary_flows,
)
from interlink.graph import Edge, InterlinkNetwork

from oracles import dense_codelength, dense_flows, exhaustive_minimum, network_from_dense, oracle_suite, set_partitions

SUITE = oracle_suite()


def random_weights(seed, n, density=0.4):
    rng = np.random.default_rng(seed)
    w = (rng.random((n, n)) < density) * rng.uniform(0.1, 1.0, (n, n))
    np.fill_diagonal(w, 0.0)
    return w


def test_set_partitions_counts_bell_numbers():
    assert [sum(1 for _ in set_partitions(n)) for n in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]


@pytest.mark.parametrize("name, w", SUITE, ids=[c[0] for c in SUITE])
def test_flows_match_dense_solve(name, w):
    fg = stationary_flows(network_from_dense(w))
    expected, _, _ = dense_flows(w)
    np.testing.assert_allclose(fg.visit_rates, expected, atol=1e-10)
    assert fg.residual < 1e-12


def test_flow_errors():
    with pytest.raises(ContractViolation):
        stationary_flows(InterlinkNetwork("ab", [Edge("a", "b", -0.5)]))
    with pytest.raises(ParameterError):
        stationary_flows(InterlinkNetwork("ab"), teleport=0.0)
    with pytest.raises(ConvergenceError) as info:
        stationary_flows(network_from_dense(random_weights(0, 6)), max_iter=2)
    assert info.value.residual > 0


def test_node_enter_exit_conserve_flow():
    fg = stationary_flows(network_from_dense(random_weights(1, 6)))
    total_exit = sum(fg.exit_flow(n) for n in fg.nodes)
    total_enter = sum(fg.enter_flow(n) for n in fg.nodes)
    assert total_exit == pytest.approx(total_enter, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 7), st.booleans(), st.data())
def test_map_equation_matches_dense_oracle(seed, n, recorded, data):
    w = random_weights(seed, n)
    labels = data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    fg = stationary_flows(network_from_dense(w))
    assert map_equation(fg, labels, recorded) == pytest.approx(dense_codelength(w, labels, recorded=recorded), abs=1e-10)


def test_map_equation_accepts_mapping_and_validates():
    fg = stationary_flows(network_from_dense(random_weights(2, 4)))
    labels = [0, 1, 1, 0]
    assert map_equation(fg, dict(zip(fg.nodes, labels))) == map_equation(fg, labels)
    with pytest.raises(ContractViolation):
        map_equation(fg, [0, 1])
    with pytest.raises(ContractViolation):
        map_equation(fg, {"v0": 0})


def test_one_module_codelength_is_node_entropy():
    fg = stationary_flows(network_from_dense(random_weights(3, 5)))
    entropy = -sum(plogp(p) for p in fg.visit_rates)
    assert map_equation(fg, [0] * 5) == pytest.approx(entropy, abs=1e-12)
    visit, exit_, enter = module_terms(fg, [0] * 5)
    assert exit_.tolist() == [0.0] and enter.tolist() == [0.0] and visit[0] == pytest.approx(1.0)


@pytest.mark.parametrize("recorded", [False, True])
@pytest.mark.parametrize("name, w", SUITE, ids=[c[0] for c in SUITE])
def test_search_reaches_exhaustive_minimum(name, w, recorded):
    fg = stationary_flows(network_from_dense(w))
    part = search(fg, trials=10, recorded_teleport=recorded)
    assert part.codelength <= exhaustive_minimum(w, recorded=recorded) + 1e-9
    labels = [part.assignment[n] for n in fg.nodes]
    assert map_equation(fg, labels, recorded) == pytest.approx(part.codelength, abs=1e-9)


def test_structured_partitions():
    cases = dict(SUITE)
    fg = stationary_flows(network_from_dense(cases["disconnected-4-cycles"]))
    assert search(fg).modules() == [["v0", "v1", "v2", "v3"], ["v4", "v5", "v6", "v7"]]
    fg = stationary_flows(network_from_dense(cases["weakly-coupled-3-cycles"]))
    assert search(fg).modules() == [["v0", "v1", "v2"], ["v3", "v4", "v5"]]
    fg = stationary_flows(network_from_dense(cases["edgeless-5"]))
    part = search(fg)
    assert part.num_modules == 5
    # no link flow: singletons cost nothing, one module pays the node entropy
    assert part.codelength == pytest.approx(0.0, abs=1e-12)
    assert part.one_level_codelength == pytest.approx(np.log2(5))


def test_search_is_deterministic_and_thread_independent():
    fg = stationary_flows(network_from_dense(random_weights(4, 30, 0.15)))
    a = search(fg, seed=7, trials=6)
    b = search(fg, seed=7, trials=6)
    c = search(fg, seed=7, trials=6, threads=4)
    assert a.assignment == b.assignment == c.assignment
    assert a.codelength == c.codelength and a.winning_trial == c.winning_trial


def test_canonical_labels_descend_by_flow():
    fg = stationary_flows(network_from_dense(random_weights(5, 25, 0.12)))
    part = search(fg)
    flows = [v for v, _ in part.module_flows]
    assert flows == sorted(flows, reverse=True)
    assert sorted(set(part.assignment.values())) == list(range(part.num_modules))
    assert part.codelength <= part.one_level_codelength + 1e-12


def test_history_is_monotone_and_moves_improve():
    deltas = []
    fg = stationary_flows(network_from_dense(random_weights(6, 20, 0.2)))
    part = search(fg, trials=3, on_move=deltas.append)
    assert all(b <= a + 1e-12 for a, b in zip(part.history, part.history[1:]))
    assert deltas and all(d < 0 for d in deltas)


def test_search_rejects_bad_trials():
    fg = stationary_flows(network_from_dense(random_weights(7, 3)))
    with pytest.raises(ParameterError):
        search(fg, trials=0)


def test_cluster_report_splits_multi_and_single():
    w = np.zeros((7, 7))
    w[:6, :6] = dict(SUITE)["weakly-coupled-3-cycles"]
    fg = stationary_flows(network_from_dense(w))
    part = search(fg)
    classes = [ClassificationRecord(f"v{i}", 1.0, 0.0, 1, SYNERGY if i != 3 else TRADEOFF) for i in range(7)]
    multi, single = cluster_report(part, classes, {"v0": 1.5})
    assert [e.size for e in multi] == [3, 3]
    assert [m.id for e in single for m in e.members] == ["v6"]
    assert multi[0].members[0].opsahl_score == 1.5
    assert all(e.has_synergy for e in multi)
