"""Two-level map-equation clustering of directed weighted networks.

Flow model: a random walker follows out-links in proportion to their weight
and with probability ``teleport`` (always, on a dangling node) jumps to a
uniformly chosen node. Visit rates are the stationary distribution of that
walk. By default teleportation steps are *unrecorded*: only link-following
steps contribute to module exit and enter flows. ``recorded_teleport=True``
also counts teleport jumps that cross a module boundary.

The codelength of a partition M is

    L(M) = q H(Q) + sum_m p_m H(P_m)

written in plogp form as

    plogp(sum enter_m) - sum plogp(enter_m) - sum plogp(exit_m)
        - sum plogp(p_a) + sum plogp(exit_m + p_m)
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .classify import SYNERGY, ClassificationRecord
from .errors import ContractViolation, ConvergenceError, ParameterError
from .graph import InterlinkNetwork

log = logging.getLogger(__name__)

MOVE_EPS = 1e-10


def plogp(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def _plogp_arr(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = x[pos] * np.log2(x[pos])
    return out


@dataclass(frozen=True)
class FlowGraph:
    nodes: tuple[str, ...]
    transition: np.ndarray  # row-normalized weights, zero rows for dangling nodes
    visit_rates: np.ndarray
    teleport: float
    residual: float
    iterations: int

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def dangling(self) -> np.ndarray:
        return self.transition.sum(axis=1) == 0

    @property
    def link_flow(self) -> np.ndarray:
        """Flow along each link from link-following steps only."""
        return (1 - self.teleport) * self.visit_rates[:, None] * self.transition

    @property
    def teleport_source(self) -> np.ndarray:
        """Per-node flow that leaves by teleportation."""
        rate = np.where(self.dangling, 1.0, self.teleport)
        return self.visit_rates * rate

    def exit_flow(self, node: str) -> float:
        i = self.nodes.index(node)
        f = self.link_flow
        return float(f[i].sum() - f[i, i])

    def enter_flow(self, node: str) -> float:
        i = self.nodes.index(node)
        f = self.link_flow
        return float(f[:, i].sum() - f[i, i])


@dataclass
class Partition:
    nodes: tuple[str, ...]
    assignment: dict[str, int]
    codelength: float
    module_flows: list[tuple[float, float]]  # (visit rate, exit rate) per module
    one_level_codelength: float
    num_trials: int
    winning_trial: int
    seed: int
    teleport: float
    recorded_teleport: bool
    history: list[float] = field(default_factory=list)

    @property
    def num_modules(self) -> int:
        return len(self.module_flows)

    def modules(self) -> list[list[str]]:
        mods: list[list[str]] = [[] for _ in range(self.num_modules)]
        for node in self.nodes:
            mods[self.assignment[node]].append(node)
        return mods


def _weight_matrix(g: InterlinkNetwork) -> np.ndarray:
    index = {n: i for i, n in enumerate(g.nodes)}
    w = np.zeros((len(g.nodes), len(g.nodes)))
    for e in g.edges:
        if e.weight < 0:
            raise ContractViolation(f"negative edge {e.source}->{e.target}; flows need a positive network")
        w[index[e.source], index[e.target]] = e.weight
    return w


def stationary_flows(
    g: InterlinkNetwork,
    teleport: float = 0.15,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> FlowGraph:
    """Power iteration for the teleported random walk's visit rates."""
    if not 0 < teleport < 1:
        raise ParameterError(f"teleport rate must lie in (0, 1), got {teleport}")
    w = _weight_matrix(g)
    n = len(g.nodes)
    if n == 0:
        raise ParameterError("cannot compute flows on an empty network")
    out = w.sum(axis=1)
    dangling = out == 0
    trans = np.divide(w, out[:, None], out=np.zeros_like(w), where=~dangling[:, None])
    p = np.full(n, 1.0 / n)
    residual = math.inf
    for it in range(1, max_iter + 1):
        new = (1 - teleport) * (trans.T @ p + p[dangling].sum() / n) + teleport / n
        new /= new.sum()
        residual = float(np.abs(new - p).sum())
        p = new
        if residual < tol:
            break
    else:
        raise ConvergenceError(
            f"power iteration did not converge in {max_iter} iterations (residual {residual:.3e})",
            residual=residual,
        )
    return FlowGraph(tuple(g.nodes), trans, p, teleport, residual, it)


def _as_labels(fg: FlowGraph, assignment) -> np.ndarray:
    if isinstance(assignment, Mapping):
        if set(assignment) != set(fg.nodes):
            raise ContractViolation("assignment must cover exactly the flow graph's nodes")
        labels = [assignment[n] for n in fg.nodes]
    else:
        labels = list(assignment)
        if len(labels) != fg.n:
            raise ContractViolation(f"assignment has {len(labels)} entries for {fg.n} nodes")
    if not labels:
        raise ContractViolation("empty module index set")
    _, compact = np.unique(np.asarray(labels), return_inverse=True)
    return compact


def module_terms(fg: FlowGraph, assignment, recorded_teleport: bool = False):
    """Per-module (visit, exit, enter) flow arrays for an assignment."""
    labels = _as_labels(fg, assignment)
    k = int(labels.max()) + 1
    onehot = np.zeros((fg.n, k))
    onehot[np.arange(fg.n), labels] = 1.0
    f = fg.link_flow
    between = onehot.T @ f @ onehot  # module-to-module link flow
    visit = onehot.T @ fg.visit_rates
    exit_ = between.sum(axis=1) - np.diag(between)
    enter = between.sum(axis=0) - np.diag(between)
    if recorded_teleport:
        tsrc = onehot.T @ fg.teleport_source
        share = onehot.sum(axis=0) / fg.n
        exit_ = exit_ + tsrc * (1 - share)
        enter = enter + (tsrc.sum() - tsrc) * share
    return visit, np.clip(exit_, 0, None), np.clip(enter, 0, None)


def map_equation(fg: FlowGraph, assignment, recorded_teleport: bool = False) -> float:
    """Two-level codelength in bits of ``assignment`` (sequence in node order or mapping)."""
    visit, exit_, enter = module_terms(fg, assignment, recorded_teleport)
    return float(
        plogp(enter.sum())
        - _plogp_arr(enter).sum()
        - _plogp_arr(exit_).sum()
        - _plogp_arr(fg.visit_rates).sum()
        + _plogp_arr(exit_ + visit).sum()
    )


# --- greedy search ----------------------------------------------------------


class _Level:
    """Flow graph over (super)nodes: flows, teleport mass and link flows."""

    def __init__(self, flow, tsrc, tweight, out_links, in_links):
        self.flow = flow
        self.tsrc = tsrc
        self.tweight = tweight
        self.out_links = out_links  # list[dict[int, float]] without self links
        self.in_links = in_links
        self.out_total = [sum(d.values()) for d in out_links]
        self.in_total = [sum(d.values()) for d in in_links]

    @property
    def n(self):
        return len(self.flow)

    @classmethod
    def from_flowgraph(cls, fg: FlowGraph) -> "_Level":
        f = fg.link_flow
        n = fg.n
        out_links = [dict() for _ in range(n)]
        in_links = [dict() for _ in range(n)]
        for i, j in zip(*np.nonzero(f)):
            if i != j:
                out_links[i][int(j)] = float(f[i, j])
                in_links[j][int(i)] = float(f[i, j])
        return cls(
            [float(x) for x in fg.visit_rates],
            [float(x) for x in fg.teleport_source],
            [1.0 / n] * n,
            out_links,
            in_links,
        )

    def aggregate(self, labels: list[int]) -> "_Level":
        k = max(labels) + 1
        flow, tsrc, tw = [0.0] * k, [0.0] * k, [0.0] * k
        out_links = [dict() for _ in range(k)]
        in_links = [dict() for _ in range(k)]
        for a in range(self.n):
            m = labels[a]
            flow[m] += self.flow[a]
            tsrc[m] += self.tsrc[a]
            tw[m] += self.tweight[a]
            for b, w in self.out_links[a].items():
                mb = labels[b]
                if mb != m:
                    out_links[m][mb] = out_links[m].get(mb, 0.0) + w
                    in_links[mb][m] = in_links[mb].get(m, 0.0) + w
        return _Level(flow, tsrc, tw, out_links, in_links)


class _Modules:
    """Running module sums with O(1) codelength deltas for single moves."""

    def __init__(self, level: _Level, labels: list[int], recorded: bool):
        self.level = level
        self.recorded = recorded
        self.tsrc_total = sum(level.tsrc)
        n = level.n
        self.labels = list(labels)
        size = n + 1
        self.flow = [0.0] * size
        self.tsrc = [0.0] * size
        self.tweight = [0.0] * size
        self.link_exit = [0.0] * size
        self.link_enter = [0.0] * size
        self.members = [0] * size
        for a in range(n):
            m = self.labels[a]
            self.flow[m] += level.flow[a]
            self.tsrc[m] += level.tsrc[a]
            self.tweight[m] += level.tweight[a]
            self.members[m] += 1
            for b, w in level.out_links[a].items():
                if self.labels[b] != m:
                    self.link_exit[m] += w
                    self.link_enter[self.labels[b]] += w
        self.enter_sum = 0.0
        self.sum_plogp_enter = 0.0
        self.sum_plogp_exit = 0.0
        self.sum_plogp_exit_flow = 0.0
        for m in range(size):
            if self.members[m]:
                ex, en = self._exit_enter(self.link_exit[m], self.link_enter[m], self.tsrc[m], self.tweight[m])
                self.enter_sum += en
                self.sum_plogp_enter += plogp(en)
                self.sum_plogp_exit += plogp(ex)
                self.sum_plogp_exit_flow += plogp(ex + self.flow[m])

    def _exit_enter(self, link_exit, link_enter, tsrc, tweight):
        if self.recorded:
            link_exit += tsrc * (1 - tweight)
            link_enter += (self.tsrc_total - tsrc) * tweight
        return max(link_exit, 0.0), max(link_enter, 0.0)

    def codelength_wo_nodes(self) -> float:
        return plogp(self.enter_sum) - self.sum_plogp_enter - self.sum_plogp_exit + self.sum_plogp_exit_flow

    def _module_state(self, m):
        ex, en = self._exit_enter(self.link_exit[m], self.link_enter[m], self.tsrc[m], self.tweight[m])
        return ex, en, self.flow[m]

    def delta(self, a: int, i: int, j: int, wout_i, win_i, wout_j, win_j):
        """Codelength change and new module sums for moving ``a`` from ``i`` to ``j``."""
        lv = self.level
        fa, ta, ua = lv.flow[a], lv.tsrc[a], lv.tweight[a]
        oa, ia = lv.out_total[a], lv.in_total[a]
        new_i = (
            self.link_exit[i] - oa + wout_i + win_i,
            self.link_enter[i] - ia + win_i + wout_i,
            self.flow[i] - fa,
            self.tsrc[i] - ta,
            self.tweight[i] - ua,
        )
        new_j = (
            self.link_exit[j] + oa - wout_j - win_j,
            self.link_enter[j] + ia - win_j - wout_j,
            self.flow[j] + fa,
            self.tsrc[j] + ta,
            self.tweight[j] + ua,
        )
        old_terms = [self._module_state(i)]
        if self.members[j]:
            old_terms.append(self._module_state(j))
        new_terms = []
        if self.members[i] > 1:
            new_terms.append((*self._exit_enter(new_i[0], new_i[1], new_i[3], new_i[4]), new_i[2]))
        new_terms.append((*self._exit_enter(new_j[0], new_j[1], new_j[3], new_j[4]), new_j[2]))

        enter_sum = self.enter_sum - sum(t[1] for t in old_terms) + sum(t[1] for t in new_terms)
        d_enter = sum(plogp(t[1]) for t in new_terms) - sum(plogp(t[1]) for t in old_terms)
        d_exit = sum(plogp(t[0]) for t in new_terms) - sum(plogp(t[0]) for t in old_terms)
        d_exit_flow = sum(plogp(t[0] + t[2]) for t in new_terms) - sum(plogp(t[0] + t[2]) for t in old_terms)
        delta = plogp(enter_sum) - plogp(self.enter_sum) - d_enter - d_exit + d_exit_flow
        return delta, (new_i, new_j, enter_sum, d_enter, d_exit, d_exit_flow)

    def apply(self, a, i, j, update):
        new_i, new_j, enter_sum, d_enter, d_exit, d_exit_flow = update
        for m, vals in ((i, new_i), (j, new_j)):
            self.link_exit[m], self.link_enter[m], self.flow[m], self.tsrc[m], self.tweight[m] = vals
        self.members[i] -= 1
        self.members[j] += 1
        self.labels[a] = j
        self.enter_sum = enter_sum
        self.sum_plogp_enter += d_enter
        self.sum_plogp_exit += d_exit
        self.sum_plogp_exit_flow += d_exit_flow


def _move_nodes(
    level: _Level,
    labels: list[int],
    rng: np.random.Generator,
    recorded: bool,
    on_move: Callable | None = None,
    max_sweeps: int = 200,
) -> list[int]:
    """Greedy single-node moves until a sweep makes no improving move."""
    state = _Modules(level, labels, recorded)
    n = level.n
    for _ in range(max_sweeps):
        moved = 0
        for a in rng.permutation(n):
            a = int(a)
            i = state.labels[a]
            w_out: dict[int, float] = {}
            w_in: dict[int, float] = {}
            for b, w in level.out_links[a].items():
                m = state.labels[b]
                w_out[m] = w_out.get(m, 0.0) + w
            for b, w in level.in_links[a].items():
                m = state.labels[b]
                w_in[m] = w_in.get(m, 0.0) + w
            candidates = set(w_out) | set(w_in)
            if recorded:
                candidates |= {m for m in range(n + 1) if state.members[m]}
            candidates.discard(i)
            if state.members[i] > 1:
                empty = next(m for m in range(n + 1) if state.members[m] == 0)
                candidates.add(empty)
            best = None
            for j in sorted(candidates):
                d, upd = state.delta(a, i, j, w_out.get(i, 0.0), w_in.get(i, 0.0), w_out.get(j, 0.0), w_in.get(j, 0.0))
                if d < -MOVE_EPS and (best is None or d < best[0]):
                    best = (d, j, upd)
            if best is not None:
                d, j, upd = best
                state.apply(a, i, j, upd)
                moved += 1
                if on_move is not None:
                    on_move(d)
        if not moved:
            break
    return _compact(state.labels)


def _compact(labels: Sequence[int]) -> list[int]:
    remap: dict[int, int] = {}
    return [remap.setdefault(m, len(remap)) for m in labels]


def _coarsen(level: _Level, rng, recorded, on_move) -> list[int]:
    """Repeated move-then-aggregate; returns labels for ``level``'s nodes."""
    mapping = list(range(level.n))
    while True:
        labels = _move_nodes(level, list(range(level.n)), rng, recorded, on_move)
        k = max(labels) + 1
        mapping = [labels[m] for m in mapping]
        if k == level.n or k == 1:
            return _compact(mapping)
        level = level.aggregate(labels)


def _canonical(fg: FlowGraph, labels: Sequence[int]) -> list[int]:
    """Relabel modules by descending flow, ties by first node index."""
    labels = _compact(labels)
    k = max(labels) + 1
    flow = [0.0] * k
    first = [None] * k
    for idx, m in enumerate(labels):
        flow[m] += fg.visit_rates[idx]
        if first[m] is None:
            first[m] = idx
    order = sorted(range(k), key=lambda m: (-flow[m], first[m]))
    rank = {m: r for r, m in enumerate(order)}
    return [rank[m] for m in labels]


def _trial(fg: FlowGraph, base: _Level, rng, recorded, on_move, max_rounds=20):
    labels = _coarsen(base, rng, recorded, on_move)
    best = map_equation(fg, labels, recorded)
    history = [best]
    for _ in range(max_rounds):
        fine = _move_nodes(base, labels, rng, recorded, on_move)
        coarse_map = _coarsen(base.aggregate(fine), rng, recorded, on_move)
        candidate = [coarse_map[m] for m in fine]
        length = map_equation(fg, candidate, recorded)
        if length < best - MOVE_EPS:
            labels, best = candidate, length
            history.append(best)
        else:
            break
    one = map_equation(fg, [0] * fg.n, recorded)
    if one < best:
        labels, best = [0] * fg.n, one
        history.append(best)
    return _canonical(fg, labels), history


def search(
    fg: FlowGraph,
    seed: int = 42,
    trials: int = 10,
    recorded_teleport: bool = False,
    threads: int = 1,
    on_move: Callable[[float], None] | None = None,
) -> Partition:
    """Best-of-``trials`` greedy map-equation search.

    Trial ``t`` draws its node orders from ``seed + t``. The winner has the
    minimal codelength, ties going to the lowest trial index, so the result
    does not depend on ``threads``.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    base = _Level.from_flowgraph(fg)

    def run(t):
        labels, history = _trial(fg, base, np.random.default_rng(seed + t), recorded_teleport, on_move)
        return map_equation(fg, labels, recorded_teleport), labels, history

    if threads > 1 and on_move is None:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(t) for t in range(trials)]

    win = min(range(trials), key=lambda t: (results[t][0], t))
    codelength, labels, history = results[win]
    visit, exit_, _ = module_terms(fg, labels, recorded_teleport)
    return Partition(
        nodes=fg.nodes,
        assignment={node: int(m) for node, m in zip(fg.nodes, labels)},
        codelength=codelength,
        module_flows=[(float(v), float(x)) for v, x in zip(visit, exit_)],
        one_level_codelength=map_equation(fg, [0] * fg.n, recorded_teleport),
        num_trials=trials,
        winning_trial=win,
        seed=seed,
        teleport=fg.teleport,
        recorded_teleport=recorded_teleport,
        history=history,
    )


@dataclass(frozen=True)
class ClusterMember:
    id: str
    label: str
    opsahl_score: float | None


@dataclass(frozen=True)
class ClusterEntry:
    module: int
    members: tuple[ClusterMember, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def multi(self) -> bool:
        return self.size >= 2

    @property
    def has_synergy(self) -> bool:
        return any(m.label == SYNERGY for m in self.members)


def cluster_report(
    p: Partition,
    classes: Sequence[ClassificationRecord],
    scores: Mapping[str, float] | None = None,
) -> tuple[list[ClusterEntry], list[ClusterEntry]]:
    """Split modules into (multi-indicator, single-indicator) listings."""
    label_of = {c.id: c.label for c in classes}
    scores = scores or {}
    multi, single = [], []
    for m, members in enumerate(p.modules()):
        entry = ClusterEntry(
            m,
            tuple(ClusterMember(n, label_of.get(n, ""), scores.get(n)) for n in members),
        )
        if entry.multi:
            if not entry.has_synergy:
                log.info("module %d has no synergy-dominated member", m)
            multi.append(entry)
        else:
            single.append(entry)
    return multi, single
