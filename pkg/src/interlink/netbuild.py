"""Lagged-correlation estimation, significance gating and dominance resolution."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .errors import DegenerateCorrelationError, InsufficientSampleError, ParameterError
from .graph import Edge, InterlinkNetwork
from .ingest import Panel

log = logging.getLogger(__name__)

METHODS = ("pearson", "spearman")


@dataclass(frozen=True)
class LaggedEstimate:
    source: str
    target: str
    r: float
    n: int
    p: float


@dataclass
class PairScan:
    """Outcome of scanning every ordered pair of a panel."""

    significant: list[LaggedEstimate]
    n_candidates: int
    skipped: list[tuple[str, str]] = field(default_factory=list)


def _aligned(x, y, lag):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ParameterError("x and y must be 1-d sequences of equal length")
    if lag < 1:
        raise ParameterError(f"lag must be a positive integer, got {lag}")
    n = len(x) - lag
    if n < 3:
        raise InsufficientSampleError(f"{n} aligned pairs; need at least 3")
    return x[:-lag], y[lag:], n


def _prepare(rows: np.ndarray, method: str) -> tuple[np.ndarray, np.ndarray]:
    """Centered rows and their sums of squares; ranks first for Spearman."""
    if method == "spearman":
        rows = stats.rankdata(rows, axis=-1)
    elif method != "pearson":
        raise ParameterError(f"unknown correlation method {method!r}")
    centered = rows - rows.mean(axis=-1, keepdims=True)
    return centered, np.sum(centered * centered, axis=-1)


def lagged_correlation(x, y, lag: int = 1, method: str = "pearson") -> tuple[float, int]:
    """Correlation of ``x[t-lag]`` with ``y[t]``; returns ``(r, n)``."""
    xs, ys, n = _aligned(x, y, lag)
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise DegenerateCorrelationError("zero variance in a lagged slice")
    xc, sxx = _prepare(xs, method)
    yc, syy = _prepare(ys, method)
    r = np.sum(xc * yc) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0)), n


def p_value(r, n: int):
    """Two-sided p-value of a correlation under the t test with n-2 dof.

    Uses ``P(|T| >= |t|) = I_{1-r^2}((n-2)/2, 1/2)``, the regularized
    incomplete beta form of the Student-t tail.
    """
    if n < 3:
        raise InsufficientSampleError(f"p-value needs n >= 3, got {n}")
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) > 1):
        raise ParameterError("|r| must not exceed 1")
    x = np.clip(1.0 - r * r, 0.0, 1.0)
    p = special.betainc((n - 2) / 2.0, 0.5, x)
    p = np.where(x == 0, 0.0, p)
    return float(p) if p.ndim == 0 else p


def all_pairs(
    panel: Panel,
    lag: int = 1,
    threshold: float = 0.05,
    method: str = "pearson",
    fdr: bool = False,
) -> PairScan:
    """Estimate every ordered pair (i, j), i != j, and keep those with p < threshold.

    With ``fdr`` the Benjamini-Hochberg adjusted p-values are gated instead.
    Output order is row-major over the panel's series order.
    """
    if not 0 < threshold <= 1:
        raise ParameterError(f"significance threshold must lie in (0, 1], got {threshold}")
    data = panel.matrix()
    ids = panel.ids
    k, length = data.shape
    n = length - lag
    if lag < 1:
        raise ParameterError(f"lag must be a positive integer, got {lag}")
    if n < 3:
        raise InsufficientSampleError(f"{n} aligned pairs; need at least 3")

    src, tgt = data[:, :-lag], data[:, lag:]
    src_c, sxx = _prepare(src, method)
    tgt_c, syy = _prepare(tgt, method)
    # elementwise product then a last-axis sum keeps every r independent of column position
    sxy = np.sum(src_c[:, None, :] * tgt_c[None, :, :], axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.clip(sxy / np.sqrt(sxx[:, None] * syy[None, :]), -1.0, 1.0)

    src_const = np.all(src == src[:, :1], axis=1)
    tgt_const = np.all(tgt == tgt[:, :1], axis=1)
    degenerate = src_const[:, None] | tgt_const[None, :]
    np.fill_diagonal(degenerate, False)
    valid = ~degenerate
    np.fill_diagonal(valid, False)

    p = np.ones_like(r)
    p[valid] = p_value(r[valid], n)
    gate = p
    if fdr and valid.any():
        gate = np.ones_like(p)
        gate[valid] = stats.false_discovery_control(p[valid], method="bh")

    skipped = [(ids[i], ids[j]) for i, j in zip(*np.nonzero(degenerate))]
    for s, t in skipped:
        log.info("skipped degenerate pair %s->%s", s, t)
    significant = [
        LaggedEstimate(ids[i], ids[j], float(r[i, j]), n, float(p[i, j]))
        for i, j in zip(*np.nonzero(valid & (gate < threshold)))
    ]
    return PairScan(significant, n_candidates=k * (k - 1), skipped=skipped)


def dominance_resolve(estimates: list[LaggedEstimate]) -> list[Edge]:
    """Keep the stronger direction of each bidirectional pair; both on exact |r| ties."""
    by_key = {(e.source, e.target): e for e in estimates}
    edges = []
    for e in estimates:
        rev = by_key.get((e.target, e.source))
        if rev is None:
            tag = "unopposed"
        elif abs(e.r) > abs(rev.r):
            tag = "dominant"
        elif abs(e.r) == abs(rev.r):
            tag = "tie-kept"
        else:
            continue
        edges.append(Edge(e.source, e.target, e.r, e.p, tag))
    return edges


def build_network(edges, nodes, meta=None) -> InterlinkNetwork:
    """Assemble the network; every panel node is kept, isolates included."""
    return InterlinkNetwork(nodes, edges, meta)
