"""Synthetic panels with planted lag-1 structure.

Each group of size m is a relay cycle. A seasonal signal
``y[t] = rho * y[t-m] + sqrt(1 - rho**2) * e[t]`` is started from a random
zero-mean pattern, and member k carries ``sign**k * y[t-k]``. Member k
therefore drives member k+1 one year later, and the last member drives the
first, so the strong positive network holds a directed m-cycle per group. A
driver attached to a group carries ``sign * y[t+1]``: it leads the group's
first member by one year with that sign. Noise indicators are independent
white noise.

Near-periodic signals have few degrees of freedom, so independent groups can
correlate by chance. The generator redraws the realisation (from the same
seeded stream) until the sample honours the design. Planted links must reach
at least ``strong_margin`` with the planted sign and beat their reverse
direction. Every lagged correlation across groups must stay below
``cross_max`` in magnitude, and so must a driver's unplanted positive ones.
A driver's significant (p < 0.05) out-links that survive the dominance rule
must all carry its planted sign.

Example spec::

    {"start_year": 2000, "end_year": 2024, "noise": 0.02,
     "groups": [{"size": 4}, {"size": 4}],
     "drivers": [{"group": 0, "sign": -1}],
     "noise_indicators": 0, "n_indicators": 9}
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .classify import SYNERGY, TRADEOFF
from .errors import SpecError
from .netbuild import p_value

SIGNIFICANCE = 0.05

DEFAULTS = {
    "start_year": 2000,
    "end_year": 2024,
    "noise": 0.02,
    "center": 50.0,
    "scale": 10.0,
    "rho": 0.97,
    "groups": [],
    "drivers": [],
    "noise_indicators": 0,
    "strong_margin": 0.95,
    "cross_max": 0.8,
    "max_attempts": 2000,
}


def _check(spec: dict) -> dict:
    unknown = set(spec) - set(DEFAULTS) - {"n_indicators"}
    if unknown:
        raise SpecError(f"unknown spec keys: {sorted(unknown)}")
    spec = {**DEFAULTS, **spec}
    n_years = spec["end_year"] - spec["start_year"] + 1
    if n_years < 3:
        raise SpecError(f"need at least 3 years, got {n_years}")
    for gi, grp in enumerate(spec["groups"]):
        if int(grp.get("size", 0)) < 1:
            raise SpecError(f"group {gi}: size must be >= 1")
        if grp.get("sign", 1) not in (1, -1):
            raise SpecError(f"group {gi}: sign must be +1 or -1")
    for di, drv in enumerate(spec["drivers"]):
        if not 0 <= drv.get("group", -1) < len(spec["groups"]):
            raise SpecError(f"driver {di}: group index {drv.get('group')} out of range")
        if drv.get("sign", -1) not in (1, -1):
            raise SpecError(f"driver {di}: sign must be +1 or -1")
    if spec["noise"] < 0 or spec["noise_indicators"] < 0:
        raise SpecError("noise and noise_indicators must be non-negative")
    if not 0 <= spec["rho"] < 1:
        raise SpecError("rho must lie in [0, 1)")
    total = sum(int(g["size"]) for g in spec["groups"]) + len(spec["drivers"]) + spec["noise_indicators"]
    if "n_indicators" in spec and spec["n_indicators"] != total:
        raise SpecError(
            f"n_indicators={spec['n_indicators']} but groups, drivers and noise indicators give {total}"
        )
    if total < 1:
        raise SpecError("spec defines no indicators")
    return spec


def _relay(rng, m, length, rho) -> np.ndarray:
    """Seasonal AR(m) signal of ``length + m`` values with unit variance."""
    pattern = rng.standard_normal(m)
    if m > 1:
        pattern = (pattern - pattern.mean()) / pattern.std()
    y = np.empty(length + m)
    y[:m] = pattern
    innov = np.sqrt(1 - rho**2)
    for t in range(m, length + m):
        y[t] = rho * y[t - m] + innov * rng.standard_normal()
    return y


def _lagged_r(data: np.ndarray) -> np.ndarray:
    src = data[:, :-1] - data[:, :-1].mean(axis=1, keepdims=True)
    tgt = data[:, 1:] - data[:, 1:].mean(axis=1, keepdims=True)
    cov = src @ tgt.T
    return cov / np.sqrt(np.outer((src**2).sum(1), (tgt**2).sum(1)))


def _draw(spec, rng, T):
    series: dict[str, np.ndarray] = {}
    owner: dict[str, int] = {}
    signals = []
    noise = spec["noise"]
    for gi, grp in enumerate(spec["groups"]):
        m, sign = int(grp["size"]), grp.get("sign", 1)
        y = _relay(rng, m, T + 1, spec["rho"])  # y[m + t] is year t; one spare year for drivers
        signals.append(y)
        for k in range(m):
            sid = f"G{gi + 1}_{k + 1}"
            series[sid] = sign**k * y[m - k : m - k + T] + noise * rng.standard_normal(T)
            owner[sid] = gi
    for di, drv in enumerate(spec["drivers"]):
        gi = drv["group"]
        m = int(spec["groups"][gi]["size"])
        sid = f"D{di + 1}"
        series[sid] = drv.get("sign", -1) * signals[gi][m + 1 : m + 1 + T] + noise * rng.standard_normal(T)
        owner[sid] = gi
    for ni in range(spec["noise_indicators"]):
        series[f"N{ni + 1}"] = rng.standard_normal(T)
    return series, owner


def _planted_links(spec) -> list[tuple[str, str, int]]:
    links = []
    for gi, grp in enumerate(spec["groups"]):
        m, sign = int(grp["size"]), grp.get("sign", 1)
        for k in range(m if m > 1 else 0):
            nxt = (k + 1) % m
            # member k carries sign**k, so a link's sign is the product of its ends' signs
            links.append((f"G{gi + 1}_{k + 1}", f"G{gi + 1}_{nxt + 1}", sign ** (k + nxt)))
    for di, drv in enumerate(spec["drivers"]):
        links.append((f"D{di + 1}", f"G{drv['group'] + 1}_1", drv.get("sign", -1)))
    return links


def _honours(spec, series, owner) -> bool:
    ids = list(series)
    if not owner:
        return True
    r = _lagged_r(np.vstack([series[i] for i in ids]))
    idx = {sid: i for i, sid in enumerate(ids)}
    margin, cross = spec["strong_margin"], spec["cross_max"]
    links = _planted_links(spec)
    planted = {(a, b) for a, b, _ in links}
    for a, b, sign in links:
        i, j = idx[a], idx[b]
        if sign * r[i, j] < margin:
            return False
        if (b, a) not in planted and abs(r[j, i]) >= abs(r[i, j]):
            return False
    for a in owner:
        for b in owner:
            if owner[a] != owner[b] and abs(r[idx[a], idx[b]]) >= cross:
                return False
    n = len(next(iter(series.values()))) - 1
    for di, drv in enumerate(spec["drivers"]):
        sid = f"D{di + 1}"
        d = idx[sid]
        for b in ids:
            if b == sid or (sid, b) in planted:
                continue
            i = idx[b]
            # no chance positive path into the strong network
            if max(r[d, i], r[i, d]) >= cross:
                return False
            # outflow that survives dominance carries only the planted sign
            wrong = np.sign(r[d, i]) != drv.get("sign", -1)
            if wrong and p_value(r[d, i], n) < SIGNIFICANCE and abs(r[d, i]) >= abs(r[i, d]):
                return False
    return True


def generate_synthetic(spec: dict, seed: int = 42) -> tuple[list[int], dict[str, np.ndarray], dict]:
    """Return ``(years, {id: values}, truth)`` for a planted-structure spec."""
    spec = _check(spec)
    rng = np.random.default_rng(seed)
    years = list(range(spec["start_year"], spec["end_year"] + 1))
    T = len(years)
    for attempt in range(1, spec["max_attempts"] + 1):
        series, owner = _draw(spec, rng, T)
        if _honours(spec, series, owner):
            break
    else:
        raise SpecError(f"no realisation honoured the planted design in {spec['max_attempts']} draws")

    truth = {"seed": seed, "attempts": attempt, "groups": [], "edges": [], "classes": {}}
    for gi, grp in enumerate(spec["groups"]):
        truth["groups"].append([f"G{gi + 1}_{k + 1}" for k in range(int(grp["size"]))])
    truth["edges"] = [list(link) for link in _planted_links(spec)]
    for di, drv in enumerate(spec["drivers"]):
        truth["classes"][f"D{di + 1}"] = SYNERGY if drv.get("sign", -1) > 0 else TRADEOFF
    truth["strong_clusters"] = [g for g in truth["groups"] if len(g) >= 2]

    center, scale = spec["center"], spec["scale"]
    scaled = {k: np.clip(center + scale * v, 0.0, 100.0) for k, v in series.items()}
    return years, scaled, truth


def write_panel_csv(path, years, series: dict[str, np.ndarray]) -> Path:
    path = Path(path)
    ids = list(series)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["year"] + ids)
        for t, year in enumerate(years):
            w.writerow([year] + [repr(float(series[sid][t])) for sid in ids])
    return path


def write_synthetic(spec: dict, seed: int, out) -> tuple[Path, Path]:
    """Write the panel CSV and a sibling ``truth.json``."""
    years, series, truth = generate_synthetic(spec, seed)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_panel_csv(out, years, series)
    truth_path = out.with_name("truth.json")
    truth_path.write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out, truth_path
