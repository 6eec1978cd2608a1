"""End-to-end run: ingest, network, classification, centrality, clustering, picks."""
from __future__ import annotations

import hashlib
import logging
import os
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .centrality import rank_synergistic
from .classify import LABELS, SYNERGY, TRADEOFF, UNCLASSIFIED, classify_all
from .errors import ParameterError
from .export import write_csv, write_dot, write_edges, write_graphml, write_heatmap, write_json
from .flowclust import cluster_report, search, stationary_flows
from .graph import positive_subnetwork, strong_subnetwork
from .ingest import attach_metadata, filter_panel, load_metadata, load_panel, parse_window, validate_range
from .netbuild import METHODS, all_pairs, build_network, dominance_resolve
from .prioritise import prioritise, redundancy_report

log = logging.getLogger(__name__)

OUTPUT_FILES = (
    "edges.csv",
    "classification.csv",
    "classification_by_sdg.csv",
    "centrality.csv",
    "heatmap.csv",
    "network.graphml",
    "network.dot",
    "clusters.csv",
    "partition.json",
    "prioritised.csv",
    "manifest.json",
)

# Published counts for the India 2000-2024 panel, used by --compare-reference.
REFERENCE_INDIA = {
    "nodes": 79,
    "edges": 2643,
    "positive_edges": 1491,
    "negative_edges": 1152,
    "synergy_dominated": 52,
    "tradeoff_dominated": 27,
    "multi_indicator_clusters": 4,
    "single_indicator_clusters": 20,
    "prioritised": 12,
}


@dataclass
class RunConfig:
    input: str = ""
    meta: str | None = None
    window: str | None = None
    lag: int = 1
    sig: float = 0.05
    method: str = "pearson"
    fdr: bool = False
    strong_threshold: float = 0.9
    opsahl_alpha: float = 0.5
    teleport: float = 0.15
    recorded_teleport: bool = False
    trials: int = 10
    seed: int = 42
    top_n: int = 10
    out: str = "results"
    strict: bool = False
    threads: int = 1
    compare_reference: bool = False

    def validate(self) -> None:
        if not self.input:
            raise ParameterError("an input panel is required")
        if self.window is not None:
            parse_window(self.window)
        if self.lag < 1:
            raise ParameterError(f"lag must be >= 1, got {self.lag}")
        if not 0 < self.sig <= 1:
            raise ParameterError(f"sig must lie in (0, 1], got {self.sig}")
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0 < self.strong_threshold <= 1:
            raise ParameterError(f"strong threshold must lie in (0, 1], got {self.strong_threshold}")
        if not 0 <= self.opsahl_alpha <= 1:
            raise ParameterError(f"opsahl alpha must lie in [0, 1], got {self.opsahl_alpha}")
        if not 0 < self.teleport < 1:
            raise ParameterError(f"teleport must lie in (0, 1), got {self.teleport}")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.top_n < 1:
            raise ParameterError(f"top-n must be >= 1, got {self.top_n}")
        if self.threads < 1:
            raise ParameterError(f"threads must be >= 1, got {self.threads}")


def _coerce(name: str, text: str):
    """Convert a config-file string to the RunConfig field's type."""
    default = RunConfig.__dataclass_fields__[name].default
    if isinstance(default, bool):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text.strip()


def read_config_file(path) -> dict:
    """Parse ``key=value`` lines (``#`` comments, dashes or underscores in keys)."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in known:
            raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return values


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class _Outputs:
    """Tracks written files so a failed run can mark them partial."""

    def __init__(self, out: Path):
        self.out = out
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.out / name
        self.written.append(p)
        return p

    def mark_partial(self):
        for p in self.written:
            if p.exists():
                os.replace(p, p.with_name(p.name + ".partial"))


def run_pipeline(config: RunConfig) -> dict:
    """Run every stage, write all report files under ``config.out`` and return the manifest."""
    config.validate()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in OUTPUT_FILES:
        stale = out / (name + ".partial")
        if stale.exists():
            stale.unlink()
    outputs = _Outputs(out)
    try:
        return _run(config, outputs)
    except Exception:
        outputs.mark_partial()
        raise


def _run(config: RunConfig, outputs: _Outputs) -> dict:
    timings: dict[str, float] = {}
    clock = time.perf_counter()

    def lap(stage):
        nonlocal clock
        now = time.perf_counter()
        timings[stage] = now - clock
        clock = now

    window = parse_window(config.window) if config.window else None
    raw = load_panel(config.input, window)
    meta = {}
    if config.meta:
        meta = load_metadata(config.meta)
        raw = attach_metadata(raw, meta)
    panel = filter_panel(raw)
    violations = validate_range(panel, strict=config.strict)
    node_meta = {s.id: (s.label, s.sdg) for s in panel.series}
    lap("ingest")

    scan = all_pairs(panel, lag=config.lag, threshold=config.sig, method=config.method, fdr=config.fdr)
    g = build_network(dominance_resolve(scan.significant), panel.ids, node_meta)
    write_edges(outputs.path("edges.csv"), g)
    write_heatmap(outputs.path("heatmap.csv"), g)
    write_graphml(outputs.path("network.graphml"), g)
    write_dot(outputs.path("network.dot"), g)
    lap("netbuild")

    classes, summary = classify_all(g)
    write_csv(
        outputs.path("classification.csv"),
        ["id", "sdg", "s_plus", "s_minus", "k_out", "label"],
        ([c.id, g.sdg(c.id), c.s_plus, c.s_minus, c.k_out, c.label] for c in classes),
    )
    sdg_keys = sorted(summary.by_sdg, key=lambda s: (s is None, s or 0))
    write_csv(
        outputs.path("classification_by_sdg.csv"),
        ["sdg", "synergy_dominated", "tradeoff_dominated", "unclassified"],
        ([s, summary.by_sdg[s][SYNERGY], summary.by_sdg[s][TRADEOFF], summary.by_sdg[s][UNCLASSIFIED]] for s in sdg_keys),
    )
    lap("classify")

    g_plus = positive_subnetwork(g)
    ranking = rank_synergistic(g_plus, classes, config.opsahl_alpha)
    write_csv(
        outputs.path("centrality.csv"),
        ["rank", "id", "sdg", "k_out", "s_out", "alpha", "score"],
        ([i, r.id, g.sdg(r.id), r.k_out, r.s_out, r.alpha, r.score] for i, r in enumerate(ranking, start=1)),
    )
    lap("centrality")

    g_strong = strong_subnetwork(g_plus, config.strong_threshold)
    fg = stationary_flows(g_strong, teleport=config.teleport)
    partition = search(
        fg,
        seed=config.seed,
        trials=config.trials,
        recorded_teleport=config.recorded_teleport,
        threads=config.threads,
    )
    scores = {r.id: r.score for r in ranking}
    multi, single = cluster_report(partition, classes, scores)
    label_of = {c.id: c.label for c in classes}
    write_csv(
        outputs.path("clusters.csv"),
        ["module", "size", "id", "label", "opsahl_score"],
        (
            [entry.module, entry.size, m.id, label_of[m.id], m.opsahl_score]
            for entry in sorted(multi + single, key=lambda e: e.module)
            for m in entry.members
        ),
    )
    write_json(
        outputs.path("partition.json"),
        {
            "assignment": partition.assignment,
            "codelength": partition.codelength,
            "one_level_codelength": partition.one_level_codelength,
            "module_flows": [{"visit": v, "exit": x} for v, x in partition.module_flows],
            "num_modules": partition.num_modules,
            "winning_trial": partition.winning_trial,
            "parameters": {
                "teleport": config.teleport,
                "recorded_teleport": config.recorded_teleport,
                "trials": config.trials,
                "seed": config.seed,
                "strong_threshold": config.strong_threshold,
            },
            "flow_residual": fg.residual,
        },
    )
    lap("flowclust")

    chosen = prioritise(partition, classes, ranking, {n: g.sdg(n) for n in g.nodes})
    write_csv(
        outputs.path("prioritised.csv"),
        ["category", "module", "id", "sdg", "opsahl_score"],
        ([p.category, p.module, p.id, p.sdg, p.opsahl_score] for p in chosen.picks),
    )
    redundancy = None
    if ranking:
        red = redundancy_report(ranking, partition, min(config.top_n, len(ranking)))
        redundancy = {
            "top_n": red.top_n,
            "memberships": red.memberships,
            "modal_module": red.modal_module,
            "concentration": red.concentration,
        }
    lap("prioritise")

    n_pos = sum(1 for e in g.edges if e.weight > 0)
    counts = {
        "input_series": len(raw.series),
        "dropped": len(panel.dropped),
        "nodes": len(g.nodes),
        "candidate_pairs": scan.n_candidates,
        "significant_estimates": len(scan.significant),
        "degenerate_pairs": len(scan.skipped),
        "edges": len(g.edges),
        "positive_edges": n_pos,
        "negative_edges": len(g.edges) - n_pos,
        "synergy_dominated": summary.counts[SYNERGY],
        "tradeoff_dominated": summary.counts[TRADEOFF],
        "unclassified": summary.counts[UNCLASSIFIED],
        "strong_edges": len(g_strong.edges),
        "modules": partition.num_modules,
        "multi_indicator_clusters": len(multi),
        "single_indicator_clusters": len(single),
        "prioritised": len(chosen.picks),
        "range_violations": len(violations),
    }
    inputs = {"input": _sha256(config.input)}
    if config.meta:
        inputs["meta"] = _sha256(config.meta)
    manifest = {
        "tool": "interlink",
        "version": __version__,
        "config": asdict(config),
        "input_sha256": inputs,
        "window": list(panel.window),
        "counts": counts,
        "dropped": [{"id": d.id, "reason": d.reason} for d in panel.dropped],
        "skipped_clusters": chosen.skipped_clusters,
        "redundancy": redundancy,
        "labels": list(LABELS),
    }
    if config.compare_reference:
        write_csv(
            outputs.path("reproduction.csv"),
            ["metric", "reference", "observed", "deviation"],
            ([k, ref, counts[k], counts[k] - ref] for k, ref in REFERENCE_INDIA.items()),
        )
    write_json(outputs.path("manifest.json"), manifest)
    lap("report")
    # wall-clock values vary run to run, so they live outside the manifest
    write_json(outputs.path("timings.json"), {"seconds": timings})
    return manifest


def resolve_threads(cli_value: int | None) -> int:
    if cli_value is not None:
        return cli_value
    env = os.environ.get("INTERLINK_THREADS")
    return int(env) if env else 1

