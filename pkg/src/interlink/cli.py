"""Command line entry point: ``interlink run | synth | convert``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__
from .errors import InterlinkError
from .ingest import long_to_wide
from .pipeline import RunConfig, read_config_file, resolve_threads, run_pipeline
from .synth import write_synthetic

log = logging.getLogger("interlink")


def _add_run(sub):
    p = sub.add_parser("run", help="run the full pipeline on a wide CSV panel")
    # every option defaults to None so config-file values can fill the gaps
    p.add_argument("--config", help="key=value file; CLI flags take precedence")
    p.add_argument("--input", help="wide CSV: year,<id1>,<id2>,...")
    p.add_argument("--meta", help="metadata CSV: id,label,sdg")
    p.add_argument("--window", help="year range START:END, e.g. 2000:2024")
    p.add_argument("--lag", type=int)
    p.add_argument("--sig", type=float, help="significance threshold (default 0.05)")
    p.add_argument("--method", choices=["pearson", "spearman"])
    p.add_argument("--fdr", action="store_const", const=True, help="Benjamini-Hochberg gate")
    p.add_argument("--strong-threshold", type=float)
    p.add_argument("--opsahl-alpha", type=float)
    p.add_argument("--teleport", type=float)
    p.add_argument("--recorded-teleport", action="store_const", const=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--top-n", type=int)
    p.add_argument("--out")
    p.add_argument("--strict", action="store_const", const=True, help="out-of-range values are errors")
    p.add_argument("--threads", type=int, help="falls back to $INTERLINK_THREADS")
    p.add_argument("--compare-reference", action="store_const", const=True,
                   help="write reproduction.csv against the published India counts")


def _add_synth(sub):
    p = sub.add_parser("synth", help="write a planted-structure panel and truth.json")
    p.add_argument("--spec", required=True, help="JSON planted-structure spec")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output panel CSV")


def _add_convert(sub):
    p = sub.add_parser("convert", help="pivot a long CSV (id,year,value) to wide")
    p.add_argument("--long", required=True, dest="long_path")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interlink", description=__doc__)
    parser.add_argument("--version", action="version", version=f"interlink {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run(sub)
    _add_synth(sub)
    _add_convert(sub)
    return parser


def config_from_args(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    values["threads"] = resolve_threads(values.get("threads"))
    return RunConfig(**values)


def _cmd_run(args) -> int:
    config = config_from_args(args)
    if config.input and not Path(config.input).exists():
        raise InterlinkError(f"input file not found: {config.input}")
    manifest = run_pipeline(config)
    c = manifest["counts"]
    print(
        f"{c['nodes']} nodes, {c['edges']} edges ({c['positive_edges']}+/{c['negative_edges']}-), "
        f"{c['synergy_dominated']} synergy / {c['tradeoff_dominated']} trade-off, "
        f"{c['multi_indicator_clusters']} multi + {c['single_indicator_clusters']} single clusters, "
        f"{c['prioritised']} prioritised -> {config.out}"
    )
    return 0


def _cmd_synth(args) -> int:
    spec = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    panel, truth = write_synthetic(spec, args.seed, args.out)
    print(f"wrote {panel} and {truth}")
    return 0


def _cmd_convert(args) -> int:
    with open(args.long_path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        rows = [(r["id"], r["year"], r["value"]) for r in reader]
    years, ids, table = long_to_wide(rows)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["year"] + ids)
        for y in years:
            w.writerow([y] + [table.get((sid, y), "") for sid in ids])
    print(f"wrote {args.out}: {len(years)} years x {len(ids)} indicators")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "synth": _cmd_synth, "convert": _cmd_convert}[args.command]
    try:
        return handler(args)
    except (InterlinkError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"interlink {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
