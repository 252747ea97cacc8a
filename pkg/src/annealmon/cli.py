"""Command-line entry points.

Subcommands: topology, embed, run, trend, alternate, analyze, monitor,
export.  Exit code 0 on success; failures print a stage-tagged diagnostic to
stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiment
from .config import load_config
from .embedding import (
    chimera_clique_embedding,
    load_embedding,
    save_embedding,
    validate_embedding,
)
from .errors import AnnealmonError, StageError
from .monitor import stratify
from .topology import HardwareGraph, apply_defects, chimera, export_graph, import_graph


def _parse_defects(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _hardware_from_args(args) -> HardwareGraph:
    if args.hardware:
        g = import_graph(args.hardware)
    else:
        g = chimera(args.chimera, args.tile)
    if getattr(args, "defects", None):
        g = apply_defects(g, _parse_defects(args.defects))
    return g


def cmd_topology(args) -> int:
    g = _hardware_from_args(args)
    print(f"topology: {g.topology_kind}")
    print(f"nodes: {g.num_nodes}")
    print(f"couplers: {g.num_couplers}")
    print(f"defects: {len(g.defects)}")
    if args.out:
        export_graph(g, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_embed(args) -> int:
    g = _hardware_from_args(args)
    if args.validate:
        emb = load_embedding(args.validate, g)
        k = len(emb.chains)
    else:
        if args.k < 1:
            print("error: either --k or --validate is required", file=sys.stderr)
            return 2
        emb = chimera_clique_embedding(
            g, args.k, origin=(args.origin_row, args.origin_col)
        )
        k = args.k
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    report = validate_embedding(emb, edges)
    if not report.ok:
        for violation in report.violations:
            print(f"violation: {violation}", file=sys.stderr)
        return 1
    lengths = sorted(len(c) for c in emb.chains.values())
    print(f"clique size: {k}")
    print(f"chains: {len(emb.chains)}, max length {lengths[-1]}")
    print(f"qubits used: {len(emb.footprint)} of {g.num_nodes}")
    if args.out:
        save_embedding(emb, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.set or [])
    artifacts = experiment.run_experiment(cfg, out_dir=args.output_dir)
    print(f"wrote {artifacts.raw_csv}")
    print(f"wrote {artifacts.report_json}")
    for name, path in sorted(artifacts.files.items()):
        print(f"wrote {path}")
    return 0


def cmd_trend(args) -> int:
    cfg = load_config(args.config, args.set or [])
    artifacts = experiment.run_parallel_trend(cfg, out_dir=args.output_dir)
    print(f"wrote {artifacts.raw_csv}")
    print(f"wrote {artifacts.report_json}")
    return 0


def cmd_alternate(args) -> int:
    cfg = load_config(args.config, args.set or [])
    artifacts = experiment.run_alternating(cfg, out_dir=args.output_dir)
    print(f"wrote {artifacts.raw_csv}")
    print(f"wrote {artifacts.report_json}")
    return 0


def cmd_analyze(args) -> int:
    cfg = load_config(args.config, args.set or [])
    problem_values, indicator_values = experiment.load_raw_series(args.raw)
    report, _, _ = experiment.analyze_run(problem_values, indicator_values, cfg.analysis)
    # the two program-scaling constants are config-derived, so a re-analysis
    # reproduces the run's report exactly
    report.extras.update(experiment.program_constants(cfg))
    report.save_json(args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_monitor(args) -> int:
    problem_values, indicator_values = experiment.load_raw_series(args.raw)
    rows, summary, normalized = experiment.replay_gate(
        problem_values, indicator_values, args.burn_in, args.tau
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    experiment._write_gate_log(out / "gate_log.csv", rows)
    mask = ~np.isnan(normalized)
    strat = stratify(problem_values[mask], normalized[mask], args.low, args.high)
    summary["low_mean_energy"] = (
        float(np.mean(strat.low_set)) if strat.low_set.size else None
    )
    summary["high_mean_energy"] = (
        float(np.mean(strat.high_set)) if strat.high_set.size else None
    )
    experiment._write_json(out / "gate_summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_export(args) -> int:
    path = experiment.export_plot_data(args.artifacts, args.which, args.out)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annealmon",
        description="Annealer noise monitoring testbed: indicator models on idle qubits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_hardware_args(p):
        p.add_argument("--chimera", type=int, default=4, help="chimera grid size m")
        p.add_argument("--tile", type=int, default=4, help="cell shore size t")
        p.add_argument("--hardware", default="", help="import a hardware graph file instead")
        p.add_argument("--defects", default="", help="comma-separated qubit ids to remove")

    p = sub.add_parser("topology", help="generate or inspect a hardware graph")
    add_hardware_args(p)
    p.add_argument("--out", default="", help="write the graph file here")
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("embed", help="construct or validate a clique embedding")
    add_hardware_args(p)
    p.add_argument("--k", type=int, default=0, help="clique size to construct")
    p.add_argument("--origin-row", type=int, default=0)
    p.add_argument("--origin-col", type=int, default=0)
    p.add_argument(
        "--validate", default="",
        help="validate an existing embedding file against the hardware instead",
    )
    p.add_argument("--out", default="", help="write the embedding file here")
    p.set_defaults(func=cmd_embed)

    def add_config_args(p):
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument(
            "--set",
            action="append",
            metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable)",
        )
        p.add_argument("--output-dir", default=None, help="override the output directory")

    p = sub.add_parser("run", help="single problem + indicator experiment")
    add_config_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trend", help="four disjoint problems sampled in shared calls")
    add_config_args(p)
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("alternate", help="two problems alternated over a fixed indicator")
    add_config_args(p)
    p.set_defaults(func=cmd_alternate)

    p = sub.add_parser("analyze", help="recompute the report from a raw CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    p.add_argument("--raw", required=True, help="raw per-call CSV from a run")
    p.add_argument("--out", required=True, help="report JSON destination")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("monitor", help="replay the burn-in/threshold gate over a raw CSV")
    p.add_argument("--raw", required=True)
    p.add_argument("--burn-in", type=int, default=10)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--low", type=float, default=0.2, help="low-noise stratum cut")
    p.add_argument("--high", type=float, default=0.8, help="high-noise stratum cut")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("export", help="emit plot-ready CSVs from run artifacts")
    p.add_argument("--artifacts", required=True, help="directory written by `run`")
    p.add_argument("--which", required=True, choices=experiment.EXPORT_KINDS)
    p.add_argument("--out", default=None, help="output directory (default: artifacts dir)")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc.cause}", file=sys.stderr)
        return 1
    except AnnealmonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
