"""Benchmark command line: run episodes, suites, ablations, and plots."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import default_profile, load_config, with_overrides
from .errors import ConfigError
from .harness import (run_episode, run_speed_ablation, run_suite, rows_to_csv,
                      trace_lines, write_trace)


def _load(args) -> dict:
    cfg = load_config(args.config) if args.config else default_profile(args.profile)
    over = {}
    if args.controller:
        over["controller__kind"] = args.controller
    if args.mode:
        over["mode__mode"] = args.mode
    if args.lookahead:
        over["planner__horizon"] = args.lookahead
    return with_overrides(cfg, **over) if over else cfg


def _add_common(p):
    p.add_argument("--config", type=Path, help="run configuration YAML (default: packaged profile)")
    p.add_argument("--profile", default="toy_box", help="packaged profile name when --config is absent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--controller", choices=["reactive_fixed", "hipbi", "mpc_icem"])
    p.add_argument("--mode", choices=["sync", "async"])
    p.add_argument("--lookahead", type=int)
    p.add_argument("--out", type=Path, default=Path("."))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="policyblend")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one episode; emit trace and optional plot")
    _add_common(p)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("suite", help="run the benchmark grid; emit CSV")
    _add_common(p)

    p = sub.add_parser("ablate-speed", help="box-speed sweep; emit CSV")
    _add_common(p)
    p.add_argument("--speeds", type=float, nargs="+", default=[0.0, 10.0, 20.0, 30.0])

    p = sub.add_parser("plot", help="render a trace file to SVG")
    p.add_argument("trace", type=Path)
    p.add_argument("--out", type=Path, default=Path("trajectory.svg"))

    p = sub.add_parser("validate-config", help="check a configuration file")
    p.add_argument("config", type=Path)
    return ap


def _cmd_run(args) -> int:
    cfg = _load(args)
    record = run_episode(cfg, args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    trace_path = args.out / f"episode_{args.seed}.jsonl"
    write_trace(record, trace_path)
    print(f"suc={record.suc} safe={record.safe} l2d={record.l2d:.2f} ts={record.ts}")
    print(f"trace: {trace_path}")
    if args.plot:
        from .plotting import emit_trajectory_plot
        svg = args.out / f"episode_{args.seed}.svg"
        emit_trajectory_plot(record, svg)
        print(f"plot: {svg}")
    return 0


def _cmd_suite(args) -> int:
    cfg = _load(args)
    cells = None
    if args.controller or args.lookahead or args.mode:
        cells = [{}]   # single cell from the overridden config
    rows, _ = run_suite(cfg, args.episodes, args.seed, cells=cells)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "suite.csv"
    path.write_text(rows_to_csv(rows))
    print(rows_to_csv(rows), end="")
    print(f"csv: {path}", file=sys.stderr)
    return 0


def _cmd_ablate(args) -> int:
    cfg = _load(args)
    controllers = [args.controller] if args.controller else ("reactive_fixed", "mpc_icem", "hipbi")
    rows = run_speed_ablation(cfg, args.speeds, args.episodes, args.seed,
                              controllers=controllers)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "speed_ablation.csv"
    path.write_text(rows_to_csv(rows))
    print(rows_to_csv(rows), end="")
    print(f"csv: {path}", file=sys.stderr)
    return 0


def _cmd_plot(args) -> int:
    import numpy as np

    from .harness import EpisodeRecord, TraceStep
    from .plotting import emit_trajectory_plot

    lines = args.trace.read_text().splitlines()
    header = json.loads(lines[0])
    steps = []
    for ln in lines[1:]:
        d = json.loads(ln)
        steps.append(TraceStep(d["t"], np.array(d["q"]), np.array(d["qdot"]),
                               np.array(d["action"]),
                               None if d["beta"] is None else np.array(d["beta"]),
                               np.array(d["goal"]), np.array(d["obstacles"])))
    record = EpisodeRecord(header["suc"], header["safe"], header["l2d"], header["ts"], steps)
    emit_trajectory_plot(record, args.out)
    print(f"plot: {args.out}")
    return 0


def _cmd_validate(args) -> int:
    load_config(args.config)
    print("config ok")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "suite": _cmd_suite, "ablate-speed": _cmd_ablate,
                "plot": _cmd_plot, "validate-config": _cmd_validate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
