"""Command-line entry point.

    learnsim simulate CONFIG... [--seed N] [--out DIR] [--format csv|json]
                                [--dt X] [--jobs K] [--plot]
    learnsim report PATH [--out DIR] [--no-plot]
    learnsim serve [--host H] [--port P] [--static DIR] [--tick S]
    learnsim configs

Exit status: 0 on success, 1 on configuration errors, 2 on runtime
failures. Shipped scenario configurations are addressed as builtin:NAME.
"""

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import (
    ConfigError,
    RunConfig,
    builtin_config_names,
    load_builtin_config,
    load_config,
    run_config,
)
from .integrate import IntegratorConfig, SimulationError
from .report import format_summary, read_trace, render_figures, summarize, write_trace


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="learnsim",
        description="Simulate multi-compartment learning/forgetting scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one or more scenario configs")
    sim.add_argument("configs", nargs="+", metavar="CONFIG",
                     help="path to a JSON config, or builtin:NAME")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.add_argument("--out", default=".", help="output directory (default: cwd)")
    sim.add_argument("--format", choices=("csv", "json"), default=None,
                     help="override the export format")
    sim.add_argument("--dt", type=float, default=None, help="override the integrator step")
    sim.add_argument("--jobs", type=int, default=1, help="run configs in parallel")
    sim.add_argument("--plot", action="store_true", help="render figures next to the data")

    rep = sub.add_parser("report", help="summarize an exported run and render figures")
    rep.add_argument("path", help="run stem, .csv, or .json produced by simulate")
    rep.add_argument("--out", default=None, help="directory for figures (default: alongside)")
    rep.add_argument("--no-plot", action="store_true", help="summary only, skip figures")

    srv = sub.add_parser("serve", help="start the live class session service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8750)
    srv.add_argument("--static", default=None, help="directory of UI assets to serve at /")
    srv.add_argument("--tick", type=float, default=0.1,
                     help="real seconds per auto-advance tick")

    sub.add_parser("configs", help="list builtin scenario configs")
    return parser


def _load(ref: str) -> RunConfig:
    if ref.startswith("builtin:"):
        return load_builtin_config(ref[len("builtin:"):])
    return load_config(ref)


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.dt is not None:
        integ = IntegratorConfig(
            dt=args.dt, method=cfg.integrator.method, record_every=cfg.integrator.record_every
        )
        cfg = dataclasses.replace(cfg, integrator=integ)
    if args.format is not None:
        cfg = dataclasses.replace(cfg, output_format=args.format)
    return cfg


def _default_stem(ref: str, cfg: RunConfig) -> str:
    if cfg.output_name:
        return cfg.output_name
    if ref.startswith("builtin:"):
        return ref[len("builtin:"):]
    return Path(ref).stem


def _simulate_one(ref: str, args) -> int:
    written: list[Path] = []
    try:
        cfg = _apply_overrides(_load(ref), args)
        stem = _default_stem(ref, cfg)
        trace = run_config(cfg)
        written += write_trace(trace, args.out, stem, cfg.output_format)
        summary = summarize(trace)
        summary_path = Path(args.out) / f"{stem}.summary.json"
        summary_path.write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
        written.append(summary_path)
        if args.plot:
            written += render_figures(trace, args.out, stem)
        print(f"== {stem} ==")
        print(format_summary(summary))
        for p in written:
            print(f"wrote {p}")
        return 0
    except ConfigError as exc:
        print(f"{ref}: {exc}", file=sys.stderr)
        return 1
    except (SimulationError, OSError, ValueError) as exc:
        for p in written:
            p.unlink(missing_ok=True)
        print(f"{ref}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _cmd_simulate(args) -> int:
    if args.jobs > 1 and len(args.configs) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            statuses = list(pool.map(lambda ref: _simulate_one(ref, args), args.configs))
    else:
        statuses = [_simulate_one(ref, args) for ref in args.configs]
    return max(statuses)


def _cmd_report(args) -> int:
    try:
        trace = read_trace(args.path)
    except (FileNotFoundError, ValueError, json.JSONDecodeError) as exc:
        print(f"{args.path}: {exc}", file=sys.stderr)
        return 1
    summary = summarize(trace)
    print(format_summary(summary))
    if not args.no_plot:
        src = Path(args.path)
        out_dir = args.out if args.out is not None else (src.parent if src.parent != Path("") else ".")
        stem = src.stem.replace(".events", "")
        for p in render_figures(trace, out_dir, stem):
            print(f"wrote {p}")
    return 0


def _cmd_serve(args) -> int:
    from .service import run_server

    run_server(host=args.host, port=args.port, static_dir=args.static, tick=args.tick)
    return 0


def _cmd_configs(_args) -> int:
    for name in builtin_config_names():
        print(f"builtin:{name}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return {
        "simulate": _cmd_simulate,
        "report": _cmd_report,
        "serve": _cmd_serve,
        "configs": _cmd_configs,
    }[args.command](args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
