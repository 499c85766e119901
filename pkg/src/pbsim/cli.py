"""Command-line entry point: ``pbsim simulate|optimum|boundaries|presets``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, PBSimError
from .sweep import (
    boundaries_for,
    emit_csv,
    find_optimum,
    load_config,
    load_preset,
    preset_document,
    preset_names,
    run_sweep,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _csv_target(out: Path, name: str, multiple: bool) -> Path:
    if not multiple:
        return out
    return out.with_name(f"{out.stem}_{name}{out.suffix or '.csv'}")


def cmd_simulate(args) -> int:
    specs = load_config(args.config)
    out = Path(args.out)
    for spec in specs:
        rows = run_sweep(spec, args.threads)
        path = emit_csv(rows, _csv_target(out, spec.name, len(specs) > 1))
        failed = sum(not r.ok for r in rows)
        print(f"{spec.name}: {len(rows)} rows -> {path}" + (f" ({failed} failed)" if failed else ""))
    return EXIT_OK


def cmd_optimum(args) -> int:
    for spec in load_config(args.config):
        x, g2 = find_optimum(spec, refine=not args.no_refine)
        print(f"{spec.name}: {spec.axis}={x:.10g} g2={g2:.10g}")
    return EXIT_OK


def cmd_boundaries(args) -> int:
    for spec in load_config(args.config):
        print(f"# {spec.name}")
        print("boundary,left,right")
        for b in boundaries_for(spec, xtol=args.xtol):
            print(f"{b.position:.6f},{b.left},{b.right}")
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.action == "list":
        for name in preset_names():
            print(f"{name:8s} {preset_document(name).get('description', '')}")
        return EXIT_OK
    if not args.name:
        raise ConfigError("presets run needs a preset name")
    specs = load_preset(args.name)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        rows = run_sweep(spec, args.threads)
        path = emit_csv(rows, out_dir / f"{spec.name}.csv")
        print(f"{spec.name}: {len(rows)} rows -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbsim", description="Phonon-blockade sweeps for hybrid optomechanics")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the sweep(s) in a config and write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=None, help="worker count (default: $PB_SIM_THREADS or 1)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimum", help="locate the g2 minimum along the sweep axis")
    p.add_argument("--config", required=True)
    p.add_argument("--no-refine", action="store_true", help="report the coarse grid minimum only")
    p.set_defaults(func=cmd_optimum)

    p = sub.add_parser("boundaries", help="find detunings where the correlation ordering changes")
    p.add_argument("--config", required=True)
    p.add_argument("--xtol", type=float, default=1e-4)
    p.set_defaults(func=cmd_boundaries)

    p = sub.add_parser("presets", help="list or run the figure presets")
    p.add_argument("action", choices=["list", "run"])
    p.add_argument("name", nargs="?")
    p.add_argument("--out-dir", default="results")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PBSimError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
