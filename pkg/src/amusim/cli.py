"""Command-line entry point.

    amu-sim run     --config cfg.json [--trace] [--out DIR] [--seed N]
    amu-sim compare --config cfg.json [--out DIR] [--seed N]
    amu-sim sweep   --config cfg.json [--out DIR] [--seed N]

Exit status: 0 on success, 1 on a configuration error, 2 on a simulation
error. ``sweep`` reads its axis and value list from the config's ``sweep``
section. ``--seed`` overrides the config's seed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .errors import AmuSimError, BadAxis, ConfigError, IncomparableWorkload
from .harness import cmd_compare, cmd_run, cmd_sweep

CONFIG_ERRORS = (ConfigError, BadAxis, IncomparableWorkload)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amu-sim", description="Asynchronous memory unit simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "execute one simulation and write metrics.json"),
        ("compare", "run blocking, windowed-OoO, and AMU over one address stream"),
        ("sweep", "run the config's sweep axis and emit one CSV row per value"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=".", help="output directory (default: current directory)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name == "run":
            p.add_argument("--trace", action="store_true", help="also write trace.tsv")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        out = Path(args.out)
        if args.command == "run":
            metrics = cmd_run(config, out, trace=args.trace)
            print(f"wrote {out / 'metrics.json'}  bw={metrics.achieved_bw_bytes_per_ns:.6g} B/ns")
        elif args.command == "compare":
            csv_text, _ = cmd_compare(config)
            out.mkdir(parents=True, exist_ok=True)
            (out / "compare.csv").write_text(csv_text)
            print(csv_text, end="")
        else:
            if config.sweep_axis is None:
                raise BadAxis("config has no sweep section")
            csv_text = cmd_sweep(config, config.sweep_axis, config.sweep_values)
            out.mkdir(parents=True, exist_ok=True)
            (out / "sweep.csv").write_text(csv_text)
            print(csv_text, end="")
    except CONFIG_ERRORS as exc:
        print(f"amu-sim: config error: {exc}", file=sys.stderr)
        return 1
    except AmuSimError as exc:
        print(f"amu-sim: simulation error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
