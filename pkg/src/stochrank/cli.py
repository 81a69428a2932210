"""Command-line entry point: ``stochrank <kind> --config FILE [--out DIR] [--seeds 1,2] [--threads N]``."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .config import KINDS, ConfigError, load_config
from .harness import format_value, run_experiment


def _seed_list(text: str) -> List[int]:
    try:
        seeds = [int(s) for s in text.replace(" ", "").split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}")
    if not seeds or any(s < 0 for s in seeds):
        raise argparse.ArgumentTypeError("need at least one non-negative seed")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochrank", description="Stochastic ranking process experiments.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind.replace('_', ' ')} experiment")
        p.add_argument("--config", required=True, help="JSON experiment file")
        p.add_argument("--out", help="output directory (overrides output_dir in the config)")
        p.add_argument("--seeds", type=_seed_list, help="comma-separated seeds (overrides the config)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for replicas")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config, args.kind)
        summary = run_experiment(cfg, out_dir=args.out, seeds=args.seeds, threads=args.threads)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for kind, n, metric, value in summary:
        print("\t".join(format_value(v) for v in (kind, n, metric, value)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
