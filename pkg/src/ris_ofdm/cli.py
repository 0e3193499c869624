"""Command-line entry point: run a preset or custom sweep and write CSV/JSON."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .allocation import InfeasibleAllocation
from .config import PRESETS, ConfigError, load_config, parse_overrides, preset_config
from .harness import run_sweep

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ris-ofdm",
        description="Monte-Carlo throughput/fairness sweeps for localization-based "
                    "RIS-OFDM scheduling.")
    p.add_argument("--config", type=Path, help="INI scenario file")
    p.add_argument("--preset", choices=sorted(PRESETS) + ["custom"], default="custom")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="output file (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.preset != "custom":
            cfg = preset_config(args.preset, cfg)
        extra = parse_overrides(args.override)
        if args.trials is not None:
            extra["trials"] = args.trials
        if args.seed is not None:
            extra["seed"] = args.seed
        cfg = load_config(overrides=extra, base=cfg)
        if args.preset == "custom" and not cfg.sweep_values:
            raise ConfigError("custom runs need sweep_values in the config")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except ConfigError as exc:
        print(f"ris-ofdm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_sweep(cfg, workers=args.threads)
    except InfeasibleAllocation as exc:
        print(f"ris-ofdm: infeasible allocation: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    text = result.to_csv() if args.format == "csv" else result.to_json()
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
