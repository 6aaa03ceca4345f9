"""Command line entry point: ``hsx <kind> --config <path> [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from .config import KINDS, load_config
from .errors import HSXError, ParseError, ValidationError
from .runner import run


def _times(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hsx", description="Conservative Hunter-Saxton solver and metric")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-n", type=int, dest="grid_n")
    p.add_argument("--times", type=_times)
    return p


def _fail(err: dict, code: int) -> int:
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"kind": args.kind, "seed": args.seed, "grid_n": args.grid_n, "times": args.times, "out": args.out}
    try:
        cfg = load_config(args.config, overrides)
        result = run(cfg)
    except (ValidationError, ParseError) as exc:
        return _fail(exc.to_dict(), 2)
    except HSXError as exc:
        return _fail(exc.to_dict(), 1)
    summary = {k: v for k, v in result.items() if k != "files"}
    summary["files"] = len(result["files"])
    print(json.dumps(summary, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
