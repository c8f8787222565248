"""Command line entry point.

    rominv <subcommand> --config <path> [--out <dir>] [--lambda <list>]

Exit codes: 0 on success, 1 when the configuration or input data fail
validation, 2 when a verification check fails.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import harness
from .config import parse_config
from .errors import ConfigError, NonCoerciveSystemError, SingularPencilError

SUBCOMMANDS = (
    "simulate",
    "rom",
    "grid",
    "internal",
    "invert",
    "verify",
    "repro-1d",
    "repro-2d",
)


def _parse_lambda(raw: Optional[str]) -> Optional[List[float]]:
    if raw is None:
        return None
    toks = raw.replace(",", " ").split()
    if not toks:
        raise ConfigError("--lambda is empty")
    try:
        vals = [float(t) for t in toks]
    except ValueError as exc:
        raise ConfigError(f"--lambda must be a list of numbers, got {raw!r}") from exc
    if any(v <= 0 for v in vals):
        raise ConfigError("--lambda values must be positive")
    return vals


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for verification failures, so usage errors
    # must not go through argparse's sys.exit(2)
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rominv",
        description="spectral-data reduced models and coefficient reconstruction",
    )
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment configuration file")
        p.add_argument("--out", default=None, help="output directory (defaults to the config's)")
        if name in ("internal", "invert", "repro-1d", "repro-2d"):
            p.add_argument(
                "--lambda",
                dest="lam",
                default=None,
                help="override the spectral points, comma or space separated",
            )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            parser.print_usage(sys.stderr)
            return 1
        cfg = parse_config(args.config)
        lam = _parse_lambda(getattr(args, "lam", None))
        if args.subcommand == "simulate":
            written = harness.run_simulate(cfg, args.out)
        elif args.subcommand == "rom":
            written = harness.run_rom(cfg, args.out)
        elif args.subcommand == "grid":
            written = harness.run_grid(cfg, args.out)
        elif args.subcommand == "internal":
            written = harness.run_internal(cfg, args.out, lam)
        elif args.subcommand == "invert":
            written = harness.run_invert(cfg, args.out, lam)
        elif args.subcommand == "repro-1d":
            written = harness.run_repro_1d(cfg, args.out, lam)
        elif args.subcommand == "repro-2d":
            written = harness.run_repro_2d(cfg, args.out, lam)
        else:
            target, ok = harness.run_verify(cfg, args.out)
            with open(target) as fh:
                sys.stdout.write(fh.read())
            if not ok:
                return 2
            return 0
    except (ValueError, NonCoerciveSystemError, SingularPencilError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
