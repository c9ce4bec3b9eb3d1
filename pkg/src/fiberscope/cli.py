"""``fiberscope`` command line interface."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import parse_config
from .errors import ConfigParseError
from .reporting import EXIT_ERROR, report_json, run, thread_limit

COMMANDS = ("tile-check", "analyze", "decompose", "transform", "beta", "report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fiberscope", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="run configuration file")
        p.add_argument("--out", type=Path, help="output directory (overrides [run] out)")
        p.add_argument("--seed", type=int, help="random seed, overrides the config")
        p.add_argument("--json", action=argparse.BooleanOptionalAction, default=True,
                       help="write report.json / print the report")
        p.add_argument("--csv", action=argparse.BooleanOptionalAction, default=True,
                       help="write CSV dimension and occupancy files")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _fail(as_json: bool, message: str, **extra) -> int:
    if as_json:
        sys.stdout.write(report_json({"error": {"message": message, **extra},
                                      "exit_code": EXIT_ERROR}))
    else:
        print(f"error: {message}", file=sys.stderr)
        for line in extra.get("errors", []):
            print(f"  {line}", file=sys.stderr)
    return EXIT_ERROR


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = args.config.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(args.json, f"cannot read config: {exc}", path=str(args.config))
    try:
        cfg = parse_config(text)
    except ConfigParseError as exc:
        return _fail(args.json, "invalid configuration", type="ConfigParseError", errors=list(exc.errors),
                     path=str(args.config))
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            return _fail(args.json, "--seed must be an unsigned 64-bit integer")
        cfg = cfg.with_seed(args.seed)

    from threadpoolctl import threadpool_limits
    limit = thread_limit()
    with threadpool_limits(limits=limit):
        report, code = run(cfg, args.command, out_dir=args.out, write_json=args.json,
                           write_csv=args.csv, base_dir=args.config.parent)
    if args.json:
        sys.stdout.write(report_json(report))
    else:
        for key, value in sorted(report["verdicts"].items()):
            print(f"{key}: {'true' if value else 'false'}")
        if report["error"]:
            print(f"error: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
