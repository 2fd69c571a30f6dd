"""Command line: ``mcf-arrival {run,analyze,export,verify}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import (ConfigError, FormatError, IncompleteSweepError, InvalidParameterError,
                     MCFError, ShapeRejectedError)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_INCOMPLETE, EXIT_FORMAT, EXIT_VERIFY = 0, 2, 3, 4, 5, 6


def exit_code(err: MCFError) -> int:
    if isinstance(err, IncompleteSweepError):
        return EXIT_INCOMPLETE
    if isinstance(err, FormatError):
        return EXIT_FORMAT
    if isinstance(err, (ConfigError, InvalidParameterError, ShapeRejectedError)):
        return EXIT_CONFIG
    return EXIT_NUMERICAL


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   dest="overrides", help="override one config key (repeatable)")
    p.add_argument("--out", metavar="DIR", help="output directory (output.dir)")
    p.add_argument("--seed", type=int, metavar="N", help="sampling seed")
    p.add_argument("--quiet", action="store_true", help="only print errors")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcf-arrival",
        description="Mean curvature flow by level sets and C^2 analysis of the arrival time.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="sample, evolve and analyze a scenario")
    _common(p)

    p = sub.add_parser("analyze", help="analyze a stored arrival field")
    p.add_argument("field", help="MCAF file with the arrival flag")
    _common(p)

    p = sub.add_parser("export", help="convert an MCAF field to CSV or a PGM heatmap")
    p.add_argument("field", help="MCAF file")
    p.add_argument("--format", choices=("csv", "pgm"), default="pgm")
    _common(p)

    p = sub.add_parser("verify", help="run the acceptance checks and print a table")
    p.add_argument("--only", type=int, action="append", metavar="K",
                   help="run criterion K only (repeatable)")
    p.add_argument("--stencil-fault", type=float, default=None, help=argparse.SUPPRESS)
    _common(p)
    return parser


def _summary(report: dict) -> str:
    lines = [f"verdict: {report['verdict']}"]
    if report["witness"]:
        lines.append(f"witness: {report['witness']}")
    for c in report["time_clusters"]:
        lines.append(f"singular time {c['time']:.6g} ({len(c['members'])} point(s))")
    for m in report["manifolds"]:
        lines.append(f"component k={m['k']}: {m['n_points']} point(s), closed {m['closed']}")
    return "\n".join(lines)


def _verify(args, cfg) -> int:
    from .acceptance import format_table, run_all

    def progress(result):
        if not args.quiet:
            print(f"criterion {result.number}: {'PASS' if result.passed else 'FAIL'} "
                  f"({result.seconds:.1f}s)", flush=True)

    results = run_all(seed=cfg["seed"], only=args.only, stencil_fault=args.stencil_fault,
                      progress=progress)
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    if failed:
        print("failed: " + ", ".join(f"{r.number} ({r.name})" for r in failed))
        return EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s")
    from . import pipeline
    from .config import load_config

    stage = "config"
    try:
        cfg = load_config(args.config, args.overrides, seed=args.seed, out=args.out)
        stage = args.command
        if args.command == "verify":
            return _verify(args, cfg)
        if args.command == "export":
            target = pipeline.export(args.field, Path(cfg["output.dir"]), args.format)
            if not args.quiet:
                print(target)
            return EXIT_OK
        if args.command == "run":
            report = pipeline.run(cfg)
        else:
            report = pipeline.analyze(args.field, cfg)
        if not args.quiet:
            print(_summary(report))
            print(f"artifacts in {cfg['output.dir']}")
        return EXIT_OK
    except MCFError as err:
        tag = getattr(err, "stage", None) or stage
        print(f"error [{tag}]: {err}", file=sys.stderr)
        return exit_code(err)
    except OSError as err:
        print(f"error [{stage}]: {err}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
