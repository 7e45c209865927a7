"""``echo-run``: run, plot, list and validate echo scenarios."""
from __future__ import annotations

import argparse
import logging
import sys

from .exceptions import TorusEchoError
from .harness import (
    WORKERS_ENV,
    bundled_scenarios,
    emit_plots,
    load_report,
    load_scenario,
    run_scenario,
)

SUBCOMMANDS = ("run", "plot", "list-scenarios", "validate")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="echo-run",
        description="Loschmidt echo sweeps on the flat torus.",
        epilog=f"Worker count: --workers or the {WORKERS_ENV} environment variable (default 1).",
    )
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command")

    r = sub.add_parser("run", help="run a scenario and write CSV, manifest and plots")
    r.add_argument("scenario", help="TOML file or bundled scenario name")
    r.add_argument("--out", help="output directory (default: the scenario's 'output' entry)")
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--no-plots", action="store_true")

    pl = sub.add_parser("plot", help="redraw plots from a finished run directory")
    pl.add_argument("run_dir")
    pl.add_argument("--out", help="directory for the SVG files (default: run_dir)")

    sub.add_parser("list-scenarios", help="list bundled scenarios")

    v = sub.add_parser("validate", help="parse and check a scenario without running it")
    v.add_argument("scenario")
    return p


def _shorthand(argv: list[str]) -> list[str]:
    """``--scenario FILE [--out DIR]`` without a subcommand means ``run``."""
    if any(a in SUBCOMMANDS for a in argv):
        return argv
    if "--scenario" in argv:
        i = argv.index("--scenario")
        if i + 1 >= len(argv):
            return argv
        rest = argv[:i] + argv[i + 2 :]
        return ["run", argv[i + 1]] + rest
    for a in argv:
        if a.startswith("--scenario="):
            rest = [b for b in argv if b is not a]
            return ["run", a.split("=", 1)[1]] + rest
    return argv


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(_shorthand(list(sys.argv[1:] if argv is None else argv)))
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list-scenarios":
            for name in bundled_scenarios():
                print(name)
            return 0
        if args.command == "validate":
            s = load_scenario(args.scenario)
            print(f"{s.name}: ok ({len(s.hbars)} rungs, {len(s.times)} times, {len(s.observables)} observables)")
            return 0
        if args.command == "plot":
            rep = load_report(args.run_dir)
            for path in emit_plots(rep, args.out or args.run_dir):
                print(path)
            return 0 if rep.passed else 1
        if args.command == "run":
            s = load_scenario(args.scenario)
            out = args.out or s.output
            rep = run_scenario(s, out_dir=out, workers=args.workers)
            print(rep.table())
            if out and not args.no_plots:
                emit_plots(rep, out)
            return 0 if rep.passed else 1
    except TorusEchoError as exc:
        print(f"echo-run: error: {exc}", file=sys.stderr)
        return 2
    _parser().print_help()
    return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
