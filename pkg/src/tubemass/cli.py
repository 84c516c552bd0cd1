"""``tubemass`` command line: run scenarios, the acceptance suite, print the schema."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .runner import NumericalFailure, run_scenario
from .scenario import SCHEMA, ScenarioError

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERICAL = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tubemass", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario config")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output directory (default out/<name>)")
    run.add_argument("--plot", action="store_true", help="also write SVG figures")

    ver = sub.add_parser("verify", help="run the acceptance suite")
    ver.add_argument("--filter", default=None,
                     help="comma-separated tags or criterion numbers, e.g. forms or 5,9")
    ver.add_argument("--out", default="verify_out")
    ver.add_argument("--seed", type=int, default=0)

    sub.add_parser("schema", help="print the scenario JSON schema")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "schema":
        print(json.dumps(SCHEMA, indent=2))
        return EXIT_OK
    if args.command == "verify":
        from .verify import verify_suite
        verify_suite(args.filter, args.out, args.seed)
        return EXIT_OK
    try:
        rep = run_scenario(args.config, args.out, args.plot)
    except ScenarioError as exc:
        print(f"tubemass: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except NumericalFailure as exc:
        print(f"tubemass: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, ArithmeticError) as exc:
        print(f"tubemass: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"{rep.name}: {rep.verdict}")
    for k, v in rep.summary.items():
        print(f"  {k}: {v}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
