#!/usr/bin/env python3
"""
minipol - Test-suite driven repair of conditional bugs

Command line entry point.

Usage:
    python -m minipol <command> [options]

Commands:
    repair PROGRAM TESTS   Look for a patch that makes every test pass
    run PROGRAM TESTS      Run the test suite and print each status
    corpus [CASE ...]      Repair the bundled case studies and check their outcomes

Options (repair):
    --mode MODE             condition, precondition or both (default: both)
    --solver SOLVER         internal, smtlib-export or z3 (default: internal)
    --max-level N           Highest building-block level, 0-5 (default: 5)
    --constants STRATEGY    default or mined (default: default)
    --budget-ms MS          Time budget of the whole run (default: 60000)
    --synth-budget-ms MS    Time budget of one synthesis (default: 10000)
    --dump-spectrum PATH    Write the Ochiai ranking as tab-separated text
    --dump-trace PATH       Write the collected rows as tab-separated text
    --smt-out DIR           Write one SMT-LIB 2 script per constraint system
    --report PATH           Write a JSON report

Exit codes: 0 patch found / all tests pass, 1 no patch / some test fails,
2 usage or input error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .corpus import run_corpus
from .driver import build_report, load_program, load_suite, render_report, repair, write_report
from .errors import MinipolError
from .interp import run_suite
from .models import RepairConfig
from .spectrum import format_spectrum

EXIT_OK = 0
EXIT_NOT_FIXED = 1
EXIT_ERROR = 2


def _add_repair_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--mode", choices=["condition", "precondition", "both"], default="both",
        help="Which repair sites to look for (default: both)"
    )
    parser.add_argument(
        "--solver", choices=["internal", "smtlib-export", "z3"], default="internal",
        help="Synthesis backend (default: internal)"
    )
    parser.add_argument(
        "--max-level", type=int, default=5,
        help="Highest building-block level 0-5 (default: 5)"
    )
    parser.add_argument(
        "--constants", choices=["default", "mined"], default="default",
        help="Constant pool: 0/-1/1, or also the program's literals (default: default)"
    )
    parser.add_argument(
        "--budget-ms", type=int, default=60_000,
        help="Time budget of the whole run in ms (default: 60000)"
    )
    parser.add_argument(
        "--synth-budget-ms", type=int, default=10_000,
        help="Time budget of one synthesis in ms (default: 10000)"
    )
    parser.add_argument(
        "--condition-budget", type=int, default=None,
        help="Candidate conditions to examine (default: all)"
    )
    parser.add_argument(
        "--precondition-budget", type=int, default=None,
        help="Candidate statements to examine (default: all)"
    )
    parser.add_argument(
        "--step-budget", type=int, default=1_000_000,
        help="Steps allowed per test execution (default: 1000000)"
    )
    parser.add_argument(
        "--no-trivial-guard", action="store_true",
        help="Accept patches learnt from rows that expect a single boolean"
    )
    parser.add_argument(
        "--no-timings", action="store_true",
        help="Leave timings out of the report (byte-identical reports)"
    )
    parser.add_argument("--dump-spectrum", type=str, default=None, metavar="PATH",
                        help="Write the Ochiai ranking to PATH")
    parser.add_argument("--dump-trace", type=str, default=None, metavar="PATH",
                        help="Write the collected rows to PATH")
    parser.add_argument("--smt-out", type=str, default=None, metavar="DIR",
                        help="Write SMT-LIB 2 scripts into DIR")
    parser.add_argument("--report", type=str, default=None, metavar="PATH",
                        help="Write a JSON report to PATH")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="minipol",
        description="minipol - Test-suite driven repair of conditional bugs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  minipol run minipol/corpus/tcas/tcas.mini minipol/corpus/tcas/tests.json
  minipol repair minipol/corpus/tcas/tcas.mini minipol/corpus/tcas/tests.json --report out.json
  minipol repair prog.mini tests.json --solver smtlib-export --smt-out smt/
  minipol corpus tcas percentile
        """
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="Log pipeline phases (-v) or every angelic run (-vv)"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    repair_cmd = commands.add_parser("repair", help="Look for a patch")
    repair_cmd.add_argument("program", help="mini-lang source file")
    repair_cmd.add_argument("tests", help="JSON test suite")
    _add_repair_options(repair_cmd)

    run_cmd = commands.add_parser("run", help="Run a test suite")
    run_cmd.add_argument("program", help="mini-lang source file")
    run_cmd.add_argument("tests", help="JSON test suite")
    run_cmd.add_argument("--step-budget", type=int, default=1_000_000,
                         help="Steps allowed per test execution (default: 1000000)")

    corpus_cmd = commands.add_parser("corpus", help="Check the bundled case studies")
    corpus_cmd.add_argument("cases", nargs="*", help="Case names (default: all)")

    return parser.parse_args(argv)


def config_from_args(args: argparse.Namespace) -> RepairConfig:
    """Build the repair configuration from parsed flags.

    Raises:
        ValidationError: On out-of-range values.
    """
    return RepairConfig(
        mode=args.mode,
        solver=args.solver,
        max_level=args.max_level,
        constants=args.constants,
        budget_ms=args.budget_ms,
        synth_budget_ms=args.synth_budget_ms,
        condition_budget=args.condition_budget,
        precondition_budget=args.precondition_budget,
        step_budget=args.step_budget,
        trivial_guard=not args.no_trivial_guard,
        smt_out=args.smt_out,
        dump_trace=args.dump_trace,
        record_timings=not args.no_timings,
    )


def cmd_run(args: argparse.Namespace) -> int:
    program = load_program(args.program)
    suite = load_suite(args.tests, program)
    records = run_suite(program, suite, step_budget=args.step_budget)
    for record in records:
        print(f"{record.test.name}: {record.describe()}")
    passed = sum(1 for r in records if r.passed)
    print(f"{passed} pass / {len(records) - passed} fail")
    return EXIT_OK if passed == len(records) else EXIT_NOT_FIXED


def cmd_repair(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    program = load_program(args.program)
    suite = load_suite(args.tests, program)
    result = repair(program, suite, config)
    if args.dump_spectrum:
        Path(args.dump_spectrum).write_text(format_spectrum(result.spectrum), encoding="utf-8")
    if args.report:
        write_report(build_report(result, config.record_timings), args.report)
    print(render_report(result), end="")
    for line in result.diagnostics:
        print(f"  {line}")
    return EXIT_OK if result.found else EXIT_NOT_FIXED


def cmd_corpus(args: argparse.Namespace) -> int:
    checks = run_corpus(args.cases or None)
    for check in checks:
        if check.ok and check.result is not None and check.result.patch is not None:
            patch = check.result.patch
            print(f"{check.name}: ok (line {patch.loc.line}: {patch.expression_text})")
        elif check.ok:
            print(f"{check.name}: ok (no patch)")
        else:
            print(f"{check.name}: MISMATCH")
            for problem in check.problems:
                print(f"  {problem}")
    failed = sum(1 for c in checks if not c.ok)
    print(f"{len(checks) - failed} of {len(checks)} cases reproduced")
    return EXIT_OK if failed == 0 else EXIT_NOT_FIXED


COMMANDS = {"run": cmd_run, "repair": cmd_repair, "corpus": cmd_corpus}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        return COMMANDS[args.command](args)
    except MinipolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValidationError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
