"""
minipol - Test-suite driven repair of conditional bugs

minipol repairs buggy if conditions and missing preconditions in programs
written in mini-lang, a small typed imperative language. It ranks statements
with Ochiai, finds angelic values by forcing conditions or skipping
statements in the failing tests, collects the values in scope at the repair
site over the whole suite and synthesizes a condition from building blocks
with an oracle-guided encoding. Every patch is validated against the full
suite before it is reported.
"""

__version__ = "0.1.0"
__author__ = "minipol Project"

from .driver import Patch, PatchKind, RepairResult, apply_patch, load_program, load_suite, repair, validate
from .errors import MinipolError
from .interp import TestCase, run_suite, run_test
from .models import RepairConfig, RepairReport
from .parser import parse_program
from .printer import pretty_print
from .typecheck import type_check

__all__ = [
    "MinipolError",
    "Patch",
    "PatchKind",
    "RepairConfig",
    "RepairReport",
    "RepairResult",
    "TestCase",
    "apply_patch",
    "load_program",
    "load_suite",
    "parse_program",
    "pretty_print",
    "repair",
    "run_suite",
    "run_test",
    "type_check",
    "validate",
]
