"""Shared fixtures: the bundled case studies and small helper programs."""

import pytest

from minipol.corpus import load_case
from minipol.interp import TestCase
from minipol.lang import TypedProgram, Value
from minipol.parser import parse_program
from minipol.typecheck import type_check

# Nested ifs where only the failing test reaches the inner condition.
ONE_SIDED_SOURCE = """\
fn f(x: int) -> int {
    if (x > 10) {
        if (x > 100) {
            return 2;
        }
        return 1;
    }
    return 0;
}
"""


def checked(source: str, file: str = "<test>") -> TypedProgram:
    return type_check(parse_program(source, file))


def int_test(name: str, function: str, *args, expected) -> TestCase:
    return TestCase(name, function, tuple(Value.integer(a) for a in args), Value.integer(expected))


@pytest.fixture(scope="session")
def tcas():
    return load_case("tcas")


@pytest.fixture(scope="session")
def percentile():
    return load_case("percentile")


@pytest.fixture(scope="session")
def guard():
    return load_case("guard")


@pytest.fixture
def one_sided():
    program = checked(ONE_SIDED_SOURCE)
    suite = [
        int_test("zero", "f", 0, expected=0),
        int_test("five", "f", 5, expected=0),
        int_test("fifty", "f", 50, expected=2),
    ]
    return program, suite
