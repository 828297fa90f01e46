"""Tests for minipol.angelic: angelic condition and precondition localization."""

import pytest

from minipol.angelic import (
    PairKind, SearchStats, locate_condition_fixes, locate_precondition_fixes,
)
from minipol.interp import Directive, run_suite, run_test
from minipol.spectrum import rank_conditions, rank_statements, spectrum_of
from tests.conftest import checked, int_test


def _failing(program, suite):
    return [r.test for r in run_suite(program, suite) if not r.passed]


def _ladder(n: int):
    """``n`` independent ifs; the suite expects the count of thresholds below x, minus one."""
    lines = ["fn count(x: int) -> int {", "    let c: int = 0;"]
    for i in range(n):
        lines.append(f"    if (x > {i * 10}) {{ c = c + 1; }}")
    lines += ["    return c;", "}"]
    program = checked("\n".join(lines) + "\n")
    suite = [
        int_test("low", "count", -5, expected=0),
        int_test("high", "count", 1000, expected=n - 1),
        int_test("higher", "count", 2000, expected=n - 1),
    ]
    return program, suite


class TestConditionLocalization:
    def test_tcas_only_line_7_is_angelic(self, tcas):
        program = tcas.program
        failing = _failing(program, tcas.suite)
        ranked = rank_conditions(program, spectrum_of(program, run_suite(program, tcas.suite), tcas.suite))
        pairs = locate_condition_fixes(program, failing, ranked)
        assert [p.loc.line for p in pairs] == [7]
        assert pairs[0].kind is PairKind.CONDITION
        assert pairs[0].values == {"t2": True, "t4": True}

    def test_angelic_value_makes_test_pass(self, tcas):
        program = tcas.program
        failing = _failing(program, tcas.suite)
        ranked = rank_conditions(program, spectrum_of(program, run_suite(program, tcas.suite), tcas.suite))
        pair = locate_condition_fixes(program, failing, ranked)[0]
        for test in failing:
            assert run_test(program, test, pair.directive(test.name)).passed

    def test_percentile(self, percentile):
        program = percentile.program
        failing = _failing(program, percentile.suite)
        ranked = rank_conditions(program, spectrum_of(program, run_suite(program, percentile.suite),
                                                      percentile.suite))
        stats = SearchStats()
        pairs = locate_condition_fixes(program, failing, ranked, stats=stats)
        assert [p.loc.line for p in pairs] == [12]
        assert pairs[0].values == {"upper_quartile_of_three": True}
        assert stats.candidates == 2

    def test_guard_has_no_conditions(self, guard):
        program = guard.program
        failing = _failing(program, guard.suite)
        ranked = rank_conditions(program, spectrum_of(program, run_suite(program, guard.suite), guard.suite))
        assert ranked == []
        assert locate_condition_fixes(program, failing, ranked) == []

    def test_budget_limits_candidates(self, tcas):
        program = tcas.program
        failing = _failing(program, tcas.suite)
        ranked = rank_conditions(program, spectrum_of(program, run_suite(program, tcas.suite), tcas.suite))
        stats = SearchStats()
        assert locate_condition_fixes(program, failing, ranked, budget=1, stats=stats) == []
        assert stats.candidates == 1

    @pytest.mark.parametrize("n", [1, 5, 20])
    def test_search_space_bound(self, n):
        program, suite = _ladder(n)
        failing = _failing(program, suite)
        assert len(failing) == 2
        ranked = [(s.cond.node_id, 1.0) for s in program.if_statements()]
        stats = SearchStats()
        pairs = locate_condition_fixes(program, failing, ranked, stats=stats)
        assert stats.candidates == n
        assert stats.executions <= 2 * n * len(failing)
        assert len(pairs) == n
        assert all(set(p.values.values()) == {False} for p in pairs)


class TestPreconditionLocalization:
    def test_guard(self, guard):
        program = guard.program
        failing = _failing(program, guard.suite)
        ranked = rank_statements(program, spectrum_of(program, run_suite(program, guard.suite), guard.suite))
        stats = SearchStats()
        pairs = locate_precondition_fixes(program, failing, ranked, stats=stats)
        assert [p.loc.line for p in pairs] == [6]
        assert pairs[0].kind is PairKind.PRECONDITION
        assert pairs[0].values == {"local_file": False}
        assert pairs[0].directive("local_file") == Directive.skip(pairs[0].node_id)
        assert stats.executions == len(failing)

    def test_tcas_skipping_does_not_help(self, tcas):
        program = tcas.program
        failing = _failing(program, tcas.suite)
        ranked = rank_statements(program, spectrum_of(program, run_suite(program, tcas.suite), tcas.suite))
        assert locate_precondition_fixes(program, failing, ranked) == []
