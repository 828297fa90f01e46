"""Tests for minipol.interp: execution, directives and instrumentation."""

import pytest

from minipol.errors import RepairError, SuiteError
from minipol.interp import (
    Directive, FaultKind, Status, TestCase, evaluate, run_suite, run_test,
)
from minipol.lang import Type, Value
from minipol.parser import parse_expression
from minipol.typecheck import check_expression
from tests.conftest import checked, int_test

LOOP_SOURCE = """\
fn total(n: int) -> int {
    let i: int = 0;
    let s: int = 0;
    while (i < n) {
        s = s + i;
        i = i + 1;
    }
    return s;
}
"""


def _cond_at(program, line):
    return next(s.cond for s in program.if_statements() if s.loc.line == line)


class TestRunSuite:
    def test_tcas_baseline(self, tcas):
        records = run_suite(tcas.program, tcas.suite)
        assert [r.status for r in records] == [
            Status.PASS, Status.FAIL, Status.PASS, Status.FAIL, Status.PASS]
        assert records[1].actual == Value.integer(0)

    def test_percentile_fault(self, percentile):
        records = {r.test.name: r for r in run_suite(percentile.program, percentile.suite)}
        failing = records["upper_quartile_of_three"]
        assert failing.status is Status.ERROR
        assert failing.fault is not None
        assert failing.fault.kind is FaultKind.INDEX_OUT_OF_BOUNDS
        assert failing.fault.loc.line == 15
        assert records["interpolated"].actual == Value.real(15.0)

    def test_guard_fault(self, guard):
        records = run_suite(guard.program, guard.suite)
        assert [r.status.value for r in records] == ["pass", "pass", "pass", "runtime_error"]


class TestExecution:
    def test_loop(self):
        program = checked(LOOP_SOURCE)
        record = run_test(program, int_test("t", "total", 4, expected=6))
        assert record.passed
        assert record.steps > 0

    def test_step_budget(self):
        program = checked(LOOP_SOURCE)
        record = run_test(program, int_test("t", "total", 1000, expected=0), step_budget=50)
        assert record.status is Status.ERROR
        assert record.fault is not None and record.fault.kind is FaultKind.STEP_BUDGET

    def test_division_by_zero(self):
        program = checked("fn f(x: int) -> int { return 10 / x; }")
        record = run_test(program, int_test("t", "f", 0, expected=0))
        assert record.fault is not None and record.fault.kind is FaultKind.DIVISION_BY_ZERO

    def test_integer_division_truncates(self):
        program = checked("fn f(x: int) -> int { return x / 2; }")
        assert run_test(program, int_test("t", "f", -7, expected=-3)).passed

    def test_overflow(self):
        program = checked("fn f(x: int) -> int { return x * x; }")
        record = run_test(program, int_test("t", "f", 2 ** 40, expected=0))
        assert record.fault is not None and record.fault.kind is FaultKind.OVERFLOW

    def test_real_tolerance(self):
        program = checked("fn f(x: real) -> real { return x + 0.1 + 0.2; }")
        test = TestCase("t", "f", (Value.real(0.0),), Value.real(0.3))
        assert run_test(program, test).passed

    def test_array_assignment_is_local(self):
        program = checked("fn f(a: array<int>) -> int { a[0] = 5; return a[0] + a[1]; }")
        test = TestCase("t", "f", (Value.array(Type.INT, [1, 2]),), Value.integer(7))
        assert run_test(program, test).passed
        assert test.inputs[0].data == (1, 2)


class TestDirectives:
    def test_force_condition(self, tcas):
        cond = _cond_at(tcas.program, 7)
        t2 = tcas.suite[1]
        assert run_test(tcas.program, t2, Directive.force(cond.node_id, True)).passed
        assert not run_test(tcas.program, t2, Directive.force(cond.node_id, False)).passed

    def test_skip_statement(self, guard):
        stmt = next(s for s in guard.program.statements() if s.loc.line == 6)
        local_file = guard.suite[3]
        record = run_test(guard.program, local_file, Directive.skip(stmt.node_id))
        assert record.passed
        assert stmt.node_id not in record.covered
        assert any(h.node_id == stmt.node_id and h.skipped for h in record.statement_hits)

    def test_skipping_the_returning_branch(self, tcas):
        branch = tcas.program.if_statements()[1]
        record = run_test(tcas.program, tcas.suite[0], Directive.skip(branch.node_id))
        assert record.status is Status.ERROR
        assert record.fault is not None and record.fault.kind is FaultKind.NO_RETURN

    def test_directive_on_wrong_node(self, tcas):
        cond = _cond_at(tcas.program, 7)
        with pytest.raises(RepairError):
            run_test(tcas.program, tcas.suite[0], Directive.skip(cond.node_id))
        with pytest.raises(RepairError):
            run_test(tcas.program, tcas.suite[0], Directive.force(tcas.program.if_statements()[0].node_id, True))


class TestInstrumentation:
    def test_condition_evals_carry_snapshot(self, tcas):
        cond = _cond_at(tcas.program, 7)
        record = run_test(tcas.program, tcas.suite[0])
        evals = [e for e in record.condition_evals if e.node_id == cond.node_id]
        assert len(evals) == 1
        assert evals[0].m == 1
        assert evals[0].outcome is False
        assert dict(evals[0].snapshot)["bias"] == Value.integer(100)

    def test_loop_condition_counts(self):
        program = checked(LOOP_SOURCE)
        record = run_test(program, int_test("t", "total", 3, expected=3))
        assert [e.m for e in record.condition_evals] == [1, 2, 3, 4]
        assert [e.outcome for e in record.condition_evals] == [True, True, True, False]

    def test_uninstrumented_snapshots_empty(self, tcas):
        record = run_test(tcas.program, tcas.suite[0], instrument=False)
        assert all(e.snapshot == () for e in record.condition_evals)


class TestSuiteChecks:
    def test_unknown_function(self, tcas):
        with pytest.raises(SuiteError, match="no function"):
            run_test(tcas.program, int_test("t", "nope", expected=0))

    def test_wrong_arity(self, tcas):
        with pytest.raises(SuiteError, match="takes 3 inputs"):
            run_test(tcas.program, int_test("t", "is_upward_preferred", 1, expected=0))

    def test_wrong_input_type(self, tcas):
        test = int_test("t", "is_upward_preferred", 1, 2, 3, expected=0)
        with pytest.raises(SuiteError, match="must be bool"):
            run_test(tcas.program, test)


class TestEvaluate:
    def test_short_circuit(self):
        expr = parse_expression("n > 0 && 10 / n > 1")
        check_expression(expr, {"n": Type.INT})
        assert evaluate(expr, {"n": Value.integer(0)}) == Value.boolean(False)

    def test_builtins(self):
        expr = parse_expression("int(floor(x)) + len(a)")
        check_expression(expr, {"x": Type.REAL, "a": Type.ARRAY_INT})
        env = {"x": Value.real(2.7), "a": Value.array(Type.INT, [1, 2, 3])}
        assert evaluate(expr, env) == Value.integer(5)
