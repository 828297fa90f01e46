"""Tree-walking interpreter with execution directives and instrumentation.

A test run can carry one :class:`Directive`: force every evaluation of an if
condition to a fixed boolean, or turn every dynamic occurrence of a statement
into a no-op. With instrumentation on, each condition evaluation and each
statement hit is recorded together with a snapshot of the variables in scope.

Faults of the program under test (index out of bounds, integer overflow,
division by zero, step budget) end the run with an ``ERROR`` status; they
never escape :func:`run_test` as exceptions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, NoReturn, Optional, Sequence

from .errors import RepairError, SuiteError
from .lang import (
    INT_MAX, INT_MIN, Assign, Binary, Block, Call, Decl, Expr, If, Index,
    Literal, Return, SourceLoc, Stmt, Type, TypedProgram, Unary, Value, VarRef,
    While, is_skippable,
)

logger = logging.getLogger(__name__)

# Absolute tolerance when comparing REAL results against expected values.
TOLERANCE = 1e-9
DEFAULT_STEP_BUDGET = 1_000_000


class Status(Enum):
    PASS = "pass"
    FAIL = "fail"
    ERROR = "runtime_error"


class FaultKind(Enum):
    INDEX_OUT_OF_BOUNDS = "index out of bounds"
    OVERFLOW = "arithmetic overflow"
    DIVISION_BY_ZERO = "division by zero"
    STEP_BUDGET = "step budget exhausted"
    NO_RETURN = "end of function reached without a return"  # only under a skip directive


@dataclass(frozen=True)
class RuntimeFault:
    kind: FaultKind
    loc: SourceLoc

    def __str__(self) -> str:
        return f"{self.kind.value} at line {self.loc.line}"


class RuntimeTrap(Exception):
    """Raised by :func:`evaluate` when an expression faults."""

    def __init__(self, fault: RuntimeFault):
        self.fault = fault
        super().__init__(str(fault))


@dataclass(frozen=True)
class TestCase:
    """One input/expected-output record for an entry function."""

    __test__ = False  # not a pytest class

    name: str
    function: str
    inputs: tuple[Value, ...]
    expected: Value


class DirectiveKind(Enum):
    FORCE_CONDITION = "force_condition"
    SKIP_STATEMENT = "skip_statement"


@dataclass(frozen=True)
class Directive:
    kind: DirectiveKind
    node_id: int
    value: Optional[bool] = None

    @classmethod
    def force(cls, node_id: int, value: bool) -> "Directive":
        return cls(DirectiveKind.FORCE_CONDITION, node_id, value)

    @classmethod
    def skip(cls, node_id: int) -> "Directive":
        return cls(DirectiveKind.SKIP_STATEMENT, node_id)

    def __str__(self) -> str:
        if self.kind is DirectiveKind.FORCE_CONDITION:
            return f"force node {self.node_id} to {str(self.value).lower()}"
        return f"skip node {self.node_id}"


# Variables in scope, in declaration order (parameters first).
Snapshot = tuple[tuple[str, Value], ...]


@dataclass(frozen=True)
class ConditionEval:
    node_id: int
    m: int
    outcome: bool
    snapshot: Snapshot


@dataclass(frozen=True)
class StatementHit:
    node_id: int
    m: int
    snapshot: Snapshot
    skipped: bool = False


@dataclass
class ExecutionRecord:
    """Outcome of one test execution.

    Attributes:
        test: The executed test.
        status: PASS, FAIL (wrong value returned) or ERROR (runtime fault).
        actual: Returned value, if the function returned.
        fault: The runtime fault for ERROR statuses.
        covered: Statement node ids executed at least once (skipped ones excluded).
        condition_evals: Every if/while condition evaluation, in execution order.
        statement_hits: Every statement reached, in execution order.
        steps: Statements and loop iterations executed.
    """

    test: TestCase
    status: Status = Status.ERROR
    actual: Optional[Value] = None
    fault: Optional[RuntimeFault] = None
    covered: set[int] = field(default_factory=set)
    condition_evals: list[ConditionEval] = field(default_factory=list)
    statement_hits: list[StatementHit] = field(default_factory=list)
    steps: int = 0

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def describe(self) -> str:
        if self.status is Status.PASS:
            return "pass"
        if self.status is Status.FAIL:
            return f"fail (expected {self.test.expected}, got {self.actual})"
        return f"runtime_error ({self.fault})"


# ---------------------------------------------------------------------------
# Expression semantics (shared by run_test and evaluate)
# ---------------------------------------------------------------------------

def _trap(kind: FaultKind, loc: SourceLoc) -> NoReturn:
    raise RuntimeTrap(RuntimeFault(kind, loc))


def _check_int(i: int, loc: SourceLoc) -> Value:
    if i < INT_MIN or i > INT_MAX:
        _trap(FaultKind.OVERFLOW, loc)
    return Value.integer(i)


def _check_real(x: float, loc: SourceLoc) -> Value:
    if math.isinf(x) or math.isnan(x):
        _trap(FaultKind.OVERFLOW, loc)
    return Value.real(x)


def _int_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def apply_binary(op: str, lhs: Value, rhs: Value, loc: SourceLoc) -> Value:
    """Apply a non-short-circuit binary operator to two evaluated operands."""
    a, b = lhs.data, rhs.data
    if op in ("<", "<=", "==", "!=", ">", ">="):
        result = {
            "<": a < b, "<=": a <= b, "==": a == b,  # type: ignore[operator]
            "!=": a != b, ">": a > b, ">=": a >= b,  # type: ignore[operator]
        }[op]
        return Value.boolean(result)
    if op == "&&":
        return Value.boolean(bool(a) and bool(b))
    if op == "||":
        return Value.boolean(bool(a) or bool(b))
    if op == "/" and b == 0:
        _trap(FaultKind.DIVISION_BY_ZERO, loc)
    if lhs.type is Type.INT:
        if op == "+":
            return _check_int(a + b, loc)  # type: ignore[operator]
        if op == "-":
            return _check_int(a - b, loc)  # type: ignore[operator]
        if op == "*":
            return _check_int(a * b, loc)  # type: ignore[operator]
        return _check_int(_int_div(a, b), loc)  # type: ignore[arg-type]
    try:
        if op == "+":
            return _check_real(a + b, loc)  # type: ignore[operator]
        if op == "-":
            return _check_real(a - b, loc)  # type: ignore[operator]
        if op == "*":
            return _check_real(a * b, loc)  # type: ignore[operator]
        return _check_real(a / b, loc)  # type: ignore[operator]
    except OverflowError:
        _trap(FaultKind.OVERFLOW, loc)
    raise AssertionError(f"unknown operator {op}")


def apply_unary(op: str, operand: Value, loc: SourceLoc) -> Value:
    if op == "!":
        return Value.boolean(not operand.data)
    if operand.type is Type.INT:
        return _check_int(-operand.data, loc)  # type: ignore[operator]
    return Value.real(-operand.data)  # type: ignore[operator]


def apply_builtin(name: str, arg: Value, loc: SourceLoc) -> Value:
    if name == "len":
        return Value.integer(len(arg.data))  # type: ignore[arg-type]
    if name == "floor":
        return Value.real(float(math.floor(arg.data)))  # type: ignore[arg-type]
    if name == "int":
        return _check_int(math.trunc(arg.data), loc)  # type: ignore[arg-type]
    if name == "real":
        return Value.real(float(arg.data))  # type: ignore[arg-type]
    if name == "sort":
        return Value(arg.type, tuple(sorted(arg.data)))  # type: ignore[arg-type]
    raise AssertionError(f"unknown built-in {name}")


def _index(array: Value, index: Value, loc: SourceLoc) -> Value:
    items: tuple = array.data  # type: ignore[assignment]
    i: int = index.data  # type: ignore[assignment]
    if i < 0 or i >= len(items):
        _trap(FaultKind.INDEX_OUT_OF_BOUNDS, loc)
    return Value(array.type.element, items[i])


def evaluate(expr: Expr, env: Mapping[str, Value]) -> Value:
    """Evaluate a pure expression under ``env``.

    Raises:
        RuntimeTrap: If evaluation faults (overflow, bad index, division by zero).
        KeyError: If a variable is missing from ``env``.
    """
    match expr:
        case Literal(value=value):
            result = value
        case VarRef(name=name):
            result = env[name]
        case Unary(op=op, operand=operand):
            result = apply_unary(op, evaluate(operand, env), expr.loc)
        case Binary(op="&&", lhs=lhs, rhs=rhs):
            result = evaluate(rhs, env) if evaluate(lhs, env).data else Value.boolean(False)
        case Binary(op="||", lhs=lhs, rhs=rhs):
            result = Value.boolean(True) if evaluate(lhs, env).data else evaluate(rhs, env)
        case Binary(op=op, lhs=lhs, rhs=rhs):
            result = apply_binary(op, evaluate(lhs, env), evaluate(rhs, env), expr.loc)
        case Index(array=array, index=index):
            result = _index(evaluate(array, env), evaluate(index, env), expr.loc)
        case Call(name=name, args=[arg]):
            result = apply_builtin(name, evaluate(arg, env), expr.loc)
        case _:
            raise TypeError(f"cannot evaluate {expr!r}")
    assert expr.type is None or result.type is expr.type, (
        f"{expr.loc}: value of type {result.type} from expression typed {expr.type}")
    return result


# ---------------------------------------------------------------------------
# Statement execution
# ---------------------------------------------------------------------------

class _Returned(Exception):
    def __init__(self, value: Value):
        self.value = value


class _Execution:
    def __init__(self, program: TypedProgram, record: ExecutionRecord,
                 directive: Optional[Directive], instrument: bool, step_budget: int):
        self.program = program
        self.record = record
        self.directive = directive
        self.instrument = instrument
        self.step_budget = step_budget
        self.env: dict[str, Value] = {}
        self.counts: dict[int, int] = {}

    def snapshot(self) -> Snapshot:
        return tuple(self.env.items()) if self.instrument else ()

    def next_m(self, node_id: int) -> int:
        m = self.counts.get(node_id, 0) + 1
        self.counts[node_id] = m
        return m

    def step(self, loc: SourceLoc) -> None:
        self.record.steps += 1
        if self.record.steps > self.step_budget:
            _trap(FaultKind.STEP_BUDGET, loc)

    def run_block(self, block: Block) -> None:
        declared = set(self.env)
        try:
            for stmt in block.statements:
                self.run_statement(stmt)
        finally:
            for name in [n for n in self.env if n not in declared]:
                del self.env[name]

    def run_statement(self, stmt: Stmt) -> None:
        self.step(stmt.loc)
        directive = self.directive
        skipped = (directive is not None and directive.kind is DirectiveKind.SKIP_STATEMENT
                   and directive.node_id == stmt.node_id)
        self.record.statement_hits.append(
            StatementHit(stmt.node_id, self.next_m(stmt.node_id), self.snapshot(), skipped))
        if skipped:
            return
        self.record.covered.add(stmt.node_id)
        match stmt:
            case Decl(name=name, init=init):
                self.env[name] = evaluate(init, self.env)
            case Assign(target=target, index=None, value=value):
                self.env[target] = evaluate(value, self.env)
            case Assign(target=target, index=index, value=value):
                array = self.env[target]
                i = evaluate(index, self.env)  # type: ignore[arg-type]
                new = evaluate(value, self.env)
                _index(array, i, stmt.loc)
                items = list(array.data)  # type: ignore[arg-type]
                items[i.data] = new.data  # type: ignore[index]
                self.env[target] = Value(array.type, tuple(items))
            case If(cond=cond, then_block=then_block, else_block=else_block):
                if self.condition(cond):
                    self.run_block(then_block)
                elif else_block is not None:
                    self.run_block(else_block)
            case While(cond=cond, body=body):
                while self.condition(cond):
                    self.run_block(body)
                    self.step(stmt.loc)
            case Return(value=value):
                raise _Returned(evaluate(value, self.env))
            case Block():
                self.run_block(stmt)

    def condition(self, cond: Expr) -> bool:
        directive = self.directive
        if (directive is not None and directive.kind is DirectiveKind.FORCE_CONDITION
                and directive.node_id == cond.node_id):
            outcome = bool(directive.value)
        else:
            outcome = bool(evaluate(cond, self.env).data)
        self.record.condition_evals.append(
            ConditionEval(cond.node_id, self.next_m(cond.node_id), outcome, self.snapshot()))
        return outcome


def check_test(program: TypedProgram, test: TestCase) -> None:
    """Verify that ``test`` matches the signature of its entry function.

    Raises:
        SuiteError: Unknown function, wrong arity or wrongly typed values.
    """
    fn = program.function(test.function)
    if fn is None:
        raise SuiteError(f"test '{test.name}': no function '{test.function}' in {program.file}")
    if len(test.inputs) != len(fn.params):
        raise SuiteError(f"test '{test.name}': '{fn.name}' takes {len(fn.params)} inputs, "
                         f"got {len(test.inputs)}")
    for param, value in zip(fn.params, test.inputs):
        if value.type is not param.type:
            raise SuiteError(f"test '{test.name}': input '{param.name}' must be {param.type}, "
                             f"got {value.type}")
    if test.expected.type is not fn.return_type:
        raise SuiteError(f"test '{test.name}': expected value must be {fn.return_type}, "
                         f"got {test.expected.type}")


def _check_directive(program: TypedProgram, directive: Directive) -> None:
    if directive.kind is DirectiveKind.FORCE_CONDITION:
        if not program.is_if_condition(directive.node_id) or directive.value is None:
            raise RepairError(f"node {directive.node_id} is not an if condition")
    elif not is_skippable(program.node(directive.node_id)):
        raise RepairError(f"node {directive.node_id} is not a skippable statement")


def run_test(program: TypedProgram, test: TestCase, directive: Optional[Directive] = None,
             instrument: bool = True, step_budget: int = DEFAULT_STEP_BUDGET) -> ExecutionRecord:
    """Execute one test, optionally under a directive.

    Args:
        program: A type-checked program.
        test: The test to run; must match its entry function's signature.
        directive: Force a condition or skip a statement for this run.
        instrument: Record scope snapshots (off for the cheap angelic runs).
        step_budget: Maximum executed statements plus loop iterations.

    Returns:
        The execution record; runtime faults appear as an ERROR status.

    Raises:
        SuiteError: If the test does not match the program.
        RepairError: If the directive targets an unsuitable node.
    """
    check_test(program, test)
    if directive is not None:
        _check_directive(program, directive)
    fn = program.function(test.function)
    assert fn is not None
    record = ExecutionRecord(test)
    execution = _Execution(program, record, directive, instrument, step_budget)
    execution.env = {p.name: v for p, v in zip(fn.params, test.inputs)}
    try:
        execution.run_block(fn.body)
        _trap(FaultKind.NO_RETURN, fn.loc)
    except _Returned as ret:
        record.actual = ret.value
        matched = test.expected.matches(ret.value, TOLERANCE)
        record.status = Status.PASS if matched else Status.FAIL
    except RuntimeTrap as trap:
        record.fault = trap.fault
        record.status = Status.ERROR
    logger.debug("%s [%s]: %s", test.name, directive or "no directive", record.describe())
    return record


def run_suite(program: TypedProgram, suite: Sequence[TestCase], instrument: bool = False,
              step_budget: int = DEFAULT_STEP_BUDGET) -> list[ExecutionRecord]:
    """Run every test without directives, one record per test in suite order."""
    return [run_test(program, t, None, instrument, step_budget) for t in suite]
