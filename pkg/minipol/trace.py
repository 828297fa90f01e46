"""Collection of synthesis rows at a repair site.

For an angelic pair the whole suite runs instrumented. Every dynamic hit of
the location in every test gives one row: the values in scope there (arrays
contribute their length) and the boolean the patch must produce.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .angelic import AngelicPair, PairKind
from .interp import DEFAULT_STEP_BUDGET, Snapshot, TestCase, run_test
from .lang import Literal, Type, TypedProgram, Unary, Value, walk

logger = logging.getLogger(__name__)

# Pure functions over arrays whose results are collected like variables.
OBSERVERS = ("len",)

_DEFAULT_INTS = (0, -1, 1)
_DEFAULT_REALS = (0.0, -1.0, 1.0)


class ConstantStrategy(Enum):
    DEFAULT = "default"
    MINED = "mined"


@dataclass(frozen=True)
class Column:
    """One collected value: a variable, or ``len(a)`` for an array ``a``."""

    name: str
    type: Type
    source: str = ""
    source_type: Optional[Type] = None

    @property
    def is_observer(self) -> bool:
        return self.source != ""


@dataclass(frozen=True)
class Constant:
    value: Value
    origin: str  # "default" or "mined"


@dataclass(frozen=True)
class TraceRow:
    test_name: str
    m: int
    inputs: tuple[Value, ...]
    expected: bool
    failing: bool = False


@dataclass
class SynthesisInput:
    """Everything synthesis needs for one repair site.

    Attributes:
        schema: Collected columns, identical for every row.
        rows: One row per dynamic hit of the location.
        constants: Extra inputs appended after the schema.
        target_kind: Whether a condition is replaced or a guard inserted.
        warnings: Recoverable oddities found while collecting.
    """

    schema: list[Column]
    rows: list[TraceRow]
    constants: list[Constant] = field(default_factory=list)
    target_kind: PairKind = PairKind.CONDITION
    warnings: list[str] = field(default_factory=list)

    @property
    def failing_rows(self) -> list[TraceRow]:
        return [r for r in self.rows if r.failing]


def schema_at(program: TypedProgram, node_id: int) -> list[Column]:
    """Columns collected at a location: primitives and array observers, in declaration order."""
    columns: list[Column] = []
    for param in program.scope_at(node_id):
        if param.type.is_primitive:
            columns.append(Column(param.name, param.type))
        else:
            columns.extend(Column(f"{obs}({param.name})", Type.INT, param.name, param.type)
                           for obs in OBSERVERS)
    return columns


def observe(snapshot: Snapshot, schema: Sequence[Column]) -> tuple[Value, ...]:
    env = dict(snapshot)
    values: list[Value] = []
    for column in schema:
        if column.is_observer:
            values.append(Value.integer(len(env[column.source].data)))  # type: ignore[arg-type]
        else:
            values.append(env[column.name])
    return tuple(values)


def row_env(schema: Sequence[Column], row: TraceRow) -> dict[str, Value]:
    """Environment reproducing a row: arrays are rebuilt with the observed length."""
    env: dict[str, Value] = {}
    for column, value in zip(schema, row.inputs):
        if column.is_observer:
            assert column.source_type is not None
            zero = 0 if column.source_type is Type.ARRAY_INT else 0.0
            env[column.source] = Value(column.source_type, (zero,) * value.data)  # type: ignore[operator]
        else:
            env[column.name] = value
    return env


def _mined_literals(program: TypedProgram) -> list[Value]:
    found: list[Value] = []
    negated: set[int] = set()
    for node in walk(program.program):
        if isinstance(node, Unary) and node.op == "-" and isinstance(node.operand, Literal):
            negated.add(node.operand.node_id)
        if isinstance(node, Literal) and node.value.type.is_numeric:
            value = node.value
            if node.node_id in negated:
                value = Value(value.type, -value.data)  # type: ignore[operator]
            found.append(value)
    return found


def gather_constants(program: TypedProgram, strategy: ConstantStrategy = ConstantStrategy.DEFAULT,
                     schema: Optional[Sequence[Column]] = None) -> list[Constant]:
    """Constant inputs offered to synthesis.

    The default set is ``0, -1, 1`` as int, plus ``0.0, -1.0, 1.0`` when a real
    variable is collected. The mined strategy appends every scalar numeric
    literal of the program, deduplicated, in source order. Constants whose
    type is not collected at the location are left out; without a schema
    every variable of the program counts.
    """
    if schema is not None:
        types = {c.type for c in schema}
    else:
        types = {Type.INT} | {p.type for scope in program.scopes.values() for p in scope}
    constants = [Constant(Value.integer(i), "default") for i in _DEFAULT_INTS]
    if Type.REAL in types:
        constants += [Constant(Value.real(x), "default") for x in _DEFAULT_REALS]
    if strategy is ConstantStrategy.MINED:
        seen = {c.value for c in constants}
        for value in _mined_literals(program):
            if value not in seen and value.type in types:
                seen.add(value)
                constants.append(Constant(value, "mined"))
    if schema is not None:
        constants = [c for c in constants if c.value.type in types]
    return constants


def collect(program: TypedProgram, suite: Sequence[TestCase], pair: AngelicPair,
            constants: ConstantStrategy = ConstantStrategy.DEFAULT,
            step_budget: int = DEFAULT_STEP_BUDGET) -> SynthesisInput:
    """Run the suite instrumented and build the rows for ``pair``.

    Passing tests run unmodified: at a condition each row expects the value the
    condition actually took, at a precondition every row expects ``true``.
    Failing tests run under the pair's directive and expect the angelic value.
    """
    schema = schema_at(program, pair.node_id)
    result = SynthesisInput(schema, [], gather_constants(program, constants, schema), pair.kind)
    passing_hits = 0
    for test in suite:
        failing = test.name in pair.values
        directive = pair.directive(test.name) if failing else None
        record = run_test(program, test, directive, instrument=True, step_budget=step_budget)
        if pair.kind is PairKind.CONDITION:
            hits = [(e.m, e.snapshot, e.outcome) for e in record.condition_evals
                    if e.node_id == pair.node_id]
        else:
            hits = [(h.m, h.snapshot, not failing) for h in record.statement_hits
                    if h.node_id == pair.node_id]
        for m, snapshot, expected in hits:
            result.rows.append(TraceRow(test.name, m, observe(snapshot, schema), expected, failing))
        if not failing:
            passing_hits += len(hits)
    if passing_hits == 0:
        warning = f"no passing test executes line {pair.loc.line}; a patch there may be trivial"
        logger.warning("%s", warning)
        result.warnings.append(warning)
    logger.debug("collected %d rows over %d columns at line %d",
                 len(result.rows), len(schema), pair.loc.line)
    return result


def contradiction(rows: Sequence[TraceRow]) -> Optional[str]:
    """Describe two rows with equal inputs but different expectations, if any."""
    seen: dict[tuple, TraceRow] = {}
    for row in rows:
        key = tuple((v.type, v.data) for v in row.inputs)
        other = seen.setdefault(key, row)
        if other.expected != row.expected:
            return (f"rows {other.test_name}#{other.m} and {row.test_name}#{row.m} see the same "
                    f"values but expect {str(other.expected).lower()} and {str(row.expected).lower()}")
    return None


def coverage_gap(data: SynthesisInput) -> Optional[str]:
    """Diagnostic when the rows do not cover both boolean outcomes.

    A patch learnt from one-sided rows is a constant that only passes because
    the suite never exercises the other branch.
    """
    outcomes = {r.expected for r in data.rows}
    if outcomes == {True, False}:
        return None
    if data.target_kind is PairKind.PRECONDITION:
        branch = "guarded statement running" if False in outcomes else "guarded statement being skipped"
    else:
        branch = "else branch" if True in outcomes else "then branch"
    return (f"both boolean values of the {data.target_kind.value} must be covered by the suite; "
            f"no execution exercises the {branch}")


def format_rows(data: SynthesisInput) -> str:
    """Rows as tab-separated text, one column per collected value."""
    header = ["test", "m", *(c.name for c in data.schema), "expected"]
    lines = ["\t".join(header)]
    for row in data.rows:
        cells = [row.test_name, str(row.m), *(v.render() for v in row.inputs),
                 str(row.expected).lower()]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
