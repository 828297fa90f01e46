"""Tests for minipol.trace: row collection, constants and row diagnostics."""

from minipol.angelic import AngelicPair, PairKind
from minipol.interp import run_suite
from minipol.lang import Type, Value
from minipol.trace import (
    Column, ConstantStrategy, SynthesisInput, TraceRow, collect, contradiction, coverage_gap,
    format_rows, gather_constants, row_env, schema_at,
)
from tests.conftest import checked, int_test


def _condition_pair(case, line, values):
    cond = next(s.cond for s in case.program.if_statements() if s.loc.line == line)
    return AngelicPair(cond.node_id, cond.loc, PairKind.CONDITION, values)


def _guard_pair(guard):
    stmt = next(s for s in guard.program.statements() if s.loc.line == 6)
    return AngelicPair(stmt.node_id, stmt.loc, PairKind.PRECONDITION, {"local_file": False})


class TestSchema:
    def test_tcas(self, tcas):
        pair = _condition_pair(tcas, 7, {"t2": True, "t4": True})
        schema = schema_at(tcas.program, pair.node_id)
        assert [c.name for c in schema] == ["inhibit", "up_sep", "down_sep", "bias"]
        assert [c.type for c in schema] == [Type.BOOL, Type.INT, Type.INT, Type.INT]

    def test_arrays_become_observers(self, percentile):
        pair = _condition_pair(percentile, 12, {"upper_quartile_of_three": True})
        schema = schema_at(percentile.program, pair.node_id)
        assert [c.name for c in schema] == [
            "len(values)", "p", "n", "pos", "fpos", "int_pos", "dif", "len(sorted)"]
        observer = schema[0]
        assert observer.is_observer and observer.source == "values"
        assert observer.type is Type.INT and observer.source_type is Type.ARRAY_REAL


class TestCollect:
    def test_tcas_rows(self, tcas):
        pair = _condition_pair(tcas, 7, {"t2": True, "t4": True})
        data = collect(tcas.program, tcas.suite, pair)
        assert [r.test_name for r in data.rows] == ["t1", "t2", "t3", "t4", "t5"]
        assert [r.expected for r in data.rows] == [False, True, True, True, False]
        assert [r.failing for r in data.rows] == [False, True, False, True, False]
        assert data.rows[1].inputs == (
            Value.boolean(True), Value.integer(11), Value.integer(110), Value.integer(110))
        assert all(r.m == 1 for r in data.rows)
        assert data.warnings == []

    def test_percentile_rows(self, percentile):
        pair = _condition_pair(percentile, 12, {"upper_quartile_of_three": True})
        data = collect(percentile.program, percentile.suite, pair)
        assert "quarter_of_two" not in {r.test_name for r in data.rows}
        by_name = {r.test_name: r.expected for r in data.rows}
        assert by_name == {
            "upper_quartile_of_three": True,
            "single_value": True,
            "median_of_five": False,
            "interpolated": False,
            "past_the_end": True,
        }

    def test_precondition_rows(self, guard):
        data = collect(guard.program, guard.suite, _guard_pair(guard))
        assert data.target_kind is PairKind.PRECONDITION
        assert [r.expected for r in data.rows] == [True, True, True, False]
        assert [tuple(v.data for v in r.inputs) for r in data.rows] == [
            (3, 3, 2), (2, 5, 1), (4, 2, 3), (1, 42, 0)]
        assert [r.test_name for r in data.failing_rows] == ["local_file"]

    def test_no_passing_hit_warns(self, one_sided):
        program, suite = one_sided
        inner = next(s.cond for s in program.if_statements() if s.loc.line == 3)
        pair = AngelicPair(inner.node_id, inner.loc, PairKind.CONDITION, {"fifty": True})
        data = collect(program, suite, pair)
        assert len(data.rows) == 1
        assert data.warnings and "no passing test executes line 3" in data.warnings[0]

    def test_loop_rows_per_hit(self):
        program = checked(
            "fn f(n: int) -> int {\n"
            "    let i: int = 0;\n"
            "    while (i < n) {\n"
            "        if (i > 1) { return i; }\n"
            "        i = i + 1;\n"
            "    }\n"
            "    return 0;\n"
            "}\n")
        suite = [int_test("three", "f", 3, expected=2), int_test("one", "f", 1, expected=5)]
        assert [r.passed for r in run_suite(program, suite)] == [True, False]
        cond = program.if_statements()[0].cond
        pair = AngelicPair(cond.node_id, cond.loc, PairKind.CONDITION, {"one": True})
        data = collect(program, suite, pair)
        assert [(r.test_name, r.m, r.expected) for r in data.rows] == [
            ("three", 1, False), ("three", 2, False), ("three", 3, True), ("one", 1, True)]


class TestConstants:
    def test_default_ints(self, tcas):
        pair = _condition_pair(tcas, 7, {"t2": True, "t4": True})
        constants = gather_constants(tcas.program, ConstantStrategy.DEFAULT,
                                     schema_at(tcas.program, pair.node_id))
        assert [c.value for c in constants] == [Value.integer(0), Value.integer(-1), Value.integer(1)]

    def test_reals_when_real_collected(self, percentile):
        pair = _condition_pair(percentile, 12, {"upper_quartile_of_three": True})
        constants = gather_constants(percentile.program, ConstantStrategy.DEFAULT,
                                     schema_at(percentile.program, pair.node_id))
        assert [c.value.render() for c in constants] == ["0", "-1", "1", "0.0", "-1.0", "1.0"]

    def test_mined_appends_program_literals(self, percentile):
        pair = _condition_pair(percentile, 12, {"upper_quartile_of_three": True})
        constants = gather_constants(percentile.program, ConstantStrategy.MINED,
                                     schema_at(percentile.program, pair.node_id))
        mined = [c for c in constants if c.origin == "mined"]
        assert [c.value for c in mined] == [Value.real(100.0)]

    def test_mined_negative_literal(self):
        program = checked("fn f(x: int) -> int { if (x > -7) { return 1; } return 0; }")
        values = [c.value for c in gather_constants(program, ConstantStrategy.MINED)]
        assert Value.integer(-7) in values


class TestRowDiagnostics:
    def _data(self, expectations, kind=PairKind.CONDITION):
        schema = [Column("x", Type.INT)]
        rows = [TraceRow(f"t{i}", 1, (Value.integer(x),), e) for i, (x, e) in enumerate(expectations)]
        return SynthesisInput(schema, rows, target_kind=kind)

    def test_contradiction(self):
        data = self._data([(1, True), (2, False), (1, False)])
        message = contradiction(data.rows)
        assert message is not None and "t0#1" in message and "t2#1" in message

    def test_no_contradiction(self):
        assert contradiction(self._data([(1, True), (2, False)]).rows) is None

    def test_coverage_gap(self):
        gap = coverage_gap(self._data([(1, True), (2, True)]))
        assert gap is not None
        assert gap.startswith("both boolean values of the condition must be covered")
        assert "else branch" in gap
        assert coverage_gap(self._data([(1, True), (2, False)])) is None

    def test_coverage_gap_precondition(self):
        gap = coverage_gap(self._data([(1, False)], PairKind.PRECONDITION))
        assert gap is not None and "guarded statement running" in gap

    def test_row_env_rebuilds_arrays(self):
        schema = [Column("len(a)", Type.INT, "a", Type.ARRAY_INT), Column("k", Type.INT)]
        row = TraceRow("t", 1, (Value.integer(3), Value.integer(9)), True)
        env = row_env(schema, row)
        assert env["a"] == Value.array(Type.INT, [0, 0, 0])
        assert env["k"] == Value.integer(9)

    def test_format_rows(self, tcas):
        pair = _condition_pair(tcas, 7, {"t2": True, "t4": True})
        text = format_rows(collect(tcas.program, tcas.suite, pair))
        lines = text.splitlines()
        assert lines[0] == "test\tm\tinhibit\tup_sep\tdown_sep\tbias\texpected"
        assert lines[2] == "t2\t1\ttrue\t11\t110\t110\ttrue"
