"""Tests for minipol.smtlib: SMT-LIB export, reading back and the z3 backend."""

import sys

import pytest

from minipol.angelic import AngelicPair, PairKind
from minipol.errors import SmtLibError, SolverUnavailable
from minipol.lang import Type, Value
from minipol.smtlib import (
    emit_smtlib, evaluate_script, read_model, read_script, solve_with_z3, write_smtlib,
)
from minipol.synth import (
    BuildingBlock, Model, SolveStatus, build_components, decode, encode, satisfies_rows,
    solve_internal,
)
from minipol.trace import Column, Constant, SynthesisInput, TraceRow, collect

SMALL_MODEL = {"l_in_1": 1, "l_in_2": 2, "l_in_3": 3, "l_out_f1": 4, "l_arg_f1_1": 2,
               "l_out_f2": 5, "l_arg_f2_1": 1, "l_arg_f2_2": 1, "l_r": 5}


def _site(case, line, values):
    cond = next(s.cond for s in case.program.if_statements() if s.loc.line == line)
    pair = AngelicPair(cond.node_id, cond.loc, PairKind.CONDITION, values)
    return cond.node_id, collect(case.program, case.suite, pair)


def _corpus_sites(tcas, percentile, guard):
    yield _site(tcas, 7, {"t2": True, "t4": True})[1]
    yield _site(percentile, 12, {"upper_quartile_of_three": True})[1]
    stmt = next(s for s in guard.program.statements() if s.loc.line == 6)
    pair = AngelicPair(stmt.node_id, stmt.loc, PairKind.PRECONDITION, {"local_file": False})
    yield collect(guard.program, guard.suite, pair)


def _small_system():
    data = SynthesisInput(
        [Column("x", Type.INT)],
        [TraceRow("t", 1, (Value.integer(2),), False)],
        [Constant(Value.boolean(False), "default"), Constant(Value.integer(3), "default")],
    )
    blocks = [BuildingBlock(1, "!", (Type.BOOL,), Type.BOOL),
              BuildingBlock(2, "<", (Type.INT, Type.INT), Type.BOOL)]
    return encode(data, blocks)


class TestEmit:
    def test_structure(self):
        system = _small_system()
        text = emit_smtlib(system, "example")
        lines = text.splitlines()
        assert lines[0] == "; example"
        assert "(set-logic QF_LIRA)" in lines
        assert "(declare-fun l_r () Int)" in lines
        assert "(declare-fun v1_r () Bool)" in lines
        assert "; phi_FIXED" in lines and "; phi_FUNC" in lines
        assert "(assert (= l_in_1 1))" in lines
        assert "(assert (not (= l_out_f1 l_out_f2)))" in lines
        assert lines[-2] == "(check-sat)"
        assert lines[-1] == f"(get-value ({' '.join(system.location_vars)}))"
        assert all(line.startswith(("(", ";")) for line in lines)

    def test_multiplication_is_nonlinear(self):
        system = encode(_small_system().data, build_components(4, [Column("x", Type.INT)]), 4)
        assert "(set-logic QF_NIRA)" in emit_smtlib(system)

    def test_write(self, tcas, tmp_path):
        node_id, data = _site(tcas, 7, {"t2": True, "t4": True})
        system = encode(data, build_components(1, data.schema), 1)
        path = write_smtlib(system, tmp_path / "smt", "tcas", node_id)
        assert path.name == f"tcas_{node_id}_L1.smt2"
        assert path.read_text(encoding="utf-8") == emit_smtlib(system, f"tcas, node {node_id}, level 1")


class TestFullScriptParses:
    @pytest.mark.parametrize("level", [0, 1, 2])
    def test_corpus_systems(self, tcas, percentile, guard, level):
        for data in _corpus_sites(tcas, percentile, guard):
            system = encode(data, build_components(level, data.schema), level)
            script = read_script(emit_smtlib(system, f"level {level}"))
            assert script.logic == "QF_LIRA"
            assert script.commands[0] == "set-logic"
            assert script.commands[-2:] == ["check-sat", "get-value"]
            assert set(script.declarations) == set(system.symbols)
            assert script.declarations["l_r"] == "Int"
            assert len(script.assertions) == len(system.assertions())

    def test_internal_models_satisfy_parsed_scripts(self, tcas, percentile, guard):
        for data in _corpus_sites(tcas, percentile, guard):
            system = encode(data, build_components(1, data.schema), 1)
            result = solve_internal(system)
            assert result.model is not None
            script = read_script(emit_smtlib(system))
            assert evaluate_script(script, system.valuation(result.model))


class TestEvaluate:
    def test_model_satisfies_script(self):
        system = _small_system()
        assert evaluate_script(read_script(emit_smtlib(system)), system.valuation(Model(SMALL_MODEL)))

    def test_wrong_result_violates_script(self):
        system = _small_system()
        model = Model({**SMALL_MODEL, "l_out_f1": 5, "l_arg_f1_1": 4, "l_out_f2": 4})
        assert not evaluate_script(read_script(emit_smtlib(system)), system.valuation(model))

    def test_wrong_value_violates_script(self):
        system = _small_system()
        values = system.valuation(Model(SMALL_MODEL))
        values["v1_in_3"] = 4
        assert not evaluate_script(read_script(emit_smtlib(system)), values)

    def test_missing_symbol(self):
        script = read_script("(declare-fun a () Int)\n(assert (= a 1))\n")
        with pytest.raises(SmtLibError, match="no value for 'a'"):
            evaluate_script(script, {})

    def test_reals(self):
        script = read_script("(declare-fun r () Real)\n(assert (< r 0.5))\n")
        assert evaluate_script(script, {"r": 0.25})
        assert not evaluate_script(script, {"r": 0.5})


class TestReadScript:
    @pytest.mark.parametrize("text", [
        "(assert (= a 1))",
        "(frobnicate 1)",
    ])
    def test_errors(self, text):
        with pytest.raises(SmtLibError, match="cannot parse script"):
            read_script(text)

    def test_comments_ignored(self):
        script = read_script("; header\n(set-logic QF_LIA) ; trailing\n(check-sat)\n")
        assert script.logic == "QF_LIA"
        assert script.assertions == []
        assert script.commands == ["set-logic", "check-sat"]


class TestReadModel:
    def test_get_value_answer(self):
        model = read_model("sat\n((l_in_1 1)\n (l_out_f1 2)\n (l_r (- 3)))\n", _small_system())
        assert model.assignment == {"l_in_1": 1, "l_out_f1": 2, "l_r": -3}

    def test_model_listing(self):
        text = ("(model\n  (define-fun l_r () Int 5)\n  (define-fun v1_r () Bool false)\n"
                "  (define-fun l_arg_f1_1 () Int 2))\n")
        assert read_model(text, _small_system()).assignment == {"l_r": 5, "l_arg_f1_1": 2}

    def test_z3_listing(self):
        text = "sat\n(\n  (define-fun l_out_f2 () Int\n    5)\n  (define-fun l_r () Int\n    5)\n)\n"
        assert read_model(text, _small_system()).assignment == {"l_out_f2": 5, "l_r": 5}

    def test_bare_definition(self):
        assert read_model("(define-fun l_r () Int 4)", _small_system()).assignment == {"l_r": 4}

    def test_single_pair(self):
        assert read_model("((l_r 4))", _small_system()).assignment == {"l_r": 4}

    def test_unsat(self):
        with pytest.raises(SmtLibError, match="unsat"):
            read_model("unsat\n", _small_system())

    def test_no_locations(self):
        with pytest.raises(SmtLibError, match="no location assignment"):
            read_model("(model (define-fun v1_r () Bool true))", _small_system())

    def test_unknown_symbol(self):
        with pytest.raises(SmtLibError, match="cannot read solver output"):
            read_model("sat\n((nowhere 1))\n", _small_system())

    def test_internal_model_round_trip(self, tcas):
        _, data = _site(tcas, 7, {"t2": True, "t4": True})
        system = encode(data, build_components(1, data.schema), 1)
        result = solve_internal(system)
        assert result.model is not None
        listing = " ".join(f"({name} {value})" for name, value in result.model.assignment.items())
        assert read_model(f"sat\n({listing})\n", system) == result.model


class TestZ3:
    def test_unavailable(self, monkeypatch):
        monkeypatch.setitem(sys.modules, "z3", None)
        with pytest.raises(SolverUnavailable):
            solve_with_z3(_small_system())

    def test_tcas(self, tcas):
        pytest.importorskip("z3")
        _, data = _site(tcas, 7, {"t2": True, "t4": True})
        assert solve_with_z3(encode(data, [], 0)).status is SolveStatus.UNSAT
        system = encode(data, build_components(1, data.schema), 1)
        result = solve_with_z3(system)
        assert result.status is SolveStatus.SAT and result.model is not None
        assert satisfies_rows(decode(result.model, system), data)
