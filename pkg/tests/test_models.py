"""Tests for minipol.models: Pydantic data models."""

import pytest
from pydantic import ValidationError
from minipol.models import (
    CorpusManifest, ExpectedOutcome, PatchLocation, RepairConfig, RepairReport, SuiteFile,
    TestRecord,
)


class TestTestRecord:
    def test_minimal_creation(self):
        r = TestRecord(name="t1", expected="0")
        assert r.function is None
        assert r.inputs == []

    def test_full_creation(self):
        r = TestRecord(name="t2", function="f", inputs=["true", "-20", "[1.0, 2.0]"], expected="1")
        assert r.inputs[2] == "[1.0, 2.0]"

    def test_expected_required(self):
        with pytest.raises(ValidationError):
            TestRecord(name="t1")


class TestSuiteFile:
    def test_from_json(self):
        s = SuiteFile.model_validate_json(
            '{"function": "f", "tests": [{"name": "a", "inputs": ["1"], "expected": "2"}]}')
        assert s.function == "f"
        assert s.tests[0].name == "a"

    def test_duplicate_names(self):
        with pytest.raises(ValidationError, match="duplicate test names: a"):
            SuiteFile(tests=[TestRecord(name="a", expected="0"), TestRecord(name="a", expected="1")])


class TestRepairConfig:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("MINIPOL_SEED", raising=False)
        c = RepairConfig()
        assert c.mode == "both"
        assert c.solver == "internal"
        assert c.max_level == 5
        assert c.constants == "default"
        assert c.budget_ms == 60_000
        assert c.synth_budget_ms == 10_000
        assert c.condition_budget is None
        assert c.step_budget == 1_000_000
        assert c.trivial_guard is True
        assert c.record_timings is True
        assert c.seed is None

    def test_seed_from_environment(self, monkeypatch):
        monkeypatch.setenv("MINIPOL_SEED", "42")
        assert RepairConfig().seed == "42"

    @pytest.mark.parametrize("field,value", [
        ("max_level", 6), ("max_level", -1), ("budget_ms", 0), ("synth_budget_ms", -5),
        ("condition_budget", 0), ("step_budget", 0), ("mode", "everything"), ("solver", "cvc5"),
    ])
    def test_rejects(self, field, value):
        with pytest.raises(ValidationError):
            RepairConfig(**{field: value})

    def test_export_needs_directory(self):
        with pytest.raises(ValidationError, match="smt_out"):
            RepairConfig(solver="smtlib-export")
        assert RepairConfig(solver="smtlib-export", smt_out="out").smt_out == "out"


class TestRepairReport:
    def test_no_patch(self):
        r = RepairReport(status="no_patch", program="p.mini", reason="nothing")
        assert r.location is None
        assert r.timings is None
        assert r.diagnostics == []

    def test_location_lines_start_at_one(self):
        with pytest.raises(ValidationError):
            PatchLocation(file="p.mini", line=0, col=1)

    def test_bad_status(self):
        with pytest.raises(ValidationError):
            RepairReport(status="maybe", program="p.mini")


class TestCorpusManifest:
    def test_nested_config(self):
        m = CorpusManifest.model_validate({
            "name": "c", "program": "c.mini", "suite": "tests.json",
            "config": {"mode": "condition", "record_timings": False},
            "expected": {"status": "patch", "line": 3, "baseline": {"t1": "fail"}},
        })
        assert m.config.mode == "condition"
        assert m.config.max_level == 5
        assert m.expected.baseline == {"t1": "fail"}

    def test_baseline_status_values(self):
        with pytest.raises(ValidationError):
            ExpectedOutcome(status="patch", baseline={"t1": "crashed"})
