"""Pydantic models for minipol's files and configuration.

A test suite file is a :class:`SuiteFile` holding :class:`TestRecord` entries
whose values are written as mini-lang literals. :class:`RepairConfig` carries
every knob of the repair pipeline, :class:`RepairReport` is what ``repair
--report`` writes, and :class:`CorpusManifest` describes the expected outcome
of a bundled case study.
"""

import os
from pydantic import BaseModel, Field, model_validator
from typing import Dict, List, Optional, Literal


class TestRecord(BaseModel):
    """One test: the entry function, its inputs and the expected result.

    Attributes:
        name: Unique test name.
        function: Entry function; defaults to the suite's ``function``.
        inputs: Argument literals, e.g. ``"true"``, ``"-20"``, ``"[1.0, 2.0]"``.
        expected: Literal of the expected return value.
    """

    __test__ = False  # not a pytest class

    name: str
    function: Optional[str] = None
    inputs: List[str] = Field(default_factory=list)
    expected: str


class SuiteFile(BaseModel):
    """A JSON test suite."""

    function: Optional[str] = None
    tests: List[TestRecord]

    @model_validator(mode="after")
    def _unique_names(self) -> "SuiteFile":
        names = [t.name for t in self.tests]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate test names: {', '.join(duplicates)}")
        return self


class RepairConfig(BaseModel):
    """Settings of one repair run.

    Attributes:
        mode: Which localization phases run; ``both`` tries conditions first.
        solver: ``internal`` search, ``smtlib-export`` (internal search plus a
            script per system in ``smt_out``) or ``z3``.
        max_level: Highest building-block level tried.
        constants: Constant pool strategy.
        budget_ms: Time budget of the whole run.
        synth_budget_ms: Time budget of one synthesis (all levels of one pair).
        condition_budget: Candidate conditions examined; None means all.
        precondition_budget: Candidate statements examined; None means all.
        step_budget: Steps allowed per test execution.
        trivial_guard: Refuse patches learnt from one-sided rows.
        smt_out: Directory receiving ``.smt2`` scripts.
        dump_trace: File receiving the collected rows as tab-separated text.
        record_timings: Include wall-clock timings in reports.
        seed: Value of ``MINIPOL_SEED``; the pipeline is deterministic and ignores it.
    """

    mode: Literal["condition", "precondition", "both"] = "both"
    solver: Literal["internal", "smtlib-export", "z3"] = "internal"
    max_level: int = Field(default=5, ge=0, le=5)
    constants: Literal["default", "mined"] = "default"
    budget_ms: int = Field(default=60_000, gt=0)
    synth_budget_ms: int = Field(default=10_000, gt=0)
    condition_budget: Optional[int] = Field(default=None, ge=1)
    precondition_budget: Optional[int] = Field(default=None, ge=1)
    step_budget: int = Field(default=1_000_000, ge=1)
    trivial_guard: bool = True
    smt_out: Optional[str] = None
    dump_trace: Optional[str] = None
    record_timings: bool = True
    seed: Optional[str] = Field(default_factory=lambda: os.environ.get("MINIPOL_SEED"))

    @model_validator(mode="after")
    def _export_needs_directory(self) -> "RepairConfig":
        if self.solver == "smtlib-export" and not self.smt_out:
            raise ValueError("solver 'smtlib-export' needs an output directory (smt_out)")
        return self


class PatchLocation(BaseModel):
    file: str
    line: int = Field(ge=1)
    col: int = Field(ge=1)


class RepairReport(BaseModel):
    """Structured outcome of ``minipol repair``.

    Every field is deterministic except ``timings``, which is left out when
    timings are not recorded.
    """

    status: Literal["patch", "no_patch"]
    program: str
    reason: Optional[str] = None
    patch_kind: Optional[Literal["condition_replacement", "precondition_insertion"]] = None
    location: Optional[PatchLocation] = None
    original: Optional[str] = None
    expression: Optional[str] = None
    level: Optional[int] = None
    pairs_examined: int = 0
    candidates_by_phase: Dict[str, int] = Field(default_factory=dict)
    baseline: Dict[str, str] = Field(default_factory=dict)
    validation: Dict[str, str] = Field(default_factory=dict)
    diagnostics: List[str] = Field(default_factory=list)
    diff: Optional[str] = None
    timings: Optional[Dict[str, float]] = None


class ExpectedOutcome(BaseModel):
    """What repairing a bundled case study must produce.

    Attributes:
        status: Whether a patch is expected.
        kind: Expected patch kind.
        line: Source line of the repaired condition or guarded statement.
        reference: Expression the patch must agree with on every collected row.
        baseline: Expected status of every test before repair.
        expression: Exact rendering, when the case pins one.
    """

    status: Literal["patch", "no_patch"]
    kind: Optional[Literal["condition_replacement", "precondition_insertion"]] = None
    line: Optional[int] = Field(default=None, ge=1)
    reference: Optional[str] = None
    baseline: Dict[str, Literal["pass", "fail", "runtime_error"]] = Field(default_factory=dict)
    expression: Optional[str] = None


class CorpusManifest(BaseModel):
    """``case.json`` of a bundled case study."""

    name: str
    description: str = ""
    program: str
    suite: str
    config: RepairConfig = Field(default_factory=RepairConfig)
    expected: ExpectedOutcome
