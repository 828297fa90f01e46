"""The repair pipeline: baseline, localization, synthesis, patching, validation.

:func:`repair` runs the suite once, ranks statements with Ochiai, looks for
angelic conditions (then, depending on the mode, angelic preconditions) and,
pair by pair in rank order, collects rows, synthesizes a condition, applies it
and re-runs the whole suite. The first patch that leaves every test green is
returned; patches are never stacked.
"""

from __future__ import annotations

import copy
import difflib
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

from pydantic import ValidationError

from .angelic import (AngelicPair, PairKind, SearchStats, locate_condition_fixes,
                      locate_precondition_fixes)
from .errors import MinipolError, ParseError, PatchError, RepairError, SuiteError, TypeCheckError
from .interp import ExecutionRecord, TestCase, check_test, run_suite
from .lang import Block, Expr, If, SourceLoc, Stmt, TypedProgram, walk
from .models import PatchLocation, RepairConfig, RepairReport, SuiteFile
from .parser import parse_program, parse_value
from .printer import pretty_print, print_expression
from .smtlib import solve_with_z3, write_smtlib
from .spectrum import Spectrum, rank_conditions, rank_statements, spectrum_of
from .synth import Backend, ConstraintSystem, SynthesisOutcome, solve_internal, synthesize
from .trace import ConstantStrategy, SynthesisInput, collect, format_rows
from .typecheck import check_expression, type_check

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def load_program(path: PathLike) -> TypedProgram:
    """Read, parse and type-check a ``.mini`` file.

    Raises:
        MinipolError: If the file is missing, or a ParseError / TypeCheckError.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MinipolError(f"cannot read program {path}: {exc.strerror}") from exc
    return type_check(parse_program(text, str(path)))


def load_suite(path: PathLike, program: TypedProgram) -> list[TestCase]:
    """Read a JSON suite and convert its literals to values of the parameter types.

    Tests without a ``function`` use the suite's default, or the program's only
    function when there is exactly one.

    Raises:
        SuiteError: Missing file, invalid JSON, unknown function, bad literal
            or signature mismatch.
    """
    path = Path(path)
    try:
        suite_file = SuiteFile.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SuiteError(f"cannot read suite {path}: {exc.strerror}") from exc
    except ValidationError as exc:
        raise SuiteError(f"{path}: invalid suite: {exc.errors()[0]['msg']}") from exc
    functions = program.program.functions
    default = suite_file.function or (functions[0].name if len(functions) == 1 else None)
    tests: list[TestCase] = []
    for record in suite_file.tests:
        name = record.function or default
        if name is None:
            raise SuiteError(f"{path}: test '{record.name}' does not name its function")
        fn = program.function(name)
        if fn is None:
            raise SuiteError(f"{path}: test '{record.name}': no function '{name}'")
        if len(record.inputs) != len(fn.params):
            raise SuiteError(f"{path}: test '{record.name}': '{name}' takes {len(fn.params)} "
                             f"inputs, got {len(record.inputs)}")
        try:
            inputs = tuple(parse_value(text, p.type) for text, p in zip(record.inputs, fn.params))
            expected = parse_value(record.expected, fn.return_type)
        except ParseError as exc:
            raise SuiteError(f"{path}: test '{record.name}': {exc.message}") from exc
        test = TestCase(record.name, name, inputs, expected)
        check_test(program, test)
        tests.append(test)
    if not tests:
        raise SuiteError(f"{path}: the suite has no tests")
    return tests


# ---------------------------------------------------------------------------
# Patches
# ---------------------------------------------------------------------------

class PatchKind(Enum):
    CONDITION_REPLACEMENT = "condition_replacement"
    PRECONDITION_INSERTION = "precondition_insertion"


@dataclass
class Patch:
    """A single edit: replace an if condition, or guard a statement.

    Attributes:
        kind: Replacement or insertion.
        loc: Location of the replaced condition or of the guarded statement.
        node_id: Node id of that condition or statement.
        new_expression: The synthesized condition.
        original: Source text of what is replaced or guarded.
        level_used: Building-block level the expression came from.
        pairs_tried: Angelic pairs examined up to and including this one.
        wall_time: Seconds from the start of the run to validation.
        rendered: Unified diff of the pretty-printed program.
    """

    kind: PatchKind
    loc: SourceLoc
    node_id: int
    new_expression: Expr
    original: str
    level_used: int
    pairs_tried: int = 0
    wall_time: float = 0.0
    rendered: str = ""

    @property
    def expression_text(self) -> str:
        return print_expression(self.new_expression)


def _find(program_ast, node_id: int):
    for node in walk(program_ast):
        if node.node_id == node_id:
            return node
    raise PatchError(f"no node with id {node_id} to patch")


def apply_patch(program: TypedProgram, patch: Patch) -> TypedProgram:
    """Return a new checked program with ``patch`` applied; ``program`` is untouched.

    The edited tree is printed and parsed again, so node ids and lines of the
    result follow the new text.

    Raises:
        PatchError: If the location does not fit the patch kind or the result
            does not type-check.
    """
    ast = copy.deepcopy(program.program)
    expr = copy.deepcopy(patch.new_expression)
    if patch.kind is PatchKind.CONDITION_REPLACEMENT:
        target = next((n for n in walk(ast) if isinstance(n, If) and n.cond.node_id == patch.node_id),
                      None)
        if target is None:
            raise PatchError(f"node {patch.node_id} is not an if condition")
        target.cond = expr
    else:
        stmt = _find(ast, patch.node_id)
        parent = next((n for n in walk(ast) if isinstance(n, Block)
                       and any(s is stmt for s in n.statements)), None)
        if parent is None or not isinstance(stmt, Stmt):
            raise PatchError(f"node {patch.node_id} is not a statement inside a block")
        position = next(i for i, s in enumerate(parent.statements) if s is stmt)
        guard = If(expr, Block([stmt], loc=stmt.loc), None, loc=stmt.loc)
        parent.statements[position] = guard
    text = pretty_print(ast)
    try:
        return type_check(parse_program(text, program.file))
    except (ParseError, TypeCheckError) as exc:
        raise PatchError(f"patched program is invalid: {exc}") from exc


def render_diff(before: TypedProgram, after: TypedProgram) -> str:
    lines = difflib.unified_diff(pretty_print(before.program).splitlines(keepends=True),
                                 pretty_print(after.program).splitlines(keepends=True),
                                 fromfile=f"a/{before.file}", tofile=f"b/{after.file}")
    return "".join(lines)


@dataclass
class Validation:
    records: list[ExecutionRecord]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def statuses(self) -> dict[str, str]:
        return {r.test.name: r.status.value for r in self.records}

    @property
    def failing(self) -> list[str]:
        return [r.test.name for r in self.records if not r.passed]


def validate(program: TypedProgram, suite: Sequence[TestCase],
             step_budget: int = 1_000_000) -> Validation:
    """Run the whole suite on ``program``."""
    return Validation(run_suite(program, suite, step_budget=step_budget))


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

@dataclass
class PairAttempt:
    """What happened to one angelic pair."""

    pair: AngelicPair
    rows: int = 0
    outcome: Optional[SynthesisOutcome] = None
    reason: Optional[str] = None
    accepted: bool = False


@dataclass
class RepairResult:
    """Everything a repair run produced; ``patch`` is None for NO_PATCH."""

    program: TypedProgram
    suite: list[TestCase]
    baseline: list[ExecutionRecord]
    spectrum: Spectrum
    patch: Optional[Patch] = None
    patched: Optional[TypedProgram] = None
    validation: Optional[Validation] = None
    reason: Optional[str] = None
    attempts: list[PairAttempt] = field(default_factory=list)
    candidates_by_phase: dict[str, int] = field(default_factory=dict)
    executions_by_phase: dict[str, int] = field(default_factory=dict)
    traces: list[tuple[AngelicPair, SynthesisInput]] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.patch is not None

    @property
    def diagnostics(self) -> list[str]:
        out = []
        for attempt in self.attempts:
            if attempt.reason:
                out.append(f"line {attempt.pair.loc.line} ({attempt.pair.kind.value}): {attempt.reason}")
        return out


def _backend(config: RepairConfig) -> Backend:
    if config.solver == "z3":
        return solve_with_z3
    return solve_internal


def _original_text(program: TypedProgram, pair: AngelicPair) -> str:
    if pair.kind is PairKind.CONDITION:
        return print_expression(program.enclosing_if(pair.node_id).cond)
    return pretty_print(program.node(pair.node_id)).splitlines()[0]


class _Clock:
    """Accumulates seconds per pipeline phase."""

    def __init__(self):
        self.started = time.monotonic()
        self.phases: dict[str, float] = {}

    def add(self, phase: str, since: float) -> None:
        self.phases[phase] = self.phases.get(phase, 0.0) + time.monotonic() - since

    def elapsed(self) -> float:
        return time.monotonic() - self.started


def repair(program: TypedProgram, suite: Sequence[TestCase],
           config: Optional[RepairConfig] = None) -> RepairResult:
    """Look for a single validated patch that makes the whole suite pass.

    Args:
        program: The checked, faulty program.
        suite: Its tests; at least one must fail.
        config: Pipeline settings; defaults to :class:`RepairConfig()`.

    Returns:
        A result whose ``patch`` is set when a validated patch was found,
        otherwise ``reason`` explains the NO_PATCH outcome.

    Raises:
        RepairError: If every test already passes.
    """
    config = config or RepairConfig()
    suite = list(suite)
    clock = _Clock()
    deadline = clock.started + config.budget_ms / 1000

    since = time.monotonic()
    baseline = run_suite(program, suite, step_budget=config.step_budget)
    clock.add("baseline", since)
    failing = [r.test for r in baseline if not r.passed]
    if not failing:
        raise RepairError("nothing to repair: every test passes")
    if len(failing) == len(suite):
        logger.warning("no test passes; nothing constrains the patch besides the failing tests")
    logger.info("baseline: %d of %d tests fail", len(failing), len(suite))

    result = RepairResult(program, suite, baseline, spectrum_of(program, baseline, suite))
    phases = {"condition": [PairKind.CONDITION], "precondition": [PairKind.PRECONDITION],
              "both": [PairKind.CONDITION, PairKind.PRECONDITION]}[config.mode]
    strategy = ConstantStrategy(config.constants)
    backend = _backend(config)

    for kind in phases:
        since = time.monotonic()
        stats = SearchStats()
        if kind is PairKind.CONDITION:
            ranked = rank_conditions(program, result.spectrum)
            pairs = locate_condition_fixes(program, failing, ranked, config.condition_budget,
                                           stats, config.step_budget)
        else:
            ranked = rank_statements(program, result.spectrum)
            pairs = locate_precondition_fixes(program, failing, ranked, config.precondition_budget,
                                              stats, config.step_budget)
        clock.add("localization", since)
        result.candidates_by_phase[kind.value] = stats.candidates
        result.executions_by_phase[kind.value] = stats.executions
        logger.info("%s phase: %d candidates examined, %d angelic", kind.value,
                    stats.candidates, len(pairs))
        for pair in pairs:
            if time.monotonic() >= deadline:
                result.reason = "global time budget exhausted"
                logger.warning("global time budget exhausted")
                break
            if _try_pair(result, pair, config, backend, strategy, clock, deadline):
                break
        if result.found or result.reason:
            break

    if not result.found and result.reason is None:
        if result.attempts:
            result.reason = result.attempts[0].reason
        else:
            kinds = " or ".join(k.value for k in phases)
            result.reason = f"no angelic {kinds} makes every failing test pass"
    result.timings = dict(clock.phases, total=clock.elapsed())
    if config.dump_trace:
        _dump_traces(result, config.dump_trace)
    return result


def _try_pair(result: RepairResult, pair: AngelicPair, config: RepairConfig, backend: Backend,
              strategy: ConstantStrategy, clock: _Clock, deadline: float) -> bool:
    program, suite = result.program, result.suite
    attempt = PairAttempt(pair)
    result.attempts.append(attempt)

    since = time.monotonic()
    data = collect(program, suite, pair, strategy, config.step_budget)
    clock.add("collection", since)
    attempt.rows = len(data.rows)
    result.traces.append((pair, data))

    on_system = None
    if config.smt_out:
        out_dir, stem = config.smt_out, Path(program.file).stem

        def on_system(system: ConstraintSystem) -> None:
            write_smtlib(system, out_dir, stem, pair.node_id)

    since = time.monotonic()
    budget = min(config.synth_budget_ms / 1000, max(deadline - time.monotonic(), 0.0))
    outcome = synthesize(data, config.max_level, budget, config.trivial_guard, backend, on_system)
    clock.add("synthesis", since)
    attempt.outcome = outcome
    if outcome.expression is None:
        attempt.reason = "; ".join(outcome.diagnostics)
        logger.info("no condition for %s: %s", pair, attempt.reason)
        return False

    scope = {p.name: p.type for p in program.scope_at(pair.node_id)}
    check_expression(outcome.expression, scope)
    kind = (PatchKind.CONDITION_REPLACEMENT if pair.kind is PairKind.CONDITION
            else PatchKind.PRECONDITION_INSERTION)
    patch = Patch(kind, pair.loc, pair.node_id, outcome.expression, _original_text(program, pair),
                  outcome.level if outcome.level is not None else 0, len(result.attempts))

    since = time.monotonic()
    patched = apply_patch(program, patch)
    validation = validate(patched, suite, config.step_budget)
    clock.add("validation", since)
    if not validation.all_pass:
        attempt.reason = (f"validation regression: `{patch.expression_text}` makes "
                          f"{', '.join(validation.failing)} fail")
        logger.info("%s", attempt.reason)
        return False

    attempt.accepted = True
    patch.wall_time = clock.elapsed()
    patch.rendered = render_diff(program, patched)
    result.patch, result.patched, result.validation = patch, patched, validation
    logger.info("patch at line %d: %s", patch.loc.line, patch.expression_text)
    return True


def _dump_traces(result: RepairResult, path: PathLike) -> None:
    sections = [f"# {pair}\n{format_rows(data)}" for pair, data in result.traces]
    Path(path).write_text("\n".join(sections), encoding="utf-8")
    logger.debug("wrote %d trace sections to %s", len(sections), path)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def render_report(result: RepairResult) -> str:
    """Human-readable outcome: the fix sentence and the diff, or the reason."""
    patch = result.patch
    if patch is None:
        return f"No fix found: {result.reason}\n"
    if patch.kind is PatchKind.CONDITION_REPLACEMENT:
        headline = (f"Fix found! At line {patch.loc.line} replace `{patch.original}` "
                    f"by `{patch.expression_text}`")
    else:
        headline = (f"Fix found! At line {patch.loc.line} add the precondition "
                    f"`{patch.expression_text}` to `{patch.original}`")
    return f"{headline}\n\n{patch.rendered}"


def build_report(result: RepairResult, record_timings: bool = True) -> RepairReport:
    """Structured report; without timings it only depends on the inputs."""
    report = RepairReport(
        status="patch" if result.found else "no_patch",
        program=result.program.file,
        reason=result.reason,
        pairs_examined=len(result.attempts),
        candidates_by_phase=dict(result.candidates_by_phase),
        baseline={r.test.name: r.status.value for r in result.baseline},
        diagnostics=result.diagnostics,
        timings={k: round(v, 6) for k, v in result.timings.items()} if record_timings else None,
    )
    patch = result.patch
    if patch is not None:
        report.patch_kind = patch.kind.value
        report.location = PatchLocation(file=patch.loc.file, line=patch.loc.line, col=patch.loc.col)
        report.original = patch.original
        report.expression = patch.expression_text
        report.level = patch.level_used
        report.diff = patch.rendered
        report.validation = result.validation.statuses if result.validation else {}
    return report


def write_report(report: RepairReport, path: PathLike) -> None:
    Path(path).write_text(report.model_dump_json(indent=2, exclude_none=False) + "\n",
                          encoding="utf-8")
