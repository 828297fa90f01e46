"""Angelic fix localization.

Looks for repair sites by running only the failing tests under a directive:
an if condition forced to ``true`` or ``false`` for the whole execution, or a
statement skipped at every occurrence. A location is kept when every failing
test passes under it; the boolean that made each test pass is its angelic
value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .interp import DEFAULT_STEP_BUDGET, Directive, TestCase, run_test
from .lang import SourceLoc, TypedProgram

logger = logging.getLogger(__name__)


class PairKind(Enum):
    CONDITION = "condition"
    PRECONDITION = "precondition"


@dataclass(frozen=True)
class AngelicPair:
    """A repair site and the angelic value of each failing test there.

    For preconditions every value is ``false``: the missing guard must not let
    the statement run in a failing test.
    """

    node_id: int
    loc: SourceLoc
    kind: PairKind
    values: dict[str, bool] = field(hash=False)
    suspiciousness: float = 0.0

    def directive(self, test_name: str) -> Directive:
        """Directive under which failing test ``test_name`` passes."""
        if self.kind is PairKind.PRECONDITION:
            return Directive.skip(self.node_id)
        return Directive.force(self.node_id, self.values[test_name])

    def __str__(self) -> str:
        values = ", ".join(f"{k}={str(v).lower()}" for k, v in self.values.items())
        return f"{self.kind.value} at line {self.loc.line} ({values})"


@dataclass
class SearchStats:
    """Counters filled in by the locators."""

    executions: int = 0
    candidates: int = 0


def _take(ranked: Sequence[tuple[int, float]], budget: Optional[int]) -> Sequence[tuple[int, float]]:
    return ranked if budget is None else ranked[:budget]


def locate_condition_fixes(program: TypedProgram, failing: Sequence[TestCase],
                           ranked_conditions: Sequence[tuple[int, float]],
                           budget: Optional[int] = None, stats: Optional[SearchStats] = None,
                           step_budget: int = DEFAULT_STEP_BUDGET) -> list[AngelicPair]:
    """Find if conditions with an angelic value for every failing test.

    Each candidate is tried per failing test by forcing it to ``true`` and, if
    that does not make the test pass, to ``false``. A candidate is dropped at
    its first failing test that no forced value rescues.

    Args:
        program: The checked program.
        failing: The failing tests (only these are executed).
        ranked_conditions: ``(condition node_id, suspiciousness)`` in rank order.
        budget: Number of candidates to examine; ``None`` means all.
        stats: Optional counters for executions and examined candidates.
        step_budget: Per-execution step budget.

    Returns:
        Angelic pairs in rank order.
    """
    stats = stats if stats is not None else SearchStats()
    pairs: list[AngelicPair] = []
    for node_id, susp in _take(ranked_conditions, budget):
        stats.candidates += 1
        values: dict[str, bool] = {}
        for test in failing:
            for forced in (True, False):
                stats.executions += 1
                record = run_test(program, test, Directive.force(node_id, forced),
                                  instrument=False, step_budget=step_budget)
                if record.passed:
                    values[test.name] = forced
                    break
            if test.name not in values:
                break
        node = program.node(node_id)
        if len(values) == len(failing) and failing:
            pair = AngelicPair(node_id, node.loc, PairKind.CONDITION, values, susp)
            logger.info("angelic %s", pair)
            pairs.append(pair)
        else:
            logger.debug("condition at line %d is not angelic", node.loc.line)
    return pairs


def locate_precondition_fixes(program: TypedProgram, failing: Sequence[TestCase],
                              ranked_statements: Sequence[tuple[int, float]],
                              budget: Optional[int] = None, stats: Optional[SearchStats] = None,
                              step_budget: int = DEFAULT_STEP_BUDGET) -> list[AngelicPair]:
    """Find skippable statements whose skipping makes every failing test pass."""
    stats = stats if stats is not None else SearchStats()
    pairs: list[AngelicPair] = []
    for node_id, susp in _take(ranked_statements, budget):
        stats.candidates += 1
        ok = bool(failing)
        for test in failing:
            stats.executions += 1
            if not run_test(program, test, Directive.skip(node_id), instrument=False,
                            step_budget=step_budget).passed:
                ok = False
                break
        node = program.node(node_id)
        if ok:
            pair = AngelicPair(node_id, node.loc, PairKind.PRECONDITION,
                               {t.name: False for t in failing}, susp)
            logger.info("angelic %s", pair)
            pairs.append(pair)
        else:
            logger.debug("skipping the statement at line %d does not help", node.loc.line)
    return pairs
