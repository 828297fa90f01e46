"""Coverage spectrum and Ochiai ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import LocalizationError
from .interp import ExecutionRecord, TestCase
from .lang import If, SourceLoc, TypedProgram, is_skippable

Ranking = list[tuple[int, float]]


@dataclass
class Spectrum:
    """Per-statement counts of covering failing and passing tests.

    Attributes:
        failed: node_id -> number of failing tests covering it.
        passed: node_id -> number of passing tests covering it.
        total_failed: Failing tests in the suite (runtime errors included).
        locations: node_id -> source location, for tie-breaking.
    """

    failed: dict[int, int] = field(default_factory=dict)
    passed: dict[int, int] = field(default_factory=dict)
    total_failed: int = 0
    total_passed: int = 0
    locations: dict[int, SourceLoc] = field(default_factory=dict)

    @property
    def node_ids(self) -> list[int]:
        return sorted(set(self.failed) | set(self.passed))

    def suspiciousness(self, node_id: int) -> float:
        return ochiai(self.failed.get(node_id, 0), self.passed.get(node_id, 0), self.total_failed)

    def sort_key(self, node_id: int) -> tuple[int, int, int]:
        loc = self.locations.get(node_id)
        if loc is None:
            return (0, 0, node_id)
        return (loc.line, loc.col, node_id)


def ochiai(failed: int, passed: int, total_failed: int) -> float:
    """``failed / sqrt(total_failed * (failed + passed))``, 0 when never covered."""
    if failed == 0:
        return 0.0
    return failed / math.sqrt(total_failed * (failed + passed))


def build_spectrum(records: Sequence[ExecutionRecord], suite: Sequence[TestCase],
                   locations: Optional[Mapping[int, SourceLoc]] = None) -> Spectrum:
    """Count, per statement, the passing and failing tests that cover it.

    Args:
        records: One execution record per test, in suite order.
        suite: The executed tests.
        locations: Statement universe with locations; statements never covered
            still appear (with zero counts) when listed here.

    Raises:
        LocalizationError: If records and suite differ in length.
    """
    if len(records) != len(suite):
        raise LocalizationError(f"{len(records)} execution records for {len(suite)} tests")
    spectrum = Spectrum(locations=dict(locations or {}))
    for node_id in spectrum.locations:
        spectrum.failed[node_id] = 0
        spectrum.passed[node_id] = 0
    for record in records:
        counts = spectrum.passed if record.passed else spectrum.failed
        if record.passed:
            spectrum.total_passed += 1
        else:
            spectrum.total_failed += 1
        for node_id in record.covered:
            spectrum.failed.setdefault(node_id, 0)
            spectrum.passed.setdefault(node_id, 0)
            counts[node_id] += 1
    return spectrum


def ochiai_rank(spectrum: Spectrum) -> Ranking:
    """Statements by descending suspiciousness, ties by source position.

    Raises:
        LocalizationError: If no test fails.
    """
    if spectrum.total_failed == 0:
        raise LocalizationError("nothing to localize: no failing test")
    scored = [(n, spectrum.suspiciousness(n)) for n in spectrum.node_ids]
    scored.sort(key=lambda item: (-item[1], spectrum.sort_key(item[0])))
    return scored


def spectrum_of(program: TypedProgram, records: Sequence[ExecutionRecord],
                suite: Sequence[TestCase]) -> Spectrum:
    """Build a spectrum over every statement of ``program``."""
    return build_spectrum(records, suite, {s.node_id: s.loc for s in program.statements()})


def rank_conditions(program: TypedProgram, spectrum: Spectrum) -> Ranking:
    """If conditions ranked by their if statement, keeping those covered by a failing test."""
    ranking: Ranking = []
    for node_id, susp in ochiai_rank(spectrum):
        node = program.nodes.get(node_id)
        if node is None or spectrum.failed.get(node_id, 0) == 0:
            continue
        if isinstance(node, If):
            ranking.append((node.cond.node_id, susp))
    return ranking


def rank_statements(program: TypedProgram, spectrum: Spectrum) -> Ranking:
    """Skippable statements covered by a failing test, in rank order."""
    return [(node_id, susp) for node_id, susp in ochiai_rank(spectrum)
            if spectrum.failed.get(node_id, 0) > 0
            and node_id in program.nodes and is_skippable(program.nodes[node_id])]


def format_spectrum(spectrum: Spectrum) -> str:
    """Ranking as tab-separated text: node, line, col, failed, passed, suspiciousness."""
    lines = ["node\tline\tcol\tfailed\tpassed\tsuspiciousness"]
    for node_id, susp in ochiai_rank(spectrum):
        loc = spectrum.locations.get(node_id)
        line, col = (loc.line, loc.col) if loc else ("", "")
        lines.append(f"{node_id}\t{line}\t{col}\t{spectrum.failed.get(node_id, 0)}\t"
                     f"{spectrum.passed.get(node_id, 0)}\t{susp:.6f}")
    return "\n".join(lines) + "\n"
