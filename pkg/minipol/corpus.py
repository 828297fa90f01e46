"""
Bundled case studies for minipol.

Each case lives in its own folder under ``minipol/corpus/`` with a program,
a JSON suite and a ``case.json`` manifest stating the expected outcome.

Provides:
- CorpusCase: A loaded case (manifest, checked program, suite)
- CaseCheck: Outcome of repairing one case against its manifest
- available_cases: Names of the bundled cases
- load_case: Load one case by name or folder
- check_case: Repair a case and compare with its manifest
- run_corpus: Check every bundled case
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

from pydantic import ValidationError

from .driver import RepairResult, load_program, load_suite, repair
from .errors import MinipolError
from .interp import TestCase, evaluate
from .lang import TypedProgram
from .models import CorpusManifest, RepairConfig
from .parser import parse_expression
from .trace import row_env
from .typecheck import check_expression

logger = logging.getLogger(__name__)

CORPUS_DIR = Path(__file__).parent / "corpus"
MANIFEST_NAME = "case.json"


@dataclass
class CorpusCase:
    manifest: CorpusManifest
    directory: Path
    program: TypedProgram
    suite: List[TestCase]

    @property
    def name(self) -> str:
        return self.manifest.name


@dataclass
class CaseCheck:
    """Result of checking one case; ``problems`` is empty when it matched."""

    name: str
    result: Optional[RepairResult] = None
    problems: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def available_cases(root: Path = CORPUS_DIR) -> List[str]:
    if not root.exists():
        return []
    return sorted(d.name for d in root.iterdir() if (d / MANIFEST_NAME).is_file())


def load_case(name_or_dir: Union[str, Path], root: Path = CORPUS_DIR) -> CorpusCase:
    """Load a case by bundled name or by folder path.

    Raises:
        MinipolError: Unknown case, invalid manifest, or a program/suite error.
    """
    directory = Path(name_or_dir)
    if not (directory / MANIFEST_NAME).is_file():
        directory = root / str(name_or_dir)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.is_file():
        raise MinipolError(f"no case '{name_or_dir}' (known: {', '.join(available_cases(root))})")
    try:
        manifest = CorpusManifest.model_validate_json(manifest_path.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise MinipolError(f"{manifest_path}: invalid manifest: {exc.errors()[0]['msg']}") from exc
    program = load_program(directory / manifest.program)
    suite = load_suite(directory / manifest.suite, program)
    logger.debug("loaded case %s: %d tests", manifest.name, len(suite))
    return CorpusCase(manifest, directory, program, suite)


def _reference_problems(case: CorpusCase, result: RepairResult) -> List[str]:
    """Compare the patch with the reference expression on the accepted pair's rows."""
    reference = case.manifest.expected.reference
    if reference is None or result.patch is None or not result.traces:
        return []
    pair, data = result.traces[-1]
    expr = parse_expression(reference)
    check_expression(expr, {p.name: p.type for p in case.program.scope_at(pair.node_id)})
    problems = []
    for row in data.rows:
        value = evaluate(expr, row_env(data.schema, row))
        if value.data != row.expected:
            problems.append(f"reference `{reference}` disagrees with row {row.test_name}#{row.m}")
    return problems


def check_case(case: CorpusCase, config: Optional[RepairConfig] = None) -> CaseCheck:
    """Repair ``case`` and list every way the outcome differs from its manifest."""
    expected = case.manifest.expected
    check = CaseCheck(case.name)
    result = repair(case.program, case.suite, config or case.manifest.config)
    check.result = result

    baseline = {r.test.name: r.status.value for r in result.baseline}
    for test_name, status in expected.baseline.items():
        if baseline.get(test_name) != status:
            check.problems.append(f"baseline of {test_name} is {baseline.get(test_name)}, "
                                  f"expected {status}")
    patch = result.patch
    if expected.status == "no_patch":
        if patch is not None:
            check.problems.append(f"unexpected patch `{patch.expression_text}`")
        return check
    if patch is None:
        check.problems.append(f"no patch: {result.reason}")
        return check
    if expected.kind is not None and patch.kind.value != expected.kind:
        check.problems.append(f"patch kind is {patch.kind.value}, expected {expected.kind}")
    if expected.line is not None and patch.loc.line != expected.line:
        check.problems.append(f"patch at line {patch.loc.line}, expected line {expected.line}")
    if expected.expression is not None and patch.expression_text != expected.expression:
        check.problems.append(f"patch is `{patch.expression_text}`, expected `{expected.expression}`")
    check.problems.extend(_reference_problems(case, result))
    return check


def run_corpus(names: Optional[List[str]] = None, root: Path = CORPUS_DIR,
               config: Optional[RepairConfig] = None) -> List[CaseCheck]:
    """Check the named cases (all bundled ones by default), in name order."""
    checks = []
    for name in names or available_cases(root):
        check = check_case(load_case(name, root), config)
        if check.ok:
            logger.info("case %s reproduced", name)
        else:
            logger.warning("case %s: %s", name, "; ".join(check.problems))
        checks.append(check)
    return checks
