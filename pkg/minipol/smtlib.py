"""SMT-LIB 2 export of synthesis problems, reading scripts and models back.

:func:`emit_smtlib` writes one script per constraint system: declarations for
every location and value variable, the constraint groups as commented blocks
of asserts, ``check-sat`` and ``get-value`` on the location variables. Every
command sits on its own line and is printed by pysmt.

:func:`read_script` parses a script with pysmt's SMT-LIB parser into a fresh
environment, :func:`evaluate_script` checks an assignment against it, and
:func:`read_model` reads a solver's answer. :func:`solve_with_z3` parses the
full script the same way and hands it to z3 when ``z3-solver`` is installed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from io import StringIO
from pathlib import Path
from typing import Mapping, Optional, Union

import pysmt.smtlib.commands as smtcmd
from pysmt.environment import Environment
from pysmt.exceptions import (
    NoSolverAvailableError, PysmtException, SolverAPINotFound, SolverReturnedUnknownResultError,
)
from pysmt.fnode import FNode
from pysmt.smtlib.parser import SmtLibParser
from pysmt.smtlib.script import SmtLibCommand

from .errors import SmtLibError, SolverUnavailable
from .synth import ConstraintSystem, Model, Scalar, SolveResult, SolveStatus, pysmt_scope

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def _command(name: str, *args: object) -> str:
    return SmtLibCommand(name, list(args)).serialize_to_string(daggify=False)


def emit_smtlib(system: ConstraintSystem, title: str = "") -> str:
    """Render ``system`` as an SMT-LIB 2 script."""
    nonlinear = any(b.op == "*" for b in system.blocks)
    lines = [f"; {title or 'minipol synthesis problem'}", f"; {system.describe()}"]
    if nonlinear:
        lines.append("; multiplication blocks make this problem non-linear")
    with pysmt_scope(system.env):
        lines.append(_command(smtcmd.SET_LOGIC, "QF_NIRA" if nonlinear else "QF_LIRA"))
        lines += [_command(smtcmd.DECLARE_FUN, s) for s in system.symbols.values()]
        for group in system.GROUPS:
            formulas = system.groups[group]
            if not formulas:
                continue
            lines.append(f"; phi_{group}")
            lines += [_command(smtcmd.ASSERT, f) for f in formulas]
        lines.append(_command(smtcmd.CHECK_SAT))
        lines.append(_command(smtcmd.GET_VALUE, *(system.symbols[n] for n in system.location_vars)))
    return "\n".join(lines) + "\n"


def smt_file_name(program: str, node_id: int, level: int) -> str:
    return f"{program}_{node_id}_L{level}.smt2"


def write_smtlib(system: ConstraintSystem, directory: Union[str, Path], program: str,
                 node_id: int) -> Path:
    """Write the script for ``system`` into ``directory`` and return its path."""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / smt_file_name(program, node_id, system.level)
    path.write_text(emit_smtlib(system, f"{program}, node {node_id}, level {system.level}"),
                    encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

@dataclass
class Script:
    """A parsed script; formulas live in ``env``."""

    env: Environment
    logic: Optional[str] = None
    symbols: dict[str, FNode] = field(default_factory=dict)
    assertions: list[FNode] = field(default_factory=list)
    commands: list[str] = field(default_factory=list)

    @property
    def declarations(self) -> dict[str, str]:
        """Declared constant names and their sorts."""
        return {name: str(s.symbol_type()) for name, s in self.symbols.items()}

    def render(self, formula: FNode) -> str:
        with pysmt_scope(self.env):
            return formula.to_smtlib(daggify=False)


def read_script(text: str) -> Script:
    """Parse an SMT-LIB 2 script into a fresh pysmt environment.

    Raises:
        SmtLibError: If pysmt rejects the text.
    """
    script = Script(Environment())
    with pysmt_scope(script.env):
        try:
            parsed = SmtLibParser(environment=script.env).get_script(StringIO(text))
        except (PysmtException, ValueError) as exc:
            raise SmtLibError(f"cannot parse script: {exc}") from exc
    for command in parsed.commands:
        script.commands.append(command.name)
        if command.name == smtcmd.SET_LOGIC and command.args and command.args[0] is not None:
            script.logic = str(command.args[0])
        elif command.name == smtcmd.DECLARE_FUN:
            symbol = command.args[0]
            script.symbols[symbol.symbol_name()] = symbol
        elif command.name == smtcmd.ASSERT:
            script.assertions.append(command.args[0])
    return script


def evaluate_script(script: Script, valuation: Mapping[str, Scalar]) -> bool:
    """Whether ``valuation`` satisfies every assertion of ``script``.

    Raises:
        SmtLibError: If a declared symbol has no value.
    """
    mgr = script.env.formula_manager
    substitution = {}
    for name, symbol in script.symbols.items():
        if name not in valuation:
            raise SmtLibError(f"no value for '{name}'")
        value = valuation[name]
        sort = symbol.symbol_type()
        if sort.is_bool_type():
            substitution[symbol] = mgr.Bool(bool(value))
        elif sort.is_int_type():
            substitution[symbol] = mgr.Int(int(value))
        else:
            substitution[symbol] = mgr.Real(Fraction(value))
    with pysmt_scope(script.env):
        for formula in script.assertions:
            if not formula.substitute(substitution).simplify().is_true():
                return False
    return True


def _strip_verdict(text: str) -> str:
    body = text.strip()
    if body.startswith("unsat"):
        raise SmtLibError("solver answered unsat")
    if body.startswith("sat"):
        body = body[3:].strip()
    return body


def _model_listing(body: str, parser: SmtLibParser) -> dict[str, FNode]:
    inner = body
    if not body.startswith("(define-fun") and body.startswith("(") and body.endswith(")"):
        inner = body[1:-1].strip()
    if inner.startswith("model"):
        inner = inner[len("model"):]
    script = parser.get_script(StringIO(inner))
    return {cmd.args[0]: cmd.args[3] for cmd in script.commands if cmd.name == smtcmd.DEFINE_FUN}


def read_model(text: str, system: ConstraintSystem) -> Model:
    """Read a solver answer into a model of the location variables of ``system``.

    Accepts the answer to ``(get-value ...)`` as well as a ``(model ...)`` or
    bare ``(define-fun ...)`` listing; a leading ``sat`` is ignored.

    Raises:
        SmtLibError: If the text holds no assignment, or the solver said unsat.
    """
    body = _strip_verdict(text)
    env = Environment()
    mgr = env.formula_manager
    for name in system.location_vars:
        mgr.Symbol(name, system.symbols[name].symbol_type())
    parser = SmtLibParser(environment=env)
    with pysmt_scope(env):
        try:
            if "define-fun" in body:
                values = _model_listing(body, parser)
            else:
                values = {str(var.symbol_name()): value
                          for var, value in parser.get_assignment_list(StringIO(body))
                          if var.is_symbol()}
        except (PysmtException, ValueError) as exc:
            raise SmtLibError(f"cannot read solver output: {exc}") from exc
        values = {name: value.simplify() for name, value in values.items()}
    locations = {name: int(value.constant_value()) for name, value in values.items()
                 if name in system.location_vars and value.is_int_constant()}
    if not locations:
        raise SmtLibError("no location assignment found in solver output")
    return Model(locations)


# ---------------------------------------------------------------------------
# External solver
# ---------------------------------------------------------------------------

def solve_with_z3(system: ConstraintSystem, time_budget: float = 10.0) -> SolveResult:
    """Solve the full SMT-LIB script of ``system`` with z3 through pysmt.

    Raises:
        SolverUnavailable: If the ``z3-solver`` package is not installed.
    """
    try:
        import z3  # noqa: F401
    except ImportError as exc:
        raise SolverUnavailable("the z3 backend needs the 'z3-solver' package") from exc
    script = read_script(emit_smtlib(system))
    timeout_ms = max(1, int(time_budget * 1000))
    with pysmt_scope(script.env):
        try:
            solver = script.env.factory.Solver(name="z3", solver_options={"timeout": timeout_ms})
        except (NoSolverAvailableError, SolverAPINotFound, ImportError) as exc:
            raise SolverUnavailable("the z3 backend needs the 'z3-solver' package") from exc
        with solver:
            solver.add_assertions(script.assertions)
            try:
                sat = solver.solve()
            except SolverReturnedUnknownResultError:
                return SolveResult(SolveStatus.TIMEOUT)
            if not sat:
                return SolveResult(SolveStatus.UNSAT)
            assignment = {name: int(solver.get_value(script.symbols[name]).constant_value())
                          for name in system.location_vars}
    return SolveResult(SolveStatus.SAT, Model(assignment))
