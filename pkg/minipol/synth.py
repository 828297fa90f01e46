"""Component-based synthesis of patch expressions.

The patch is assembled from building blocks (comparison, logic and arithmetic
operator instances). Every input, constant, block input, block output and the
final result gets an integer *location variable*; an assignment of those
variables is a wiring, i.e. an expression. :class:`ConstraintSystem` holds the
well-formedness and per-row semantic constraints as pysmt formulas (the form
:mod:`minipol.smtlib` writes out), and :func:`solve_internal` searches the
wirings directly.

Levels grow the block multiset: comparisons first, then logic, addition and
subtraction, multiplication, and finally two instances of everything.
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterator, Mapping, Optional, Sequence, Union

from pysmt.environment import Environment, pop_env, push_env
from pysmt.fnode import FNode
from pysmt.typing import BOOL, INT, REAL

from .errors import EncodingError
from .interp import RuntimeTrap, apply_binary, apply_unary, evaluate
from .lang import (
    MIRRORED, Binary, Call, Expr, Literal, Type, Unary, Value, VarRef,
    render_real, synthesized_loc,
)
from .printer import print_expression
from .trace import Column, SynthesisInput, contradiction, coverage_gap, row_env

logger = logging.getLogger(__name__)

MAX_LEVEL = 5
DEFAULT_SYNTH_BUDGET = 10.0

Scalar = Union[bool, int, Fraction]

_COMPARISONS = ("<", "<=", "==", "!=")


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BuildingBlock:
    """One operator instance that may be wired into the patch."""

    id: int
    op: str
    input_types: tuple[Type, ...]
    output_type: Type

    @property
    def arity(self) -> int:
        return len(self.input_types)

    @property
    def signature(self) -> tuple:
        return (self.op, self.input_types)

    def __str__(self) -> str:
        ins = " x ".join(str(t) for t in self.input_types)
        return f"f{self.id}: {self.op} ({ins} -> {self.output_type})"


def _numeric_types(schema: Sequence[Column]) -> list[Type]:
    present = {c.type for c in schema}
    return [t for t in (Type.REAL, Type.INT) if t in present]


def build_components(level: int, schema: Sequence[Column]) -> list[BuildingBlock]:
    """Block multiset of ``level`` for rows described by ``schema``.

    Comparison and arithmetic blocks exist for the numeric types present in
    the schema, real before int.
    """
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in 0..{MAX_LEVEL}, got {level}")
    numeric = _numeric_types(schema)
    specs: list[tuple[str, tuple[Type, ...], Type]] = []
    if level >= 1:
        specs += [(op, (t, t), Type.BOOL) for t in numeric for op in _COMPARISONS]
    if level >= 2:
        specs += [("&&", (Type.BOOL, Type.BOOL), Type.BOOL),
                  ("||", (Type.BOOL, Type.BOOL), Type.BOOL),
                  ("!", (Type.BOOL,), Type.BOOL)]
    if level >= 3:
        specs += [(op, (t, t), t) for t in numeric for op in ("+", "-")]
    if level >= 4:
        specs += [("*", (t, t), t) for t in numeric]
    if level >= 5:
        specs = specs + specs
    return [BuildingBlock(i + 1, op, ins, out) for i, (op, ins, out) in enumerate(specs)]


# ---------------------------------------------------------------------------
# Constraint system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InputSlot:
    """An element of the program inputs: a collected column or a constant."""

    label: str
    type: Type
    column: Optional[Column] = None
    constant: Optional[Value] = None


def scalar_of(value: Value) -> Scalar:
    """The exact value SMT-LIB sees for ``value``."""
    if value.type is Type.BOOL:
        return bool(value.data)
    if value.type is Type.INT:
        return int(value.data)  # type: ignore[arg-type]
    return Fraction(render_real(value.data))  # type: ignore[arg-type]


SMT_TYPES = {Type.BOOL: BOOL, Type.INT: INT, Type.REAL: REAL}


@contextmanager
def pysmt_scope(env: Environment) -> Iterator[Environment]:
    """Make ``env`` the current pysmt environment (printing, substitution, solving)."""
    push_env(env)
    try:
        yield env
    finally:
        pop_env()


def constant_node(env: Environment, ty: Type, scalar: Scalar) -> FNode:
    mgr = env.formula_manager
    if ty is Type.BOOL:
        return mgr.Bool(bool(scalar))
    if ty is Type.INT:
        return mgr.Int(int(scalar))
    return mgr.Real(Fraction(scalar))


class ConstraintSystem:
    """Location-variable encoding of one synthesis problem.

    Locations are 1-based: the program inputs occupy ``1..n`` (collected
    columns, then constants) and block outputs occupy ``n+1..m`` where
    ``m = n + len(blocks)``. With no blocks the result is wired straight to a
    boolean input.
    """

    GROUPS = ("FIXED", "OUTPUT", "INPUT", "CONS", "ACYC", "LIB", "CONN", "FUNC")

    def __init__(self, data: SynthesisInput, blocks: Sequence[BuildingBlock], level: int = -1):
        self.data = data
        self.blocks = list(blocks)
        self.level = level
        self.inputs = [InputSlot(c.name, c.type, column=c) for c in data.schema]
        self.inputs += [InputSlot(c.value.render(), c.value.type, constant=c.value) for c in data.constants]
        self.expected = tuple(r.expected for r in data.rows)
        # Own environment: value variables change sort between systems.
        self.env = Environment()

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    @property
    def m(self) -> int:
        return self.n_inputs + len(self.blocks)

    @property
    def n_rows(self) -> int:
        return len(self.data.rows)

    @cached_property
    def input_vectors(self) -> list[tuple[Value, ...]]:
        """Per input slot, its value in every row."""
        vectors = []
        for i, slot in enumerate(self.inputs):
            if slot.constant is not None:
                vectors.append((slot.constant,) * self.n_rows)
            else:
                vectors.append(tuple(r.inputs[i] for r in self.data.rows))
        return vectors

    # -- variable names ------------------------------------------------------

    @staticmethod
    def l_in(i: int) -> str:
        return f"l_in_{i}"

    @staticmethod
    def l_out(b: BuildingBlock) -> str:
        return f"l_out_f{b.id}"

    @staticmethod
    def l_arg(b: BuildingBlock, k: int) -> str:
        return f"l_arg_f{b.id}_{k + 1}"

    L_R = "l_r"

    @staticmethod
    def v_in(row: int, i: int) -> str:
        return f"v{row}_in_{i}"

    @staticmethod
    def v_out(row: int, b: BuildingBlock) -> str:
        return f"v{row}_out_f{b.id}"

    @staticmethod
    def v_arg(row: int, b: BuildingBlock, k: int) -> str:
        return f"v{row}_arg_f{b.id}_{k + 1}"

    @staticmethod
    def v_r(row: int) -> str:
        return f"v{row}_r"

    @cached_property
    def location_vars(self) -> list[str]:
        names = [self.l_in(i) for i in range(1, self.n_inputs + 1)]
        names += [self.l_out(b) for b in self.blocks]
        names += [self.l_arg(b, k) for b in self.blocks for k in range(b.arity)]
        return names + [self.L_R]

    @cached_property
    def value_vars(self) -> list[tuple[str, Type]]:
        out: list[tuple[str, Type]] = []
        for j in range(1, self.n_rows + 1):
            out += [(self.v_in(j, i), s.type) for i, s in enumerate(self.inputs, 1)]
            for b in self.blocks:
                out.append((self.v_out(j, b), b.output_type))
                out += [(self.v_arg(j, b, k), t) for k, t in enumerate(b.input_types)]
            out.append((self.v_r(j), Type.BOOL))
        return out

    # -- consumers and sources -----------------------------------------------

    def consumers(self) -> list[tuple[str, Type, Optional[BuildingBlock], int]]:
        """Block inputs and the result: (location var, type, block, arg index)."""
        out: list[tuple[str, Type, Optional[BuildingBlock], int]] = [
            (self.l_arg(b, k), t, b, k) for b in self.blocks for k, t in enumerate(b.input_types)]
        out.append((self.L_R, Type.BOOL, None, -1))
        return out

    def sources(self, ty: Type) -> list[tuple[str, int, Optional[BuildingBlock]]]:
        """Inputs and block outputs of type ``ty``: (location var, input index, block)."""
        out: list[tuple[str, int, Optional[BuildingBlock]]] = [
            (self.l_in(i), i, None) for i, s in enumerate(self.inputs, 1) if s.type is ty]
        out += [(self.l_out(b), -1, b) for b in self.blocks if b.output_type is ty]
        return out

    # -- constraint groups ---------------------------------------------------

    @cached_property
    def symbols(self) -> dict[str, FNode]:
        """Every declared variable, location variables first."""
        mgr = self.env.formula_manager
        out = {name: mgr.Symbol(name, INT) for name in self.location_vars}
        out.update((name, mgr.Symbol(name, SMT_TYPES[ty])) for name, ty in self.value_vars)
        return out

    def _block_formula(self, op: str, args: list[FNode]) -> FNode:
        mgr = self.env.formula_manager
        if op == "!":
            return mgr.Not(args[0])
        a, b = args
        build = {
            "<": mgr.LT, "<=": mgr.LE, "==": mgr.Equals, "&&": mgr.And, "||": mgr.Or,
            "+": mgr.Plus, "-": mgr.Minus, "*": mgr.Times,
        }
        if op == "!=":
            return mgr.Not(mgr.Equals(a, b))
        return build[op](a, b)

    @cached_property
    def groups(self) -> dict[str, list[FNode]]:
        mgr = self.env.formula_manager
        sym = self.symbols
        g: dict[str, list[FNode]] = {name: [] for name in self.GROUPS}
        n, m = self.n_inputs, self.m

        g["FIXED"] = [mgr.Equals(sym[self.l_in(i)], mgr.Int(i)) for i in range(1, n + 1)]
        if self.blocks:
            g["FIXED"].append(mgr.Equals(sym[self.L_R], mgr.Int(m)))

        for b in self.blocks:
            g["OUTPUT"].append(mgr.LE(mgr.Int(n + 1), sym[self.l_out(b)]))
            g["OUTPUT"].append(mgr.LE(sym[self.l_out(b)], mgr.Int(m)))

        for var, ty, _, _ in self.consumers():
            g["INPUT"].append(mgr.Or([mgr.Equals(sym[var], sym[src]) for src, _, _ in self.sources(ty)]))

        if len(self.blocks) >= 2:
            g["CONS"].append(mgr.AllDifferent([sym[self.l_out(b)] for b in self.blocks]))

        for b in self.blocks:
            g["ACYC"] += [mgr.LT(sym[self.l_arg(b, k)], sym[self.l_out(b)]) for k in range(b.arity)]

        for j in range(1, self.n_rows + 1):
            for b in self.blocks:
                args = [sym[self.v_arg(j, b, k)] for k in range(b.arity)]
                g["LIB"].append(mgr.EqualsOrIff(sym[self.v_out(j, b)], self._block_formula(b.op, args)))
            for var, ty, block, k in self.consumers():
                value = self.v_r(j) if block is None else self.v_arg(j, block, k)
                for src, i, src_block in self.sources(ty):
                    src_value = self.v_in(j, i) if src_block is None else self.v_out(j, src_block)
                    g["CONN"].append(mgr.Implies(mgr.Equals(sym[var], sym[src]),
                                                 mgr.EqualsOrIff(sym[value], sym[src_value])))
            row = self.data.rows[j - 1]
            for i, (slot, vec) in enumerate(zip(self.inputs, self.input_vectors), 1):
                constant = constant_node(self.env, slot.type, scalar_of(vec[j - 1]))
                g["FUNC"].append(mgr.EqualsOrIff(sym[self.v_in(j, i)], constant))
            g["FUNC"].append(mgr.Iff(sym[self.v_r(j)], mgr.Bool(row.expected)))
        return g

    def assertions(self) -> list[FNode]:
        return [t for name in self.GROUPS for t in self.groups[name]]

    def render(self, formula: FNode) -> str:
        """SMT-LIB text of one formula of this system."""
        with pysmt_scope(self.env):
            return formula.to_smtlib(daggify=False)

    def valuation(self, model: "Model") -> dict[str, Scalar]:
        """Every variable's value under ``model``: its locations plus the per-row values.

        Real arithmetic is carried out in floating point, as the interpreter does.

        Raises:
            EncodingError: If the wiring is not acyclic or a block faults on a row.
        """
        values_at: dict[int, tuple[Value, ...]] = dict(enumerate(self.input_vectors, 1))
        for b in sorted(self.blocks, key=lambda blk: model[self.l_out(blk)]):
            try:
                operands = [values_at[model[self.l_arg(b, k)]] for k in range(b.arity)]
            except KeyError:
                raise EncodingError(f"inputs of f{b.id} are not defined below it") from None
            vector = _apply_rows(b, operands)
            if vector is None:
                raise EncodingError(f"f{b.id} faults on a row")
            values_at[model[self.l_out(b)]] = vector
        out: dict[str, Scalar] = dict(model.assignment)
        for j in range(1, self.n_rows + 1):
            for i in range(1, self.n_inputs + 1):
                out[self.v_in(j, i)] = scalar_of(values_at[i][j - 1])
            for b in self.blocks:
                out[self.v_out(j, b)] = scalar_of(values_at[model[self.l_out(b)]][j - 1])
                for k in range(b.arity):
                    out[self.v_arg(j, b, k)] = scalar_of(values_at[model[self.l_arg(b, k)]][j - 1])
            out[self.v_r(j)] = scalar_of(values_at[model[self.L_R]][j - 1])
        return out

    def describe(self) -> str:
        blocks = ", ".join(str(b) for b in self.blocks) or "no blocks"
        return f"level {self.level}: {self.n_inputs} inputs, {self.n_rows} rows, {blocks}"


def encode(data: SynthesisInput, blocks: Sequence[BuildingBlock], level: int = -1) -> ConstraintSystem:
    """Build the constraint system for ``data`` over ``blocks``."""
    return ConstraintSystem(data, blocks, level)


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------

class SolveStatus(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class Model:
    """Assignment of location variables."""

    assignment: dict[str, int] = field(hash=False)

    def __getitem__(self, name: str) -> int:
        return self.assignment[name]


@dataclass(frozen=True)
class SolveResult:
    status: SolveStatus
    model: Optional[Model] = None


class _Timeout(Exception):
    pass


def _apply_rows(block: BuildingBlock, operands: list[tuple[Value, ...]]) -> Optional[tuple[Value, ...]]:
    loc = synthesized_loc()
    out = []
    try:
        for row in zip(*operands):
            if block.arity == 1:
                out.append(apply_unary(block.op, row[0], loc))
            else:
                out.append(apply_binary(block.op, row[0], row[1], loc))
    except RuntimeTrap:
        return None
    return tuple(out)


class _WiringSearch:
    """Backtracking over wirings, building the expression tree from the result down.

    The block at location ``m`` is the root. Each block input is wired to a
    same-typed location below the block, in ascending order; a free location
    receives an unplaced block (identical blocks are tried once). Blocks the
    expression does not reach are placed afterwards wherever their inputs can
    be wired.
    """

    def __init__(self, system: ConstraintSystem, deadline: float):
        self.system = system
        self.blocks = system.blocks
        self.n = system.n_inputs
        self.deadline = deadline
        self.ticks = 0
        self.position_of: dict[int, int] = {}
        self.block_at: dict[int, int] = {}
        self.args: dict[int, list[int]] = {}
        self.vectors: dict[int, tuple[Value, ...]] = {}

    def tick(self) -> None:
        self.ticks += 1
        if self.ticks % 128 == 0 and time.monotonic() > self.deadline:
            raise _Timeout()

    def type_at(self, loc: int) -> Optional[Type]:
        if loc <= self.n:
            return self.system.inputs[loc - 1].type
        b = self.block_at.get(loc)
        return None if b is None else self.blocks[b].output_type

    def candidates(self, ty: Type) -> list[int]:
        seen: set[tuple] = set()
        out = []
        for b, block in enumerate(self.blocks):
            if b in self.position_of or block.output_type is not ty or block.signature in seen:
                continue
            seen.add(block.signature)
            out.append(b)
        return out

    def wire(self, b: int, pos: int) -> Iterator[tuple[Value, ...]]:
        block = self.blocks[b]
        self.position_of[b] = pos
        self.block_at[pos] = b
        self.args[b] = [0] * block.arity
        try:
            for operands in self.wire_args(b, pos, 0):
                self.tick()
                vector = _apply_rows(block, operands)
                if vector is None:
                    continue
                self.vectors[pos] = vector
                yield vector
        finally:
            self.vectors.pop(pos, None)
            del self.position_of[b], self.block_at[pos], self.args[b]

    def wire_args(self, b: int, pos: int, k: int) -> Iterator[list[tuple[Value, ...]]]:
        block = self.blocks[b]
        if k == block.arity:
            yield []
            return
        ty = block.input_types[k]
        for loc in range(1, pos):
            if loc <= self.n or loc in self.block_at:
                if self.type_at(loc) is not ty:
                    continue
                vector = self.system.input_vectors[loc - 1] if loc <= self.n else self.vectors[loc]
                self.args[b][k] = loc
                for rest in self.wire_args(b, pos, k + 1):
                    yield [vector, *rest]
                continue
            for c in self.candidates(ty):
                for vector in self.wire(c, loc):
                    self.args[b][k] = loc
                    for rest in self.wire_args(b, pos, k + 1):
                        yield [vector, *rest]

    def complete(self) -> Optional[dict[int, tuple[int, list[int]]]]:
        """Place the blocks the expression does not use; None if impossible."""
        lowest: dict[Type, int] = {}
        for i, slot in enumerate(self.system.inputs, 1):
            lowest.setdefault(slot.type, i)
        unused = [b for b in range(len(self.blocks)) if b not in self.position_of]
        extra: dict[int, tuple[int, list[int]]] = {}
        for pos in range(self.n + 1, self.system.m + 1):
            if pos in self.block_at:
                lowest.setdefault(self.blocks[self.block_at[pos]].output_type, pos)
                continue
            pick = next((b for b in unused if all(t in lowest for t in self.blocks[b].input_types)), None)
            if pick is None:
                return None
            unused.remove(pick)
            extra[pick] = (pos, [lowest[t] for t in self.blocks[pick].input_types])
            lowest.setdefault(self.blocks[pick].output_type, pos)
        return extra

    def assignment(self, r: int, extra: Mapping[int, tuple[int, list[int]]]) -> dict[str, int]:
        s = self.system
        out = {s.l_in(i): i for i in range(1, self.n + 1)}
        placed = {b: (self.position_of[b], list(self.args[b])) for b in self.position_of}
        placed.update(extra)
        for b, (pos, args) in sorted(placed.items()):
            block = self.blocks[b]
            out[s.l_out(block)] = pos
            for k, loc in enumerate(args):
                out[s.l_arg(block, k)] = loc
        out[s.L_R] = r
        return out

    def models(self) -> Iterator[Model]:
        expected = self.system.expected
        if not self.blocks:
            for loc in range(1, self.n + 1):
                self.tick()
                if self.type_at(loc) is Type.BOOL and \
                        tuple(v.data for v in self.system.input_vectors[loc - 1]) == expected:
                    yield Model(self.assignment(loc, {}))
            return
        m = self.system.m
        for b in self.candidates(Type.BOOL):
            for vector in self.wire(b, m):
                if tuple(v.data for v in vector) != expected:
                    continue
                extra = self.complete()
                if extra is not None:
                    yield Model(self.assignment(m, extra))


def solve_internal(system: ConstraintSystem, time_budget: float = DEFAULT_SYNTH_BUDGET) -> SolveResult:
    """Search wirings directly, checking each candidate against every row.

    Returns the first model in a deterministic order, ``UNSAT`` when the search
    space is exhausted and ``TIMEOUT`` when ``time_budget`` seconds run out.
    """
    search = _WiringSearch(system, time.monotonic() + time_budget)
    models = search.models()
    try:
        model = next(models, None)
    except _Timeout:
        return SolveResult(SolveStatus.TIMEOUT)
    finally:
        models.close()
    if model is None:
        return SolveResult(SolveStatus.UNSAT)
    return SolveResult(SolveStatus.SAT, model)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def _leaf(slot: InputSlot) -> Expr:
    loc = synthesized_loc()
    if slot.constant is not None:
        value = slot.constant
        if value.type.is_numeric and value.data < 0:  # type: ignore[operator]
            positive = Literal(Value(value.type, -value.data), loc=loc, type=value.type)  # type: ignore[operator]
            return Unary("-", positive, loc=loc, type=value.type)
        return Literal(value, loc=loc, type=value.type)
    column = slot.column
    assert column is not None
    if column.is_observer:
        array = VarRef(column.source, loc=loc, type=column.source_type)
        return Call(column.name.split("(")[0], [array], loc=loc, type=Type.INT)
    return VarRef(column.name, loc=loc, type=column.type)


def _is_constant(expr: Expr) -> bool:
    return isinstance(expr, Literal) or (isinstance(expr, Unary) and isinstance(expr.operand, Literal))


def orient(expr: Expr, order: Optional[Mapping[str, int]] = None) -> Expr:
    """Canonical operand order for comparisons.

    Constants go on the right. When both operands are variables (or observers)
    the one declared later goes on the left, with ``>``/``>=`` used where the
    operator has to be mirrored.

    Args:
        expr: A decoded expression; modified in place and returned.
        order: Declaration position of each variable or observer by name.
    """
    order = order or {}
    for child in (getattr(expr, "operand", None), getattr(expr, "lhs", None), getattr(expr, "rhs", None)):
        if isinstance(child, Expr):
            orient(child, order)
    if not isinstance(expr, Binary) or expr.op not in MIRRORED:
        return expr
    lhs, rhs = expr.lhs, expr.rhs
    swap = False
    if _is_constant(lhs) and not _is_constant(rhs):
        swap = True
    elif not _is_constant(lhs) and not _is_constant(rhs):
        lpos = order.get(_leaf_name(lhs), -1)
        rpos = order.get(_leaf_name(rhs), -1)
        swap = lpos >= 0 and rpos >= 0 and rpos > lpos
    if swap:
        expr.lhs, expr.rhs, expr.op = rhs, lhs, MIRRORED[expr.op]
    return expr


def _leaf_name(expr: Expr) -> str:
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, Call) and len(expr.args) == 1 and isinstance(expr.args[0], VarRef):
        return f"{expr.name}({expr.args[0].name})"
    return ""


def decode(model: Model, system: ConstraintSystem) -> Expr:
    """Turn a model into an expression by walking back from the result location.

    Blocks that are wired but do not feed the result are dropped.

    Raises:
        EncodingError: If a location points at nothing.
    """
    at_position = {}
    for b in system.blocks:
        pos = model.assignment.get(system.l_out(b))
        if pos is None:
            raise EncodingError(f"model has no location for {system.l_out(b)}")
        at_position[pos] = b

    def build(loc: int, depth: int) -> Expr:
        if depth > system.m:
            raise EncodingError("cyclic wiring in model")
        if 1 <= loc <= system.n_inputs:
            return _leaf(system.inputs[loc - 1])
        block = at_position.get(loc)
        if block is None:
            raise EncodingError(f"location {loc} is not produced by any input or block")
        args = []
        for k in range(block.arity):
            arg_loc = model.assignment.get(system.l_arg(block, k))
            if arg_loc is None:
                raise EncodingError(f"model has no location for {system.l_arg(block, k)}")
            args.append(build(arg_loc, depth + 1))
        loc0 = synthesized_loc()
        if block.arity == 1:
            return Unary(block.op, args[0], loc=loc0, type=block.output_type)
        return Binary(block.op, args[0], args[1], loc=loc0, type=block.output_type)

    root = model.assignment.get(system.L_R)
    if root is None:
        raise EncodingError("model has no location for the result")
    expr = build(root, 0)
    order = {slot.label: i for i, slot in enumerate(system.inputs) if slot.column is not None}
    return orient(expr, order)


def satisfies_rows(expr: Expr, data: SynthesisInput) -> bool:
    """Whether ``expr`` yields every row's expected value."""
    for row in data.rows:
        try:
            value = evaluate(expr, row_env(data.schema, row))
        except RuntimeTrap:
            return False
        if value.data != row.expected:
            return False
    return True


# ---------------------------------------------------------------------------
# Level escalation
# ---------------------------------------------------------------------------

Backend = Callable[[ConstraintSystem, float], SolveResult]


@dataclass
class LevelAttempt:
    level: int
    blocks: int
    status: SolveStatus
    seconds: float


@dataclass
class SynthesisOutcome:
    """Result of :func:`synthesize`; ``expression`` is None when nothing was found."""

    expression: Optional[Expr] = None
    level: Optional[int] = None
    diagnostics: list[str] = field(default_factory=list)
    attempts: list[LevelAttempt] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.expression is not None


def synthesize(data: SynthesisInput, max_level: int = MAX_LEVEL,
               budget: float = DEFAULT_SYNTH_BUDGET, trivial_guard: bool = True,
               backend: Backend = solve_internal,
               on_system: Optional[Callable[[ConstraintSystem], None]] = None) -> SynthesisOutcome:
    """Try levels ``0..max_level`` and return the first expression satisfying every row.

    Args:
        data: Rows, schema and constants for one repair site.
        max_level: Highest level to try.
        budget: Seconds shared by all levels.
        trivial_guard: Refuse rows that do not expect both boolean values.
        backend: Solver for one system.
        on_system: Called with every system before it is solved (SMT-LIB export).
    """
    outcome = SynthesisOutcome()
    if not data.rows:
        outcome.diagnostics.append("the location is never executed")
        return outcome
    clash = contradiction(data.rows)
    if clash is not None:
        outcome.diagnostics.append(f"contradictory rows: {clash}")
        return outcome
    if trivial_guard:
        gap = coverage_gap(data)
        if gap is not None:
            outcome.diagnostics.append(gap)
            return outcome
    deadline = time.monotonic() + budget
    timed_out = False
    for level in range(max_level + 1):
        system = encode(data, build_components(level, data.schema), level)
        if on_system is not None:
            on_system(system)
        remaining = deadline - time.monotonic()
        started = time.monotonic()
        result = backend(system, max(remaining, 0.0)) if remaining > 0 else SolveResult(SolveStatus.TIMEOUT)
        outcome.attempts.append(LevelAttempt(level, len(system.blocks), result.status,
                                             time.monotonic() - started))
        logger.info("synthesis %s -> %s", system.describe(), result.status.value)
        if result.status is SolveStatus.TIMEOUT:
            outcome.diagnostics.append(f"level {level}: time budget exhausted")
            timed_out = True
            break
        if result.model is None:
            continue
        try:
            expr = decode(result.model, system)
        except EncodingError as exc:
            logger.warning("level %d: unusable model: %s", level, exc)
            outcome.diagnostics.append(f"level {level}: unusable model ({exc})")
            continue
        # Solvers reason over exact integers and rationals; the rows were
        # produced with 64-bit ints and floats.
        if not satisfies_rows(expr, data):
            rendered = print_expression(expr)
            logger.warning("level %d: model `%s` fails the row check", level, rendered)
            outcome.diagnostics.append(
                f"level {level}: model `{rendered}` does not satisfy the collected rows")
            continue
        outcome.expression, outcome.level = expr, level
        return outcome
    if not timed_out:
        outcome.diagnostics.append(f"no expression up to level {max_level}")
    return outcome
