"""Core data model of mini-lang, the imperative language minipol repairs.

Holds source locations, static types, runtime values and the AST. Parsing,
checking and printing live in :mod:`minipol.parser`, :mod:`minipol.typecheck`
and :mod:`minipol.printer`; this module only describes the shapes they share.

Every AST node carries a :class:`SourceLoc` whose ``node_id`` is assigned in
parse order (pre-order, so ids follow source position). Locations never take
part in structural equality: two parses of the same program compare equal even
if one of them went through the pretty printer first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

# File name used for locations of synthesized nodes.
SYNTHESIZED = "<synthesized>"


@dataclass(frozen=True)
class SourceLoc:
    """Position of a node in its source file.

    Attributes:
        file: Source file name (``"<string>"`` for in-memory text).
        line: 1-based line.
        col: 1-based column.
        node_id: Parse-order id, unique within one program.
    """

    file: str
    line: int
    col: int
    node_id: int = -1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


def synthesized_loc() -> SourceLoc:
    """Location for nodes that do not come from a source file."""
    return SourceLoc(SYNTHESIZED, 1, 1, -1)


class Type(Enum):
    """Static types of mini-lang."""

    BOOL = "bool"
    INT = "int"
    REAL = "real"
    ARRAY_INT = "array<int>"
    ARRAY_REAL = "array<real>"

    def __str__(self) -> str:
        return self.value

    @property
    def is_array(self) -> bool:
        return self in (Type.ARRAY_INT, Type.ARRAY_REAL)

    @property
    def is_numeric(self) -> bool:
        return self in (Type.INT, Type.REAL)

    @property
    def is_primitive(self) -> bool:
        return not self.is_array

    @property
    def element(self) -> "Type":
        """Element type of an array type."""
        if self is Type.ARRAY_INT:
            return Type.INT
        if self is Type.ARRAY_REAL:
            return Type.REAL
        raise ValueError(f"{self} is not an array type")

    @staticmethod
    def array_of(element: "Type") -> "Type":
        if element is Type.INT:
            return Type.ARRAY_INT
        if element is Type.REAL:
            return Type.ARRAY_REAL
        raise ValueError(f"no array type over {element}")


def render_real(x: float) -> str:
    """Render a float as a mini-lang real literal (always with a dot)."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"{x} has no mini-lang literal")
    text = repr(float(x))
    if "." in text:
        return text
    if "e" in text:
        mantissa, exponent = text.split("e")
        return f"{mantissa}.0e{exponent}"
    return text + ".0"


Raw = Union[bool, int, float, tuple]


@dataclass(frozen=True)
class Value:
    """A runtime value tagged with its mini-lang type.

    ``data`` holds the Python representation: ``bool`` for BOOL, ``int`` for
    INT, ``float`` for REAL and a tuple of ``int``/``float`` for arrays.
    """

    type: Type
    data: Raw

    def __post_init__(self):
        if not _raw_matches(self.type, self.data):
            raise TypeError(f"value {self.data!r} does not match type {self.type}")

    @classmethod
    def boolean(cls, b: bool) -> "Value":
        return cls(Type.BOOL, bool(b))

    @classmethod
    def integer(cls, i: int) -> "Value":
        return cls(Type.INT, int(i))

    @classmethod
    def real(cls, x: float) -> "Value":
        return cls(Type.REAL, float(x))

    @classmethod
    def array(cls, element: Type, items) -> "Value":
        conv = int if element is Type.INT else float
        return cls(Type.array_of(element), tuple(conv(i) for i in items))

    def render(self) -> str:
        """Mini-lang literal text for this value."""
        return render_raw(self.type, self.data)

    def __str__(self) -> str:
        return self.render()

    def matches(self, other: "Value", tolerance: float = 0.0) -> bool:
        """Equality with an absolute tolerance on REAL components."""
        if self.type is not other.type:
            return False
        if self.type is Type.REAL:
            return abs(self.data - other.data) <= tolerance  # type: ignore[operator]
        if self.type is Type.ARRAY_REAL:
            a, b = self.data, other.data
            return len(a) == len(b) and all(abs(x - y) <= tolerance for x, y in zip(a, b))  # type: ignore[arg-type]
        return self.data == other.data


def _raw_matches(ty: Type, data) -> bool:
    if ty is Type.BOOL:
        return isinstance(data, bool)
    if ty is Type.INT:
        return isinstance(data, int) and not isinstance(data, bool)
    if ty is Type.REAL:
        return isinstance(data, float)
    if not isinstance(data, tuple):
        return False
    return all(_raw_matches(ty.element, d) for d in data)


def render_raw(ty: Type, data) -> str:
    if ty is Type.BOOL:
        return "true" if data else "false"
    if ty is Type.INT:
        return str(data)
    if ty is Type.REAL:
        return render_real(data)
    return "[" + ", ".join(render_raw(ty.element, d) for d in data) + "]"


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(kw_only=True)
class Node:
    loc: SourceLoc = field(compare=False, repr=False)

    @property
    def node_id(self) -> int:
        return self.loc.node_id


@dataclass(kw_only=True)
class Expr(Node):
    type: Optional[Type] = field(default=None)


@dataclass
class Literal(Expr):
    value: Value


@dataclass
class VarRef(Expr):
    name: str


@dataclass
class Unary(Expr):
    op: str
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass
class Index(Expr):
    array: Expr
    index: Expr


@dataclass
class Call(Expr):
    name: str
    args: list[Expr]


@dataclass(kw_only=True)
class Stmt(Node):
    pass


@dataclass
class Block(Stmt):
    statements: list[Stmt]


@dataclass
class Decl(Stmt):
    name: str
    decl_type: Type
    init: Expr


@dataclass
class Assign(Stmt):
    """``target = value`` or, when ``index`` is set, ``target[index] = value``."""

    target: str
    index: Optional[Expr]
    value: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then_block: Block
    else_block: Optional[Block] = None


@dataclass
class While(Stmt):
    cond: Expr
    body: Block


@dataclass
class Return(Stmt):
    value: Expr


@dataclass(frozen=True)
class Param:
    name: str
    type: Type


@dataclass
class FunctionDef(Node):
    name: str
    params: list[Param]
    return_type: Type
    body: Block


@dataclass
class Program(Node):
    functions: list[FunctionDef]

    @property
    def file(self) -> str:
        return self.loc.file

    def function(self, name: str) -> Optional[FunctionDef]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


AnyNode = Union[Expr, Stmt, FunctionDef, Program]

BUILTINS = ("len", "floor", "int", "real", "sort")
ARITHMETIC_OPS = ("+", "-", "*", "/")
COMPARISON_OPS = ("<", "<=", "==", "!=", ">", ">=")
LOGIC_OPS = ("&&", "||")

# Flipping the operands of a comparison keeps its meaning under these.
MIRRORED = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


def children(node: AnyNode) -> list[AnyNode]:
    """Direct sub-nodes of ``node`` in source order."""
    match node:
        case Program(functions=fns):
            return list(fns)
        case FunctionDef(body=body):
            return [body]
        case Block(statements=stmts):
            return list(stmts)
        case Decl(init=init):
            return [init]
        case Assign(index=index, value=value):
            return ([index] if index is not None else []) + [value]
        case If(cond=cond, then_block=then_block, else_block=else_block):
            return [cond, then_block] + ([else_block] if else_block is not None else [])
        case While(cond=cond, body=body):
            return [cond, body]
        case Return(value=value):
            return [value]
        case Unary(operand=operand):
            return [operand]
        case Binary(lhs=lhs, rhs=rhs):
            return [lhs, rhs]
        case Index(array=array, index=index):
            return [array, index]
        case Call(args=args):
            return list(args)
        case _:
            return []


def walk(node: AnyNode) -> Iterator[AnyNode]:
    """Pre-order traversal."""
    yield node
    for child in children(node):
        yield from walk(child)


def is_statement(node: AnyNode) -> bool:
    """Statements that count for coverage (blocks are only containers)."""
    return isinstance(node, Stmt) and not isinstance(node, Block)


def is_skippable(node: AnyNode) -> bool:
    """Statements a missing-precondition guard may wrap.

    Declarations are excluded (skipping one unbinds a name) and so are returns
    (skipping one breaks all-paths-return).
    """
    return isinstance(node, (Assign, If, While))


@dataclass
class TypedProgram:
    """A checked program plus the indexes the repair pipeline navigates by.

    Attributes:
        program: The AST, with every expression's ``type`` filled in.
        nodes: node_id -> node.
        parents: node_id -> parent node_id.
        function_of: node_id -> name of the enclosing function.
        scopes: statement node_id -> variables in scope right before the
            statement runs, in declaration order (parameters first).
    """

    program: Program
    nodes: dict[int, AnyNode] = field(default_factory=dict)
    parents: dict[int, int] = field(default_factory=dict)
    function_of: dict[int, str] = field(default_factory=dict)
    scopes: dict[int, list[Param]] = field(default_factory=dict)

    @property
    def file(self) -> str:
        return self.program.file

    def node(self, node_id: int) -> AnyNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise KeyError(f"no node with id {node_id} in {self.file}") from None

    def function(self, name: str) -> Optional[FunctionDef]:
        return self.program.function(name)

    def statements(self) -> list[Stmt]:
        """All coverage-relevant statements in source order."""
        return [n for n in walk(self.program) if is_statement(n)]  # type: ignore[misc]

    def if_statements(self) -> list[If]:
        return [n for n in walk(self.program) if isinstance(n, If)]

    def enclosing_if(self, cond_id: int) -> If:
        """The ``if`` statement whose condition is node ``cond_id``."""
        parent = self.nodes.get(self.parents.get(cond_id, -1))
        if not isinstance(parent, If) or parent.cond.node_id != cond_id:
            raise KeyError(f"node {cond_id} is not an if condition")
        return parent

    def is_if_condition(self, node_id: int) -> bool:
        parent = self.nodes.get(self.parents.get(node_id, -1))
        return isinstance(parent, If) and parent.cond.node_id == node_id

    def scope_at(self, node_id: int) -> list[Param]:
        """Variables in scope at a statement or at an if condition."""
        if node_id in self.scopes:
            return self.scopes[node_id]
        return self.scopes[self.enclosing_if(node_id).node_id]

    def index(self) -> "TypedProgram":
        """(Re)build ``nodes``, ``parents`` and ``function_of`` from the AST."""
        self.nodes.clear()
        self.parents.clear()
        self.function_of.clear()
        for fn in self.program.functions:
            for node in walk(fn):
                self.nodes[node.node_id] = node
                self.function_of[node.node_id] = fn.name
                for child in children(node):
                    self.parents[child.node_id] = node.node_id
        return self
