"""Lexer and recursive-descent parser for mini-lang.

Grammar (``//`` starts a line comment)::

    program  := function+
    function := "fn" ident "(" params? ")" "->" type block
    params   := ident ":" type ("," ident ":" type)*
    block    := "{" stmt* "}"
    stmt     := "let" ident ":" type "=" expr ";"
              | ident ("[" expr "]")? "=" expr ";"
              | "if" "(" expr ")" block ("else" block)?
              | "while" "(" expr ")" block
              | "return" expr ";"
    type     := "bool" | "int" | "real" | "array" "<" ("int" | "real") ">"

Expression precedence, loosest first: ``||``, ``&&``, comparisons, ``+ -``,
``* /``, unary ``! -``, postfix indexing and built-in calls.

Node ids are assigned by a pre-order pass once a tree is built, so they follow
source order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

from .errors import ParseError
from .lang import (
    INT_MAX, INT_MIN, AnyNode, Assign, Binary, Block, Call, Decl, Expr, FunctionDef, If,
    Index, Literal, Param, Program, Return, SourceLoc, Stmt, Type, Unary, Value, VarRef,
    While, walk,
)

KEYWORDS = {"fn", "let", "if", "else", "while", "return", "true", "false"}

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>//[^\n]*)"
    r"|(?P<real>\d+\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>->|<=|>=|==|!=|&&|\|\||[-+*/<>=!(){}\[\],;:])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "real", "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str, file: str = "<string>") -> list[Token]:
    """Split source text into tokens, dropping whitespace and comments."""
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             SourceLoc(file, line, pos - line_start + 1))
        kind = m.lastgroup or ""
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident" and m.group() in KEYWORDS:
            tokens.append(Token("kw", m.group(), line, col))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# Binary precedence levels, loosest first.
_BINARY_LEVELS: list[tuple[str, ...]] = [
    ("||",),
    ("&&",),
    ("<", "<=", "==", "!=", ">", ">="),
    ("+", "-"),
    ("*", "/"),
]


class Parser:
    """Recursive-descent parser over a token list."""

    def __init__(self, text: str, file: str = "<string>"):
        self.file = file
        self.tokens = tokenize(text, file)
        self.pos = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected '{text}'")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self.fail("expected identifier")
        return self.advance()

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", SourceLoc(self.file, tok.line, tok.col))

    def new_loc(self, tok: Token) -> SourceLoc:
        return SourceLoc(self.file, tok.line, tok.col)

    # -- declarations --------------------------------------------------------

    def parse_program(self) -> Program:
        start = self.tok
        loc = self.new_loc(start)
        functions: list[FunctionDef] = []
        seen: dict[str, FunctionDef] = {}
        while self.tok.kind != "eof":
            fn = self.parse_function()
            if fn.name in seen:
                raise ParseError(f"duplicate function '{fn.name}'", fn.loc)
            seen[fn.name] = fn
            functions.append(fn)
        if not functions:
            raise ParseError("no functions", SourceLoc(self.file, start.line, start.col))
        return Program(functions, loc=loc)

    def parse_function(self) -> FunctionDef:
        start = self.expect("fn")
        loc = self.new_loc(start)
        name = self.expect_ident().text
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            while True:
                pname = self.expect_ident().text
                self.expect(":")
                params.append(Param(pname, self.parse_type()))
                if not self.accept(","):
                    break
        self.expect(")")
        self.expect("->")
        return_type = self.parse_type()
        body = self.parse_block()
        return FunctionDef(name, params, return_type, body, loc=loc)

    def parse_type(self) -> Type:
        tok = self.expect_ident()
        if tok.text == "array":
            self.expect("<")
            elem = self.expect_ident()
            self.expect(">")
            if elem.text == "int":
                return Type.ARRAY_INT
            if elem.text == "real":
                return Type.ARRAY_REAL
            self.fail("expected 'int' or 'real' element type", elem)
        for ty in (Type.BOOL, Type.INT, Type.REAL):
            if tok.text == ty.value:
                return ty
        self.fail("expected a type", tok)
        raise AssertionError("unreachable")

    # -- statements ------------------------------------------------------------

    def parse_block(self) -> Block:
        start = self.expect("{")
        loc = self.new_loc(start)
        statements: list[Stmt] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("expected '}'")
            statements.append(self.parse_statement())
        self.expect("}")
        return Block(statements, loc=loc)

    def parse_statement(self) -> Stmt:
        start = self.tok
        if self.at("let"):
            loc = self.new_loc(self.advance())
            name = self.expect_ident().text
            self.expect(":")
            decl_type = self.parse_type()
            self.expect("=")
            init = self.parse_expr()
            self.expect(";")
            return Decl(name, decl_type, init, loc=loc)
        if self.at("if"):
            loc = self.new_loc(self.advance())
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then_block = self.parse_block()
            else_block = self.parse_block() if self.accept("else") else None
            return If(cond, then_block, else_block, loc=loc)
        if self.at("while"):
            loc = self.new_loc(self.advance())
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return While(cond, self.parse_block(), loc=loc)
        if self.at("return"):
            loc = self.new_loc(self.advance())
            value = self.parse_expr()
            self.expect(";")
            return Return(value, loc=loc)
        if start.kind == "ident":
            loc = self.new_loc(start)
            target = self.advance().text
            index = None
            if self.accept("["):
                index = self.parse_expr()
                self.expect("]")
            self.expect("=")
            value = self.parse_expr()
            self.expect(";")
            return Assign(target, index, value, loc=loc)
        self.fail("expected a statement")
        raise AssertionError("unreachable")

    # -- expressions -------------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self._parse_level(0)

    def _parse_level(self, level: int) -> Expr:
        if level == len(_BINARY_LEVELS):
            return self.parse_unary()
        lhs = self._parse_level(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_LEVELS[level]:
            op = self.advance().text
            rhs = self._parse_level(level + 1)
            lhs = Binary(op, lhs, rhs, loc=lhs.loc)
        return lhs

    def parse_unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in ("!", "-"):
            tok = self.advance()
            loc = self.new_loc(tok)
            return Unary(tok.text, self.parse_unary(), loc=loc)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        expr = self.parse_primary()
        while self.at("["):
            self.advance()
            index = self.parse_expr()
            self.expect("]")
            expr = Index(expr, index, loc=expr.loc)
        return expr

    def parse_primary(self) -> Expr:
        tok = self.tok
        if tok.kind in ("int", "real"):
            self.advance()
            return Literal(self._number(tok), loc=self.new_loc(tok))
        if tok.kind == "kw" and tok.text in ("true", "false"):
            self.advance()
            return Literal(Value.boolean(tok.text == "true"), loc=self.new_loc(tok))
        if self.at("["):
            return self.parse_array_literal()
        if self.at("("):
            self.advance()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if tok.kind == "ident":
            loc = self.new_loc(self.advance())
            if self.accept("("):
                args: list[Expr] = []
                if not self.at(")"):
                    args.append(self.parse_expr())
                    while self.accept(","):
                        args.append(self.parse_expr())
                self.expect(")")
                return Call(tok.text, args, loc=loc)
            return VarRef(tok.text, loc=loc)
        self.fail("expected an expression")
        raise AssertionError("unreachable")

    def parse_array_literal(self) -> Literal:
        start = self.expect("[")
        loc = self.new_loc(start)
        items: list[Value] = []
        if not self.at("]"):
            items.append(self._parse_signed_number())
            while self.accept(","):
                items.append(self._parse_signed_number())
        self.expect("]")
        if not items:
            self.fail("empty array literal has no element type", start)
        kinds = {v.type for v in items}
        if len(kinds) != 1:
            self.fail("array literal mixes int and real elements", start)
        elem = kinds.pop()
        return Literal(Value.array(elem, [v.data for v in items]), loc=loc)

    def _parse_signed_number(self) -> Value:
        negative = self.accept("-")
        tok = self.tok
        if tok.kind in ("int", "real"):
            self.advance()
            return self._number(tok, negative)
        self.fail("expected a number")
        raise AssertionError("unreachable")

    def _number(self, tok: Token, negative: bool = False) -> Value:
        """The value of a numeric token; ints must fit 64 bits and reals must be finite."""
        if tok.kind == "int":
            i = -int(tok.text) if negative else int(tok.text)
            if not INT_MIN <= i <= INT_MAX:
                self.fail("integer literal out of the 64-bit range", tok)
            return Value.integer(i)
        x = -float(tok.text) if negative else float(tok.text)
        if not math.isfinite(x):
            self.fail("real literal out of range", tok)
        return Value.real(x)


def number_nodes(root: AnyNode, start: int = 0) -> int:
    """Assign pre-order node ids to ``root`` and its subtree.

    Binary operators and indexing are only recognised after their left operand
    has been built, so ids are handed out here rather than during parsing.
    Returns the next free id.
    """
    next_id = start
    for node in walk(root):
        loc = node.loc
        node.loc = SourceLoc(loc.file, loc.line, loc.col, next_id)
        next_id += 1
    return next_id


def parse_program(source_text: str, file: str = "<string>") -> Program:
    """Parse a whole mini-lang program.

    Raises:
        ParseError: On syntax errors, duplicate functions or empty input.
    """
    program = Parser(source_text, file).parse_program()
    number_nodes(program)
    return program


def parse_expression(text: str, file: str = "<expr>") -> Expr:
    """Parse a single free-standing expression."""
    parser = Parser(text, file)
    expr = parser.parse_expr()
    if parser.tok.kind != "eof":
        parser.fail("unexpected trailing input")
    number_nodes(expr)
    return expr


def parse_value(text: str, expected: Type, file: str = "<value>") -> Value:
    """Parse a literal written in a test suite, e.g. ``-20`` or ``[1.0, 2.5]``.

    An empty array ``[]`` takes its element type from ``expected``.

    Raises:
        ParseError: If the text is not a literal of type ``expected``.
    """
    stripped = text.strip()
    if expected.is_array and re.fullmatch(r"\[\s*\]", stripped):
        return Value(expected, ())
    parser = Parser(stripped, file)
    tok = parser.tok
    value: Optional[Value] = None
    if tok.kind == "kw" and tok.text in ("true", "false"):
        parser.advance()
        value = Value.boolean(tok.text == "true")
    elif parser.at("["):
        value = parser.parse_array_literal().value
    elif tok.kind in ("int", "real") or parser.at("-"):
        value = parser._parse_signed_number()
    if value is None or parser.tok.kind != "eof":
        raise ParseError(f"not a literal: {text!r}", SourceLoc(file, 1, 1))
    if value.type is not expected:
        raise ParseError(f"literal {text!r} is {value.type}, expected {expected}", SourceLoc(file, 1, 1))
    return value

