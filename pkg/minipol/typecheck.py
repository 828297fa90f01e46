"""Static checker for mini-lang.

Annotates every expression with its :class:`~minipol.lang.Type`, verifies
that every path through a function returns, and records which variables are in
scope at each statement (the trace collector reads those scopes). All issues
found are reported together in one :class:`~minipol.errors.TypeCheckError`.
"""

from __future__ import annotations

from typing import Mapping, Optional

from .errors import TypeCheckError, TypeIssue
from .lang import (
    Assign, Binary, Block, Call, Decl, Expr, FunctionDef, If, Index, Literal,
    Param, Program, Return, SourceLoc, Stmt, Type, TypedProgram, Unary, VarRef,
    While,
)


class _Checker:
    def __init__(self):
        self.issues: list[TypeIssue] = []
        self.scopes: dict[int, list[Param]] = {}

    def error(self, message: str, loc: SourceLoc) -> None:
        self.issues.append(TypeIssue(message, loc))

    # -- functions and statements ---------------------------------------------

    def check_function(self, fn: FunctionDef) -> None:
        visible: list[Param] = []
        for p in fn.params:
            if any(v.name == p.name for v in visible):
                self.error(f"duplicate parameter '{p.name}'", fn.loc)
                continue
            visible.append(p)
        self.check_block(fn.body, visible, fn)
        if not _always_returns(fn.body):
            self.error(f"function '{fn.name}' may finish without returning", fn.loc)

    def check_block(self, block: Block, visible: list[Param], fn: FunctionDef) -> None:
        mark = len(visible)
        for stmt in block.statements:
            self.check_statement(stmt, visible, fn)
        del visible[mark:]

    def check_statement(self, stmt: Stmt, visible: list[Param], fn: FunctionDef) -> None:
        self.scopes[stmt.node_id] = list(visible)
        env = {p.name: p.type for p in visible}
        match stmt:
            case Decl(name=name, decl_type=decl_type, init=init):
                init_type = self.check_expr(init, env)
                if name in env:
                    self.error(f"'{name}' is already declared in this function", stmt.loc)
                if init_type is not None and init_type is not decl_type:
                    self.error(f"cannot initialise '{name}: {decl_type}' with {init_type}", stmt.loc)
                if name not in env:
                    visible.append(Param(name, decl_type))
            case Assign(target=target, index=index, value=value):
                target_type = env.get(target)
                value_type = self.check_expr(value, env)
                if target_type is None:
                    self.error(f"unknown name '{target}'", stmt.loc)
                    return
                if index is not None:
                    index_type = self.check_expr(index, env)
                    if not target_type.is_array:
                        self.error(f"'{target}' is {target_type}, not an array", stmt.loc)
                        return
                    if index_type is not None and index_type is not Type.INT:
                        self.error(f"array index must be int, got {index_type}", index.loc)
                    target_type = target_type.element
                if value_type is not None and value_type is not target_type:
                    self.error(f"cannot assign {value_type} to {target_type}", stmt.loc)
            case If(cond=cond, then_block=then_block, else_block=else_block):
                self.check_condition(cond, env)
                self.check_block(then_block, visible, fn)
                if else_block is not None:
                    self.check_block(else_block, visible, fn)
            case While(cond=cond, body=body):
                self.check_condition(cond, env)
                self.check_block(body, visible, fn)
            case Return(value=value):
                value_type = self.check_expr(value, env)
                if value_type is not None and value_type is not fn.return_type:
                    self.error(f"'{fn.name}' returns {fn.return_type}, got {value_type}", stmt.loc)
            case Block():
                self.check_block(stmt, visible, fn)

    def check_condition(self, cond: Expr, env: Mapping[str, Type]) -> None:
        ty = self.check_expr(cond, env)
        if ty is not None and ty is not Type.BOOL:
            self.error(f"condition must be bool, got {ty}", cond.loc)

    # -- expressions -----------------------------------------------------------

    def check_expr(self, expr: Expr, env: Mapping[str, Type]) -> Optional[Type]:
        ty = self._infer(expr, env)
        expr.type = ty
        return ty

    def _infer(self, expr: Expr, env: Mapping[str, Type]) -> Optional[Type]:
        match expr:
            case Literal(value=value):
                return value.type
            case VarRef(name=name):
                if name not in env:
                    self.error(f"unknown name '{name}'", expr.loc)
                    return None
                return env[name]
            case Unary(op=op, operand=operand):
                ty = self.check_expr(operand, env)
                if ty is None:
                    return None
                if op == "!" and ty is Type.BOOL:
                    return Type.BOOL
                if op == "-" and ty.is_numeric:
                    return ty
                self.error(f"operator '{op}' cannot be applied to {ty}", expr.loc)
                return None
            case Binary(op=op, lhs=lhs, rhs=rhs):
                lt = self.check_expr(lhs, env)
                rt = self.check_expr(rhs, env)
                if lt is None or rt is None:
                    return None
                if op in ("&&", "||"):
                    if lt is Type.BOOL and rt is Type.BOOL:
                        return Type.BOOL
                    self.error(f"operator '{op}' needs bool operands, got {lt} and {rt}", expr.loc)
                    return None
                if lt is not rt or not lt.is_numeric:
                    self.error(f"operator '{op}' needs two int or two real operands, got {lt} and {rt}",
                               expr.loc)
                    return None
                return lt if op in ("+", "-", "*", "/") else Type.BOOL
            case Index(array=array, index=index):
                at = self.check_expr(array, env)
                it = self.check_expr(index, env)
                if at is None or it is None:
                    return None
                if not at.is_array:
                    self.error(f"cannot index a value of type {at}", expr.loc)
                    return None
                if it is not Type.INT:
                    self.error(f"array index must be int, got {it}", index.loc)
                    return None
                return at.element
            case Call(name=name, args=args):
                arg_types = [self.check_expr(a, env) for a in args]
                if any(t is None for t in arg_types):
                    return None
                return self._check_call(expr, name, arg_types)  # type: ignore[arg-type]
        raise TypeError(f"not an expression: {expr!r}")

    def _check_call(self, expr: Call, name: str, arg_types: list[Type]) -> Optional[Type]:
        if name not in _BUILTIN_RULES:
            self.error(f"unknown function '{name}' (only built-ins can be called in expressions)",
                       expr.loc)
            return None
        if len(arg_types) != 1:
            self.error(f"'{name}' takes exactly one argument", expr.loc)
            return None
        result = _BUILTIN_RULES[name](arg_types[0])
        if result is None:
            self.error(f"'{name}' cannot be applied to {arg_types[0]}", expr.loc)
        return result


_BUILTIN_RULES = {
    "len": lambda t: Type.INT if t.is_array else None,
    "floor": lambda t: Type.REAL if t is Type.REAL else None,
    "int": lambda t: Type.INT if t is Type.REAL else None,
    "real": lambda t: Type.REAL if t is Type.INT else None,
    "sort": lambda t: t if t.is_array else None,
}


def _always_returns(stmt: Stmt) -> bool:
    match stmt:
        case Return():
            return True
        case Block(statements=stmts):
            return any(_always_returns(s) for s in stmts)
        case If(then_block=then_block, else_block=else_block):
            return else_block is not None and _always_returns(then_block) and _always_returns(else_block)
    return False


def type_check(program: Program) -> TypedProgram:
    """Check ``program`` and return it with types and scope indexes.

    Raises:
        TypeCheckError: Carrying every issue found, each with its location.
    """
    checker = _Checker()
    for fn in program.functions:
        checker.check_function(fn)
    if checker.issues:
        raise TypeCheckError(checker.issues)
    typed = TypedProgram(program, scopes=checker.scopes)
    return typed.index()


def check_expression(expr: Expr, env: Mapping[str, Type]) -> Type:
    """Type-check a free-standing expression against a name -> type map.

    Raises:
        TypeCheckError: If the expression is ill-typed.
    """
    checker = _Checker()
    ty = checker.check_expr(expr, env)
    if checker.issues or ty is None:
        raise TypeCheckError(checker.issues or [TypeIssue("ill-typed expression", expr.loc)])
    return ty
