"""Pretty printer for mini-lang.

Output is deterministic and uses the fewest parentheses that still re-parse to
the same tree: binary operators are left-associative, so a right operand at
the same precedence level is parenthesised and a left one is not.
"""

from __future__ import annotations

from .lang import (
    AnyNode, Assign, Binary, Block, Call, Decl, Expr, FunctionDef, If, Index,
    Literal, Program, Return, Stmt, Unary, VarRef, While,
)

INDENT = "    "

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "<": 3, "<=": 3, "==": 3, "!=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}
_UNARY = 6
_ATOM = 7


def _precedence(expr: Expr) -> int:
    match expr:
        case Binary(op=op):
            return _PRECEDENCE[op]
        case Unary():
            return _UNARY
        case Literal(value=value) if value.type.is_numeric and value.data < 0:  # type: ignore[operator]
            return _UNARY
    return _ATOM


def _wrap(expr: Expr, parenthesise: bool) -> str:
    text = print_expression(expr)
    return f"({text})" if parenthesise else text


def print_expression(expr: Expr) -> str:
    match expr:
        case Literal(value=value):
            return value.render()
        case VarRef(name=name):
            return name
        case Unary(op=op, operand=operand):
            inner = _wrap(operand, _precedence(operand) < _UNARY)
            sep = " " if op == "-" and inner.startswith("-") else ""
            return f"{op}{sep}{inner}"
        case Binary(op=op, lhs=lhs, rhs=rhs):
            prec = _PRECEDENCE[op]
            left = _wrap(lhs, _precedence(lhs) < prec)
            right = _wrap(rhs, _precedence(rhs) <= prec)
            return f"{left} {op} {right}"
        case Index(array=array, index=index):
            return f"{_wrap(array, _precedence(array) < _ATOM)}[{print_expression(index)}]"
        case Call(name=name, args=args):
            return f"{name}({', '.join(print_expression(a) for a in args)})"
    raise TypeError(f"not an expression: {expr!r}")


def _block_lines(block: Block, depth: int) -> list[str]:
    lines: list[str] = []
    for stmt in block.statements:
        lines.extend(_statement_lines(stmt, depth))
    return lines


def _statement_lines(stmt: Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    match stmt:
        case Decl(name=name, decl_type=decl_type, init=init):
            return [f"{pad}let {name}: {decl_type} = {print_expression(init)};"]
        case Assign(target=target, index=None, value=value):
            return [f"{pad}{target} = {print_expression(value)};"]
        case Assign(target=target, index=index, value=value):
            return [f"{pad}{target}[{print_expression(index)}] = {print_expression(value)};"]  # type: ignore[arg-type]
        case If(cond=cond, then_block=then_block, else_block=else_block):
            lines = [f"{pad}if ({print_expression(cond)}) {{"]
            lines += _block_lines(then_block, depth + 1)
            if else_block is not None:
                lines.append(f"{pad}}} else {{")
                lines += _block_lines(else_block, depth + 1)
            lines.append(f"{pad}}}")
            return lines
        case While(cond=cond, body=body):
            return [f"{pad}while ({print_expression(cond)}) {{", *_block_lines(body, depth + 1), f"{pad}}}"]
        case Return(value=value):
            return [f"{pad}return {print_expression(value)};"]
        case Block():
            return [f"{pad}{{", *_block_lines(stmt, depth + 1), f"{pad}}}"]
    raise TypeError(f"not a statement: {stmt!r}")


def _function_lines(fn: FunctionDef) -> list[str]:
    params = ", ".join(f"{p.name}: {p.type}" for p in fn.params)
    return [f"fn {fn.name}({params}) -> {fn.return_type} {{", *_block_lines(fn.body, 1), "}"]


def pretty_print(node: AnyNode) -> str:
    """Render an expression, statement, function or whole program as source.

    Expressions render on one line without a trailing newline. Statements and
    functions render as indented lines; a program ends with a newline and
    separates its functions with a blank line.
    """
    if isinstance(node, Expr):
        return print_expression(node)
    if isinstance(node, Stmt):
        return "\n".join(_statement_lines(node, 0))
    if isinstance(node, FunctionDef):
        return "\n".join(_function_lines(node))
    if isinstance(node, Program):
        return "\n\n".join("\n".join(_function_lines(fn)) for fn in node.functions) + "\n"
    raise TypeError(f"cannot print {node!r}")

