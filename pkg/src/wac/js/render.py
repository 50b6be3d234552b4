"""Render AST nodes back to JavaScript source.

The output is normalized (semicolons, two-space indent, single quotes
avoided in favor of double quotes with escapes).  Re-parsing rendered
output yields a structurally equal tree; that property is what the
renderer is for, besides readable debug output.
"""

from __future__ import annotations

import json
import re

from wac.js.nodes import (
    Assign,
    Binary,
    BoolLit,
    Call,
    ExprStmt,
    FunctionDecl,
    FunctionExpr,
    Identifier,
    If,
    Index,
    Loop,
    Member,
    Node,
    NullLit,
    NumberLit,
    ObjectLit,
    OpaqueExpr,
    OpaqueStmt,
    Program,
    Return,
    StringLit,
    VarDecl,
)

_IDENT_KEY = re.compile(r"^[A-Za-z_$][A-Za-z0-9_$]*$")


def render(node: Node) -> str:
    if isinstance(node, Program):
        return "".join(_stmt(s, 0) for s in node.body)
    if isinstance(
        node,
        (FunctionDecl, VarDecl, Assign, ExprStmt, Return, If, Loop, OpaqueStmt),
    ):
        return _stmt(node, 0).rstrip("\n")
    return _expr(node)


def _indent(level: int) -> str:
    return "  " * level


def _block(body: list[Node], level: int) -> str:
    inner = "".join(_stmt(s, level + 1) for s in body)
    return "{\n" + inner + _indent(level) + "}"


def _stmt(node: Node, level: int) -> str:
    pad = _indent(level)
    if isinstance(node, VarDecl):
        init = f" = {_expr(node.init)}" if node.init is not None else ""
        return f"{pad}{node.kind} {node.name}{init};\n"
    if isinstance(node, Assign):
        return f"{pad}{_expr(node.target)} = {_expr(node.value)};\n"
    if isinstance(node, ExprStmt):
        return f"{pad}{_expr(node.expr)};\n"
    if isinstance(node, Return):
        if node.value is None:
            return f"{pad}return;\n"
        return f"{pad}return {_expr(node.value)};\n"
    if isinstance(node, FunctionDecl):
        params = ", ".join(node.params)
        return f"{pad}function {node.name}({params}) {_block(node.body, level)}\n"
    if isinstance(node, If):
        out = f"{pad}if ({_expr(node.cond)}) {_block(node.then_body, level)}"
        if node.else_body is not None:
            if len(node.else_body) == 1 and isinstance(node.else_body[0], If):
                nested = _stmt(node.else_body[0], level).lstrip()
                out += f" else {nested}"
                return out
            out += f" else {_block(node.else_body, level)}"
        return out + "\n"
    if isinstance(node, Loop):
        if node.opaque_header is not None:
            header = node.opaque_header
            if node.kind == "while":
                return f"{pad}while ({header}) {_block(node.body, level)}\n"
            return f"{pad}for ({header}) {_block(node.body, level)}\n"
        if node.kind == "while":
            cond = _expr(node.cond) if node.cond is not None else "true"
            return f"{pad}while ({cond}) {_block(node.body, level)}\n"
        init = ", ".join(_stmt(s, 0).strip().rstrip(";") for s in node.init)
        cond = _expr(node.cond) if node.cond is not None else ""
        update = ""
        if node.update is not None:
            if isinstance(node.update, (Assign, ExprStmt)):
                update = _stmt(node.update, 0).strip().rstrip(";")
            else:
                update = _expr(node.update)
        return f"{pad}for ({init}; {cond}; {update}) {_block(node.body, level)}\n"
    if isinstance(node, OpaqueStmt):
        text = node.text if node.text.endswith((";", "}")) else node.text + ";"
        return f"{pad}{text}\n"
    return f"{pad}{_expr(node)};\n"


def _expr(node: Node) -> str:
    if isinstance(node, StringLit):
        return json.dumps(node.value)
    if isinstance(node, NumberLit):
        return node.raw
    if isinstance(node, BoolLit):
        return "true" if node.value else "false"
    if isinstance(node, NullLit):
        return "null"
    if isinstance(node, Identifier):
        return node.name
    if isinstance(node, Binary):
        left = _expr(node.left)
        right = _expr(node.right)
        if isinstance(node.right, Binary):
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, Member):
        return f"{_operand(node.obj)}.{node.prop}"
    if isinstance(node, Index):
        return f"{_operand(node.obj)}[{_expr(node.key)}]"
    if isinstance(node, Call):
        args = ", ".join(_expr(a) for a in node.args)
        return f"{_operand(node.callee)}({args})"
    if isinstance(node, ObjectLit):
        entries = []
        for key, value in node.entries:
            key_text = key if _IDENT_KEY.match(key) else json.dumps(key)
            entries.append(f"{key_text}: {_expr(value)}")
        return "{" + ", ".join(entries) + "}"
    if isinstance(node, FunctionExpr):
        params = ", ".join(node.params)
        name = f" {node.name}" if node.name else ""
        return f"function{name}({params}) {_block(node.body, 0)}"
    if isinstance(node, OpaqueExpr):
        return node.text
    raise TypeError(f"not an expression node: {type(node).__name__}")


def _operand(node: Node) -> str:
    """Parenthesize operands that bind looser than member/call access."""
    text = _expr(node)
    if isinstance(node, (Binary, FunctionExpr)):
        return f"({text})"
    return text
