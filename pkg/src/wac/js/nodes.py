"""AST node types for the JavaScript subset.

Nodes compare by identity (the flow analysis keys results on node
objects); use structurally_equal for shape comparison in tests.  Every
node carries the 1-based source span it was parsed from; end columns
are exclusive.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, Optional


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


@dataclass(eq=False)
class Node:
    span: SourceSpan = field(repr=False, kw_only=True)


# --- Expressions ---


@dataclass(eq=False)
class StringLit(Node):
    value: str


@dataclass(eq=False)
class NumberLit(Node):
    raw: str
    value: float


@dataclass(eq=False)
class BoolLit(Node):
    value: bool


@dataclass(eq=False)
class NullLit(Node):
    pass


@dataclass(eq=False)
class Identifier(Node):
    name: str


@dataclass(eq=False)
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass(eq=False)
class Member(Node):
    obj: Node
    prop: str


@dataclass(eq=False)
class Index(Node):
    obj: Node
    key: Node


@dataclass(eq=False)
class ObjectLit(Node):
    # Entries keep source order; the parser rejects duplicate keys.
    entries: list[tuple[str, Node]]


@dataclass(eq=False)
class Call(Node):
    callee: Node
    args: list[Node]


@dataclass(eq=False)
class FunctionExpr(Node):
    name: Optional[str]
    params: list[str]
    body: list[Node]


@dataclass(eq=False)
class OpaqueExpr(Node):
    """Source the parser skipped over; the analysis treats it as unknown."""

    text: str
    assigned_names: tuple[str, ...] = ()


# --- Statements ---


@dataclass(eq=False)
class Program(Node):
    body: list[Node]


@dataclass(eq=False)
class FunctionDecl(Node):
    name: str
    params: list[str]
    body: list[Node]


@dataclass(eq=False)
class VarDecl(Node):
    name: str
    init: Optional[Node]
    kind: str = "var"


@dataclass(eq=False)
class Assign(Node):
    target: Node
    value: Node


@dataclass(eq=False)
class ExprStmt(Node):
    expr: Node


@dataclass(eq=False)
class Return(Node):
    value: Optional[Node]


@dataclass(eq=False)
class If(Node):
    cond: Node
    then_body: list[Node]
    else_body: Optional[list[Node]]


@dataclass(eq=False)
class Loop(Node):
    """A while or classic for loop.

    An unparseable header leaves init/cond/update as None and records
    the header text plus the names it may assign.
    """

    kind: str  # "while" | "for"
    body: list[Node]
    init: list[Node] = field(default_factory=list)
    cond: Optional[Node] = None
    update: Optional[Node] = None
    opaque_header: Optional[str] = None
    header_assigned_names: tuple[str, ...] = ()


@dataclass(eq=False)
class OpaqueStmt(Node):
    """A statement the parser skipped; assigned_names are havocked."""

    text: str
    assigned_names: tuple[str, ...] = ()


def _child_nodes(value: object) -> Iterator[Node]:
    if isinstance(value, Node):
        yield value
    elif isinstance(value, list):
        for item in value:
            yield from _child_nodes(item)
    elif isinstance(value, tuple):
        for item in value:
            yield from _child_nodes(item)


def children(node: Node) -> Iterator[Node]:
    for f in dataclasses.fields(node):
        if f.name == "span":
            continue
        yield from _child_nodes(getattr(node, f.name))


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal in source order."""
    yield node
    for child in children(node):
        yield from walk(child)


def structurally_equal(a: Node, b: Node) -> bool:
    """Shape equality ignoring spans."""
    if type(a) is not type(b):
        return False
    for f in dataclasses.fields(a):
        if f.name == "span":
            continue
        if not _values_equal(getattr(a, f.name), getattr(b, f.name)):
            return False
    return True


def _values_equal(x: object, y: object) -> bool:
    if isinstance(x, Node) or isinstance(y, Node):
        return isinstance(x, Node) and isinstance(y, Node) and structurally_equal(x, y)
    if isinstance(x, (list, tuple)) and isinstance(y, (list, tuple)):
        return len(x) == len(y) and all(
            _values_equal(a, b) for a, b in zip(x, y)
        )
    return x == y
