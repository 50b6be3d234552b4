"""Interprocedural string-flow analysis over the JavaScript subset.

A forward abstract interpretation computes, for every expression, an
abstract value:

  Str      a set of string patterns (literal and symbolic parts)
  Prim     a single known primitive (number, boolean, null, undefined)
  Obj      an object with per-field abstract values
  Func     a function value with its captured scope
  Unknown  anything else, tagged with a best-effort origin name

Functions are analyzed at call sites with their actual arguments
(cloned per call site) up to a depth bound; at the bound, and for
functions never called anywhere, bodies are analyzed once with
parameters bound to Unknown.  Branches are joined field- and
variable-wise; loops are analyzed with a single body pass joined
against the pre-state.  Re-entering a function already on the call
stack yields a string containing one symbolic part named after it.

Pattern sets are capped (count and per-pattern length); overflow sets
the truncated flag rather than dropping information silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from wac.js import nodes as js

# --- patterns ---


@dataclass(frozen=True)
class Literal:
    """A known run of characters inside a pattern."""

    text: str


@dataclass(frozen=True)
class Symbolic:
    """An unknown substring, named after where it came from."""

    name: str


StringPart = Union[Literal, Symbolic]


def _normalize_parts(parts: Iterable[StringPart]) -> tuple[StringPart, ...]:
    out: list[StringPart] = []
    for part in parts:
        if isinstance(part, Literal):
            if part.text == "":
                continue
            if out and isinstance(out[-1], Literal):
                out[-1] = Literal(out[-1].text + part.text)
                continue
        out.append(part)
    return tuple(out)


@dataclass(frozen=True)
class StringPattern:
    """A concatenation of literal and symbolic parts.

    Adjacent literals are merged and empty literals dropped, so the
    part sequence is canonical.  Renders in brace notation: literal
    text verbatim, symbolic parts as {name}.
    """

    parts: tuple[StringPart, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", _normalize_parts(self.parts))

    def render(self) -> str:
        out = []
        for part in self.parts:
            out.append(part.text if isinstance(part, Literal) else "{" + part.name + "}")
        return "".join(out)

    def is_literal(self) -> bool:
        return all(isinstance(p, Literal) for p in self.parts)

    def literal_text(self) -> str:
        if not self.is_literal():
            raise ValueError("pattern has symbolic parts")
        return "".join(p.text for p in self.parts)

    def sort_key(self) -> tuple:
        return tuple(
            (0, p.text) if isinstance(p, Literal) else (1, p.name) for p in self.parts
        )


def literal_pattern(text: str) -> StringPattern:
    return StringPattern((Literal(text),) if text else ())


def symbolic_pattern(name: str) -> StringPattern:
    return StringPattern((Symbolic(name),))


@dataclass(frozen=True)
class PatternSet:
    """A set of patterns, with a flag recording dropped alternatives."""

    patterns: frozenset[StringPattern] = frozenset()
    truncated: bool = False

    @staticmethod
    def of(*patterns: StringPattern, truncated: bool = False) -> "PatternSet":
        return PatternSet(frozenset(patterns), truncated)

    def sorted_patterns(self) -> list[StringPattern]:
        return sorted(self.patterns, key=StringPattern.sort_key)

    def single(self) -> Optional[StringPattern]:
        """The only pattern, if this set is exact and has exactly one."""
        if self.truncated or len(self.patterns) != 1:
            return None
        return next(iter(self.patterns))


@dataclass(frozen=True)
class AnalysisConfig:
    max_patterns: int = 16
    max_call_depth: int = 3
    max_pattern_parts: int = 64


DEFAULT_CONFIG = AnalysisConfig()


def _cap(patterns: set[StringPattern], truncated: bool, config: AnalysisConfig) -> PatternSet:
    if len(patterns) > config.max_patterns:
        kept = sorted(patterns, key=StringPattern.sort_key)[: config.max_patterns]
        return PatternSet(frozenset(kept), True)
    return PatternSet(frozenset(patterns), truncated)


def join_pattern_sets(
    a: PatternSet, b: PatternSet, config: AnalysisConfig = DEFAULT_CONFIG
) -> PatternSet:
    return _cap(set(a.patterns) | set(b.patterns), a.truncated or b.truncated, config)


def concat(
    a: PatternSet, b: PatternSet, config: AnalysisConfig = DEFAULT_CONFIG
) -> PatternSet:
    """Pairwise concatenation of two pattern sets."""
    out: set[StringPattern] = set()
    truncated = a.truncated or b.truncated
    for pa in a.sorted_patterns():
        for pb in b.sorted_patterns():
            parts = pa.parts + pb.parts
            pattern = StringPattern(parts)
            if len(pattern.parts) > config.max_pattern_parts:
                truncated = True
                continue
            out.add(pattern)
    return _cap(out, truncated, config)


# --- abstract values ---


@dataclass(frozen=True)
class Str:
    patterns: PatternSet


@dataclass(frozen=True)
class Prim:
    """A known primitive: text is its string rendering, number its
    numeric value under '+', or None when that value is NaN."""

    text: str
    number: Optional[float] = None


@dataclass(frozen=True)
class PrimSet:
    """Two or more alternative known primitives.

    Joins of distinct primitives stay in this form instead of decaying
    to string patterns, so a later numeric '+' can still add them.
    """

    alts: frozenset[Prim]


@dataclass
class Obj:
    """An object with known fields.  Treated immutably: field writes
    build a new Obj (no alias tracking)."""

    fields: dict[str, "AbstractValue"]

    def with_field(self, name: str, value: "AbstractValue") -> "Obj":
        updated = dict(self.fields)
        updated[name] = value
        return Obj(updated)


@dataclass
class Func:
    node: js.Node  # FunctionDecl | FunctionExpr
    scope: "Scope"
    name: str


@dataclass(frozen=True)
class Unknown:
    origin: str = "unknown"


AbstractValue = Union[Str, Prim, PrimSet, Obj, Func, Unknown]

UNDEFINED = Prim("undefined", None)
NAN = Prim("NaN", None)


def canonical_number(value: float) -> str:
    """The string a number renders as in concatenation."""
    if value != value:  # NaN
        return "NaN"
    if value in (float("inf"), float("-inf")):
        return "Infinity" if value > 0 else "-Infinity"
    if value == int(value) and abs(value) < 1e21:
        return str(int(value))
    return repr(value)


def prim_alternatives(value: Union[Prim, "PrimSet"]) -> tuple[Prim, ...]:
    if isinstance(value, Prim):
        return (value,)
    return tuple(sorted(value.alts, key=lambda p: (p.text, p.number is None, p.number or 0.0)))


def join_prims(
    prims: Iterable[Prim], config: AnalysisConfig, hint: str
) -> AbstractValue:
    """The joined value of known primitives: one Prim, a PrimSet, or
    Unknown past the alternative cap."""
    alts = frozenset(prims)
    if not alts:
        return Unknown(hint)
    if len(alts) == 1:
        return next(iter(alts))
    if len(alts) > config.max_patterns:
        return Unknown(hint)
    return PrimSet(alts)


def add_prims(a: Prim, b: Prim) -> Prim:
    """'+' over two non-string primitives, which is always numeric."""
    if a.number is None or b.number is None:
        return NAN
    total = a.number + b.number
    if total != total:
        return NAN
    return Prim(canonical_number(total), total)


def to_pattern_set(value: AbstractValue, fallback_name: str) -> PatternSet:
    """View any abstract value as string patterns (for '+' operands)."""
    if isinstance(value, Str):
        return value.patterns
    if isinstance(value, Prim):
        return PatternSet.of(literal_pattern(value.text))
    if isinstance(value, PrimSet):
        return PatternSet.of(*(literal_pattern(p.text) for p in value.alts))
    if isinstance(value, Unknown):
        return PatternSet.of(symbolic_pattern(value.origin or fallback_name))
    return PatternSet.of(symbolic_pattern(fallback_name))


def join_values(
    a: AbstractValue,
    b: AbstractValue,
    config: AnalysisConfig = DEFAULT_CONFIG,
    hint: str = "joined",
) -> AbstractValue:
    if a is b:
        return a
    if isinstance(a, Str) and isinstance(b, Str):
        return Str(join_pattern_sets(a.patterns, b.patterns, config))
    if isinstance(a, (Prim, PrimSet)) and isinstance(b, (Prim, PrimSet)):
        # Distinct primitives stay primitives; a string form here would
        # lose the numeric reading a later '+' may need.
        return join_prims(
            prim_alternatives(a) + prim_alternatives(b), config, hint
        )
    if isinstance(a, Obj) and isinstance(b, Obj):
        merged: dict[str, AbstractValue] = {}
        for key in sorted(set(a.fields) | set(b.fields)):
            if key in a.fields and key in b.fields:
                merged[key] = join_values(a.fields[key], b.fields[key], config, key)
            else:
                merged[key] = Unknown(key)
        return Obj(merged)
    if isinstance(a, Func) and isinstance(b, Func) and a.node is b.node:
        return a
    return Unknown(hint)


# --- scopes ---


class Scope:
    __slots__ = ("vars", "parent")

    def __init__(self, parent: Optional["Scope"] = None):
        self.vars: dict[str, AbstractValue] = {}
        self.parent = parent

    def lookup(self, name: str) -> Optional[AbstractValue]:
        scope: Optional[Scope] = self
        while scope is not None:
            if name in scope.vars:
                return scope.vars[name]
            scope = scope.parent
        return None

    def declare(self, name: str, value: AbstractValue) -> None:
        self.vars[name] = value

    def assign(self, name: str, value: AbstractValue) -> None:
        scope: Optional[Scope] = self
        last = self
        while scope is not None:
            if name in scope.vars:
                scope.vars[name] = value
                return
            last = scope
            scope = scope.parent
        # Assignment to an undeclared name lands in the outermost scope.
        last.vars[name] = value


# --- results ---


class FlowResult:
    """Abstract values per expression node, joined over all the
    contexts the analysis visited, plus the final top-level scope."""

    def __init__(self, config: AnalysisConfig):
        self._config = config
        self._values: dict[js.Node, AbstractValue] = {}
        self.top_env: dict[str, AbstractValue] = {}

    def record(self, node: js.Node, value: AbstractValue) -> None:
        existing = self._values.get(node)
        if existing is None:
            self._values[node] = value
        else:
            self._values[node] = join_values(existing, value, self._config)

    def value_of(self, node: js.Node) -> Optional[AbstractValue]:
        return self._values.get(node)


# --- the analyzer ---


class _Analyzer:
    def __init__(self, config: AnalysisConfig):
        self.config = config
        self.result = FlowResult(config)
        self.global_scope = Scope()
        self.scopes: list[Scope] = [self.global_scope]
        self.depth = 0
        self.active: set[int] = set()  # ids of function nodes being analyzed
        self.analyzed_bodies: set[int] = set()
        self.symbolic_memo: dict[int, AbstractValue] = {}
        self.symbolic_in_progress: set[int] = set()
        self.returns_stack: list[list[AbstractValue]] = []
        self._expr_names: dict[int, str] = {}
        self._expr_counter = 0

    def new_scope(self, parent: Scope) -> Scope:
        scope = Scope(parent)
        self.scopes.append(scope)
        return scope

    # naming

    def name_for(self, node: js.Node) -> str:
        if isinstance(node, js.Identifier):
            return node.name
        if isinstance(node, js.Member):
            return f"{self.name_for(node.obj)}.{node.prop}"
        key = id(node)
        if key not in self._expr_names:
            self._expr_counter += 1
            self._expr_names[key] = f"expr{self._expr_counter}"
        return self._expr_names[key]

    # snapshots for branch joins

    def snapshot(self) -> dict[int, tuple[Scope, dict[str, AbstractValue]]]:
        return {id(s): (s, dict(s.vars)) for s in self.scopes}

    def restore(self, snap: dict[int, tuple[Scope, dict[str, AbstractValue]]]) -> None:
        for scope, saved in snap.values():
            scope.vars = dict(saved)

    def merge_snapshots(
        self,
        a: dict[int, tuple[Scope, dict[str, AbstractValue]]],
        b: dict[int, tuple[Scope, dict[str, AbstractValue]]],
    ) -> None:
        for key in set(a) | set(b):
            if key in a and key in b:
                scope = a[key][0]
                scope.vars = self._join_var_dicts(a[key][1], b[key][1])
            else:
                scope, saved = a.get(key) or b.get(key)
                scope.vars = dict(saved)

    def _join_var_dicts(
        self, d1: dict[str, AbstractValue], d2: dict[str, AbstractValue]
    ) -> dict[str, AbstractValue]:
        out: dict[str, AbstractValue] = {}
        for name in set(d1) | set(d2):
            if name in d1 and name in d2:
                v1, v2 = d1[name], d2[name]
                out[name] = v1 if v1 is v2 else join_values(v1, v2, self.config, name)
            else:
                out[name] = Unknown(name)
        return out

    # statements

    def run_body(self, body: list[js.Node], scope: Scope) -> AbstractValue:
        """Analyze a function body; the result joins its returns."""
        self.returns_stack.append([])
        self.hoist(body, scope)
        self.exec_statements(body, scope)
        returned = self.returns_stack.pop()
        if not returned:
            return UNDEFINED
        result = returned[0]
        for value in returned[1:]:
            result = join_values(result, value, self.config, "return")
        return result

    def hoist(self, body: list[js.Node], scope: Scope) -> None:
        for stmt in body:
            if isinstance(stmt, js.FunctionDecl):
                scope.declare(stmt.name, Func(stmt, scope, stmt.name))

    def exec_statements(self, body: list[js.Node], scope: Scope) -> None:
        for stmt in body:
            self.exec_statement(stmt, scope)

    def exec_statement(self, stmt: js.Node, scope: Scope) -> None:
        if isinstance(stmt, js.VarDecl):
            value = self.eval(stmt.init, scope) if stmt.init is not None else UNDEFINED
            scope.declare(stmt.name, value)
        elif isinstance(stmt, js.FunctionDecl):
            pass  # hoisted
        elif isinstance(stmt, js.Assign):
            self.exec_assign(stmt, scope)
        elif isinstance(stmt, js.ExprStmt):
            self.eval(stmt.expr, scope)
        elif isinstance(stmt, js.Return):
            value = self.eval(stmt.value, scope) if stmt.value is not None else UNDEFINED
            if self.returns_stack:
                self.returns_stack[-1].append(value)
        elif isinstance(stmt, js.If):
            self.exec_if(stmt, scope)
        elif isinstance(stmt, js.Loop):
            self.exec_loop(stmt, scope)
        elif isinstance(stmt, js.OpaqueStmt):
            for name in stmt.assigned_names:
                scope.assign(name, Unknown(name))
        else:  # a bare expression spliced in, defensively
            if isinstance(stmt, js.Node):
                self.eval(stmt, scope)

    def exec_assign(self, stmt: js.Assign, scope: Scope) -> None:
        value = self.eval(stmt.value, scope)
        target = stmt.target
        if isinstance(target, js.Identifier):
            scope.assign(target.name, value)
            return
        # Field writes: rebuild the object along an identifier-rooted
        # member path; anything less tractable havocs the root.
        path: list[str] = []
        node = target
        while True:
            if isinstance(node, js.Member):
                path.append(node.prop)
                node = node.obj
            elif isinstance(node, js.Index):
                key = self.eval(node.key, scope)
                if isinstance(key, Prim):
                    path.append(key.text)
                elif isinstance(key, Str) and (pat := key.patterns.single()) is not None and pat.is_literal():
                    path.append(pat.literal_text())
                else:
                    path.append("")  # unresolvable key
                node = node.obj
            else:
                break
        if not isinstance(node, js.Identifier):
            return
        root_name = node.name
        if "" in path:
            scope.assign(root_name, Unknown(root_name))
            return
        path.reverse()
        root = scope.lookup(root_name)
        updated = self._set_path(root, path, value)
        if updated is None:
            scope.assign(root_name, Unknown(root_name))
        else:
            scope.assign(root_name, updated)

    def _set_path(
        self, container: Optional[AbstractValue], path: list[str], value: AbstractValue
    ) -> Optional[AbstractValue]:
        if not isinstance(container, Obj):
            return None
        if len(path) == 1:
            return container.with_field(path[0], value)
        inner = self._set_path(container.fields.get(path[0]), path[1:], value)
        if inner is None:
            return None
        return container.with_field(path[0], inner)

    def exec_if(self, stmt: js.If, scope: Scope) -> None:
        self.eval(stmt.cond, scope)
        pre = self.snapshot()
        self.exec_statements_hoisted(stmt.then_body, scope)
        post_then = self.snapshot()
        self.restore(pre)
        if stmt.else_body is not None:
            self.exec_statements_hoisted(stmt.else_body, scope)
        post_else = self.snapshot()
        self.merge_snapshots(post_then, post_else)

    def exec_statements_hoisted(self, body: list[js.Node], scope: Scope) -> None:
        self.hoist(body, scope)
        self.exec_statements(body, scope)

    def exec_loop(self, stmt: js.Loop, scope: Scope) -> None:
        for init in stmt.init:
            self.exec_statement(init, scope)
        for name in stmt.header_assigned_names:
            scope.assign(name, Unknown(name))
        if stmt.cond is not None:
            self.eval(stmt.cond, scope)
        pre = self.snapshot()
        self.exec_statements_hoisted(stmt.body, scope)
        if stmt.update is not None:
            if isinstance(stmt.update, (js.Assign, js.ExprStmt)):
                self.exec_statement(stmt.update, scope)
            else:
                self.eval(stmt.update, scope)
        post = self.snapshot()
        self.merge_snapshots(pre, post)

    # expressions

    def eval(self, node: js.Node, scope: Scope) -> AbstractValue:
        value = self._eval(node, scope)
        self.result.record(node, value)
        return value

    def _eval(self, node: js.Node, scope: Scope) -> AbstractValue:
        if isinstance(node, js.StringLit):
            return Str(PatternSet.of(literal_pattern(node.value)))
        if isinstance(node, js.NumberLit):
            return Prim(canonical_number(node.value), node.value)
        if isinstance(node, js.BoolLit):
            return Prim("true", 1.0) if node.value else Prim("false", 0.0)
        if isinstance(node, js.NullLit):
            return Prim("null", 0.0)
        if isinstance(node, js.Identifier):
            found = scope.lookup(node.name)
            return found if found is not None else Unknown(node.name)
        if isinstance(node, js.Binary):
            return self.eval_binary(node, scope)
        if isinstance(node, js.Member):
            return self.eval_member(node, scope)
        if isinstance(node, js.Index):
            return self.eval_index(node, scope)
        if isinstance(node, js.ObjectLit):
            return Obj({k: self.eval(v, scope) for k, v in node.entries})
        if isinstance(node, js.Call):
            return self.eval_call(node, scope)
        if isinstance(node, js.FunctionExpr):
            return Func(node, scope, node.name or "anonymous")
        if isinstance(node, js.OpaqueExpr):
            for name in node.assigned_names:
                scope.assign(name, Unknown(name))
            return Unknown(self.name_for(node))
        return Unknown(self.name_for(node))

    def eval_binary(self, node: js.Binary, scope: Scope) -> AbstractValue:
        left = self.eval(node.left, scope)
        right = self.eval(node.right, scope)
        if node.op != "+":
            return Unknown(self.name_for(node))
        if isinstance(left, (Prim, PrimSet)) and isinstance(right, (Prim, PrimSet)):
            return join_prims(
                (
                    add_prims(a, b)
                    for a in prim_alternatives(left)
                    for b in prim_alternatives(right)
                ),
                self.config,
                self.name_for(node),
            )
        if isinstance(left, Unknown) and isinstance(right, (Prim, PrimSet)):
            # The unknown side may be numeric, so the result could be a
            # sum; a concatenation pattern would miss it.
            return Unknown(self.name_for(node))
        if isinstance(right, Unknown) and isinstance(left, (Prim, PrimSet)):
            return Unknown(self.name_for(node))
        patterns = concat(
            to_pattern_set(left, self.name_for(node.left)),
            to_pattern_set(right, self.name_for(node.right)),
            self.config,
        )
        return Str(patterns)

    def eval_member(self, node: js.Member, scope: Scope) -> AbstractValue:
        obj = self.eval(node.obj, scope)
        if isinstance(obj, Obj):
            if node.prop in obj.fields:
                return obj.fields[node.prop]
            return UNDEFINED
        return Unknown(self.name_for(node))

    def eval_index(self, node: js.Index, scope: Scope) -> AbstractValue:
        obj = self.eval(node.obj, scope)
        key = self.eval(node.key, scope)
        prop: Optional[str] = None
        if isinstance(key, Prim):
            prop = key.text
        elif isinstance(key, Str):
            single = key.patterns.single()
            if single is not None and single.is_literal():
                prop = single.literal_text()
        if isinstance(obj, Obj) and prop is not None:
            if prop in obj.fields:
                return obj.fields[prop]
            return UNDEFINED
        return Unknown(self.name_for(node))

    def eval_call(self, node: js.Call, scope: Scope) -> AbstractValue:
        callee = self.eval(node.callee, scope)
        args = [self.eval(a, scope) for a in node.args]
        if isinstance(callee, Func):
            return self.bind_call(callee, args)
        return Unknown(self.name_for(node.callee))

    def bind_call(self, func: Func, args: list[AbstractValue]) -> AbstractValue:
        node = func.node
        if id(node) in self.active or id(node) in self.symbolic_in_progress:
            # Recursion: the result is one symbolic stand-in.
            return Str(PatternSet.of(symbolic_pattern(func.name)))
        if self.depth >= self.config.max_call_depth:
            return self.symbolic_result(func)
        call_scope = self.new_scope(func.scope)
        params: list[str] = node.params
        for i, pname in enumerate(params):
            call_scope.declare(pname, args[i] if i < len(args) else Unknown(pname))
        self.active.add(id(node))
        self.depth += 1
        try:
            result = self.run_body(node.body, call_scope)
        finally:
            self.depth -= 1
            self.active.discard(id(node))
        self.analyzed_bodies.add(id(node))
        return result

    def symbolic_result(self, func: Func) -> AbstractValue:
        """Analyze a function once with Unknown parameters; memoized."""
        node = func.node
        if id(node) in self.symbolic_memo:
            return self.symbolic_memo[id(node)]
        if id(node) in self.symbolic_in_progress or id(node) in self.active:
            return Str(PatternSet.of(symbolic_pattern(func.name)))
        call_scope = self.new_scope(func.scope)
        for pname in node.params:
            call_scope.declare(pname, Unknown(pname))
        self.symbolic_in_progress.add(id(node))
        saved_depth = self.depth
        self.depth = self.config.max_call_depth
        try:
            result = self.run_body(node.body, call_scope)
        finally:
            self.depth = saved_depth
            self.symbolic_in_progress.discard(id(node))
        self.symbolic_memo[id(node)] = result
        self.analyzed_bodies.add(id(node))
        return result

    def entry_analysis(self, func: Func) -> None:
        """Analyze a never-called function with Unknown parameters but
        full-depth call binding, so its own calls stay precise."""
        node = func.node
        call_scope = self.new_scope(func.scope)
        for pname in node.params:
            call_scope.declare(pname, Unknown(pname))
        self.active.add(id(node))
        try:
            self.run_body(node.body, call_scope)
        finally:
            self.active.discard(id(node))
        self.analyzed_bodies.add(id(node))


def analyze_program(
    program: js.Program,
    config: AnalysisConfig = DEFAULT_CONFIG,
    extra_functions: Iterable[js.FunctionDecl] = (),
) -> FlowResult:
    """Analyze a program; extra_functions seeds top-level declarations
    from sibling files so cross-file calls bind real bodies."""
    analyzer = _Analyzer(config)
    top = analyzer.global_scope
    for decl in extra_functions:
        top.declare(decl.name, Func(decl, top, decl.name))
    analyzer.hoist(program.body, top)
    analyzer.exec_statements(program.body, top)

    # Every function body gets analyzed at least once: repeat over the
    # program in source order, entering functions no call reached.
    while True:
        pending = [
            n
            for n in js.walk(program)
            if isinstance(n, (js.FunctionDecl, js.FunctionExpr))
            and id(n) not in analyzer.analyzed_bodies
        ]
        if not pending:
            break
        node = pending[0]
        name = getattr(node, "name", None) or "anonymous"
        analyzer.entry_analysis(Func(node, top, name))

    analyzer.result.top_env = dict(top.vars)
    return analyzer.result
