"""Recursive-descent parser for the JavaScript subset.

The parser is total: source it cannot interpret becomes OpaqueStmt or
OpaqueExpr nodes (with the names such regions may assign recorded for
havocking), and each problem is reported as a ParseDiagnostic.  Only
the constructs in the subset grammar produce structured nodes:

  statements   var/let/const, assignment (including compound forms,
               desugared to '+' etc.), expression statements, function
               declarations, return, if/else, while and classic for
  expressions  string/number/boolean/null literals, identifiers,
               '+' concatenation, member/index access, object literals,
               calls, function expressions, template literals
               (normalized to '+' chains), parenthesized groups

Semicolons are optional at line ends (a small ASI rule).  Template
literals never appear in the tree: their chunks and holes are folded
left into Binary('+') chains, with a leading empty string literal when
the template starts with a hole so the chain stays a string.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from wac.js.lexer import (
    TemplateChunk,
    TemplateHole,
    Token,
    TokenKind,
    lex_tolerant,
)
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
    SourceSpan,
    StringLit,
    VarDecl,
)

_ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^="})
_MUTATING_OPS = _ASSIGN_OPS | {"++", "--", "<<=", ">>=", ">>>=", "**="}
_STMT_KEYWORDS = frozenset(
    {"var", "let", "const", "function", "return", "if", "while", "for"}
)


@dataclass(frozen=True)
class ParseDiagnostic:
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


@dataclass
class ParseResult:
    program: Program
    errors: list[ParseDiagnostic] = field(default_factory=list)


class _Bail(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.message = message
        self.span = span


def _scan_assigned_names(tokens: list[Token]) -> tuple[str, ...]:
    """Names a token region may write to, for havocking opaque code."""
    names: list[str] = []
    for i, tok in enumerate(tokens):
        nxt = tokens[i + 1] if i + 1 < len(tokens) else None
        if (
            tok.kind is TokenKind.KEYWORD
            and tok.text in ("var", "let", "const")
            and nxt is not None
            and nxt.kind is TokenKind.IDENT
        ):
            names.append(nxt.text)
        elif tok.kind is TokenKind.IDENT and nxt is not None:
            if nxt.kind is TokenKind.OP and nxt.text in _MUTATING_OPS:
                names.append(tok.text)
        elif (
            tok.kind is TokenKind.OP
            and tok.text in ("++", "--")
            and nxt is not None
            and nxt.kind is TokenKind.IDENT
        ):
            names.append(nxt.text)
    seen: set[str] = set()
    out: list[str] = []
    for n in names:
        if n not in seen:
            seen.add(n)
            out.append(n)
    return tuple(out)


class _Parser:
    def __init__(self, source: str, file: str, tokens: list[Token]):
        self.source = source
        self.file = file
        self.tokens = tokens
        self.pos = 0
        self.errors: list[ParseDiagnostic] = []

    # --- token helpers ---

    def cur(self) -> Token:
        return self.tokens[self.pos]

    def prev(self) -> Token:
        return self.tokens[max(self.pos - 1, 0)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def at(self, kind: TokenKind, text: str | None = None) -> bool:
        tok = self.cur()
        return tok.kind is kind and (text is None or tok.text == text)

    def at_punct(self, text: str) -> bool:
        return self.at(TokenKind.PUNCT, text)

    def at_keyword(self, text: str) -> bool:
        return self.at(TokenKind.KEYWORD, text)

    def expect_punct(self, text: str) -> Token:
        if not self.at_punct(text):
            tok = self.cur()
            raise _Bail(f"expected '{text}', found {self._describe(tok)}", tok.span)
        return self.advance()

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind is TokenKind.EOF:
            return "end of input"
        return repr(tok.text)

    def _span(self, start_idx: int) -> SourceSpan:
        start = self.tokens[start_idx].span
        end = self.prev().span if self.pos > start_idx else start
        return SourceSpan(
            self.file, start.start_line, start.start_col, end.end_line, end.end_col
        )

    def _text(self, start_idx: int) -> str:
        start = self.tokens[start_idx]
        end = self.prev() if self.pos > start_idx else start
        return self.source[start.offset : end.offset + len(end.text)].strip()

    def _newline_before_cur(self) -> bool:
        if self.pos == 0:
            return True
        return self.cur().span.start_line > self.prev().span.end_line

    # --- programs and statement lists ---

    def parse_program(self) -> Program:
        start = self.pos
        body = self.statement_list(stop_on_rbrace=False)
        return Program(body, span=self._span(start))

    def statement_list(self, stop_on_rbrace: bool) -> list[Node]:
        out: list[Node] = []
        while True:
            if self.at(TokenKind.EOF):
                return out
            if self.at_punct("}"):
                if stop_on_rbrace:
                    return out
                self.errors.append(
                    ParseDiagnostic("unexpected '}'", self.cur().span)
                )
                self.advance()
                continue
            start = self.pos
            try:
                out.extend(self.statement())
            except _Bail as bail:
                self.errors.append(ParseDiagnostic(bail.message, bail.span))
                out.append(self._recover_statement(start))

    def _recover_statement(self, start: int) -> OpaqueStmt:
        if self.pos == start:
            self.advance()
        # Brackets consumed before the failure may be unbalanced.
        depth = 0
        for tok in self.tokens[start : self.pos]:
            if tok.kind is TokenKind.PUNCT:
                if tok.text in "([{":
                    depth += 1
                elif tok.text in ")]}":
                    depth -= 1
        depth = max(depth, 0)
        while not self.at(TokenKind.EOF):
            tok = self.cur()
            if tok.kind is TokenKind.PUNCT:
                if tok.text in "([{":
                    depth += 1
                elif tok.text == ";" and depth == 0:
                    self.advance()
                    break
                elif tok.text in ")]}":
                    if depth == 0:
                        break
                    depth -= 1
            self.advance()
        tokens = self.tokens[start : self.pos]
        return OpaqueStmt(
            self._text(start), _scan_assigned_names(tokens), span=self._span(start)
        )

    def block_or_statement(self) -> list[Node]:
        if self.at_punct("{"):
            self.advance()
            body = self.statement_list(stop_on_rbrace=True)
            self.expect_punct("}")
            return body
        start = self.pos
        try:
            return self.statement()
        except _Bail as bail:
            self.errors.append(ParseDiagnostic(bail.message, bail.span))
            return [self._recover_statement(start)]

    # --- statements ---

    def statement(self) -> list[Node]:
        tok = self.cur()
        if tok.kind is TokenKind.KEYWORD:
            if tok.text in ("var", "let", "const"):
                return self.var_statement()
            if tok.text == "function":
                return [self.function_declaration()]
            if tok.text == "return":
                return [self.return_statement()]
            if tok.text == "if":
                return [self.if_statement()]
            if tok.text == "while":
                return [self.while_statement()]
            if tok.text == "for":
                return [self.for_statement()]
            if tok.text == "else":
                raise _Bail("'else' without matching 'if'", tok.span)
        if tok.kind is TokenKind.PUNCT and tok.text == ";":
            self.advance()
            return []
        if tok.kind is TokenKind.PUNCT and tok.text == "{":
            # A bare block: splice its statements into the enclosing list.
            self.advance()
            body = self.statement_list(stop_on_rbrace=True)
            self.expect_punct("}")
            return body
        return [self.expression_statement()]

    def var_statement(self) -> list[Node]:
        kind = self.advance().text
        decls: list[Node] = []
        while True:
            start = self.pos
            if not self.at(TokenKind.IDENT):
                tok = self.cur()
                raise _Bail(
                    f"expected variable name, found {self._describe(tok)}", tok.span
                )
            name = self.advance().text
            init: Node | None = None
            if self.at(TokenKind.OP, "="):
                self.advance()
                init = self.expression()
            decls.append(VarDecl(name, init, kind, span=self._span(start)))
            if self.at_punct(","):
                self.advance()
                continue
            break
        self.terminate()
        return decls

    def function_declaration(self) -> Node:
        start = self.pos
        self.advance()  # function
        if not self.at(TokenKind.IDENT):
            tok = self.cur()
            raise _Bail(
                f"expected function name, found {self._describe(tok)}", tok.span
            )
        name = self.advance().text
        params = self.parameter_list()
        body = self.function_body()
        return FunctionDecl(name, params, body, span=self._span(start))

    def parameter_list(self) -> list[str]:
        self.expect_punct("(")
        params: list[str] = []
        while not self.at_punct(")"):
            if self.at(TokenKind.EOF):
                raise _Bail("unterminated parameter list", self.cur().span)
            if not self.at(TokenKind.IDENT):
                tok = self.cur()
                raise _Bail(
                    f"expected parameter name, found {self._describe(tok)}", tok.span
                )
            params.append(self.advance().text)
            if self.at(TokenKind.OP, "="):
                # Default value: keep the name, skip the initializer.
                self.advance()
                self._skip_balanced_until({",", ")"})
            if self.at_punct(","):
                self.advance()
        self.expect_punct(")")
        return params

    def function_body(self) -> list[Node]:
        self.expect_punct("{")
        body = self.statement_list(stop_on_rbrace=True)
        self.expect_punct("}")
        return body

    def return_statement(self) -> Node:
        start = self.pos
        self.advance()
        value: Node | None = None
        if (
            not self.at_punct(";")
            and not self.at_punct("}")
            and not self.at(TokenKind.EOF)
            and not self._newline_before_cur()
        ):
            value = self.expression()
        self.terminate()
        return Return(value, span=self._span(start))

    def if_statement(self) -> Node:
        start = self.pos
        self.advance()
        self.expect_punct("(")
        cond = self.expression()
        self.expect_punct(")")
        then_body = self.block_or_statement()
        else_body: list[Node] | None = None
        if self.at_keyword("else"):
            self.advance()
            if self.at_keyword("if"):
                else_body = [self.if_statement()]
            else:
                else_body = self.block_or_statement()
        return If(cond, then_body, else_body, span=self._span(start))

    def while_statement(self) -> Node:
        start = self.pos
        self.advance()
        header_start = self.pos
        self.expect_punct("(")
        try:
            cond = self.expression()
            self.expect_punct(")")
            opaque, havoc = None, ()
        except _Bail as bail:
            self.errors.append(ParseDiagnostic(bail.message, bail.span))
            cond = None
            opaque, havoc = self._recover_header(header_start)
        body = self.block_or_statement()
        return Loop(
            "while",
            body,
            cond=cond,
            opaque_header=opaque,
            header_assigned_names=havoc,
            span=self._span(start),
        )

    def for_statement(self) -> Node:
        start = self.pos
        self.advance()
        header_start = self.pos
        init: list[Node] = []
        cond: Node | None = None
        update: Node | None = None
        opaque: str | None = None
        havoc: tuple[str, ...] = ()
        self.expect_punct("(")
        try:
            if self.at_punct(";"):
                self.advance()
            elif self.at_keyword("var") or self.at_keyword("let") or self.at_keyword(
                "const"
            ):
                kind = self.advance().text
                while True:
                    dstart = self.pos
                    if not self.at(TokenKind.IDENT):
                        tok = self.cur()
                        raise _Bail(
                            f"expected variable name, found {self._describe(tok)}",
                            tok.span,
                        )
                    name = self.advance().text
                    dinit: Node | None = None
                    if self.at(TokenKind.OP, "="):
                        self.advance()
                        dinit = self.expression()
                    init.append(VarDecl(name, dinit, kind, span=self._span(dstart)))
                    if self.at_punct(","):
                        self.advance()
                        continue
                    break
                self.expect_punct(";")
            else:
                init.append(self.simple_assignment_or_expr())
                self.expect_punct(";")
            if self.at_punct(";"):
                self.advance()
            else:
                cond = self.expression()
                self.expect_punct(";")
            if not self.at_punct(")"):
                update_stmt = self.simple_assignment_or_expr()
                update = (
                    update_stmt.expr if isinstance(update_stmt, ExprStmt) else update_stmt
                )
            self.expect_punct(")")
        except _Bail as bail:
            self.errors.append(ParseDiagnostic(bail.message, bail.span))
            init, cond, update = [], None, None
            opaque, havoc = self._recover_header(header_start)
        body = self.block_or_statement()
        return Loop(
            "for",
            body,
            init=init,
            cond=cond,
            update=update,
            opaque_header=opaque,
            header_assigned_names=havoc,
            span=self._span(start),
        )

    def _recover_header(self, header_start: int) -> tuple[str, tuple[str, ...]]:
        """Skip to the ')' closing a loop header that failed to parse."""
        depth = 0
        for tok in self.tokens[header_start : self.pos]:
            if tok.kind is TokenKind.PUNCT:
                if tok.text in "([{":
                    depth += 1
                elif tok.text in ")]}":
                    depth -= 1
        while not self.at(TokenKind.EOF):
            tok = self.cur()
            if tok.kind is TokenKind.PUNCT:
                if tok.text in "([{":
                    depth += 1
                elif tok.text in ")]}":
                    depth -= 1
                    if depth <= 0:
                        self.advance()
                        break
            self.advance()
        tokens = self.tokens[header_start : self.pos]
        return self._text(header_start), _scan_assigned_names(tokens)

    def expression_statement(self) -> Node:
        stmt = self.simple_assignment_or_expr()
        self.terminate()
        return stmt

    def simple_assignment_or_expr(self) -> Node:
        """An assignment (plain or compound) or a bare expression."""
        start = self.pos
        expr = self.expression()
        tok = self.cur()
        if tok.kind is TokenKind.OP and tok.text in _ASSIGN_OPS:
            if not isinstance(expr, (Identifier, Member, Index)):
                raise _Bail("invalid assignment target", tok.span)
            op = self.advance().text
            value = self.expression()
            if op != "=":
                # Compound assignment desugars to target = target <op> value.
                value = Binary(
                    op[:-1], copy.deepcopy(expr), value, span=value.span
                )
            return Assign(expr, value, span=self._span(start))
        return ExprStmt(expr, span=self._span(start))

    def terminate(self) -> None:
        if self.at_punct(";"):
            self.advance()
            return
        if self.at_punct("}") or self.at(TokenKind.EOF):
            return
        if self._newline_before_cur():
            return
        tok = self.cur()
        raise _Bail(f"expected ';', found {self._describe(tok)}", tok.span)

    # --- expressions ---

    def expression(self) -> Node:
        start = self.pos
        left = self.unary()
        while True:
            tok = self.cur()
            if tok.kind is TokenKind.OP and tok.text == "+":
                self.advance()
                right = self.unary()
                left = Binary("+", left, right, span=self._span(start))
                continue
            if self._ends_expression(tok):
                return left
            return self._opaque_takeover(start, left)

    def _ends_expression(self, tok: Token) -> bool:
        if tok.kind is TokenKind.EOF:
            return True
        if tok.kind is TokenKind.PUNCT and tok.text in (",", ";", ")", "]", "}", ":"):
            return True
        if tok.kind is TokenKind.OP and tok.text in _ASSIGN_OPS:
            return True
        if tok.kind is TokenKind.KEYWORD and tok.text == "else":
            return True
        if self._newline_before_cur():
            # ASI: a new line may start the next statement.
            if tok.kind is TokenKind.KEYWORD and tok.text in _STMT_KEYWORDS:
                return True
            if tok.kind in (
                TokenKind.IDENT,
                TokenKind.STRING,
                TokenKind.NUMBER,
                TokenKind.TEMPLATE,
            ):
                return True
            if tok.kind is TokenKind.KEYWORD:
                return True
        return False

    def _opaque_takeover(self, start: int, left: Node | None = None) -> OpaqueExpr:
        """Give up on an expression; skip to a boundary and go opaque."""
        hints: list[str] = []
        root = left
        while isinstance(root, (Member, Index)):
            root = root.obj
        if isinstance(root, Identifier):
            hints.append(root.name)
        self._skip_balanced_until({",", ";", ")", "]", "}"})
        tokens = self.tokens[start : self.pos]
        names = list(_scan_assigned_names(tokens))
        for h in hints:
            if h not in names:
                names.append(h)
        return OpaqueExpr(self._text(start), tuple(names), span=self._span(start))

    def _skip_balanced_until(self, stops: set[str]) -> None:
        depth = 0
        while not self.at(TokenKind.EOF):
            tok = self.cur()
            if tok.kind is TokenKind.PUNCT:
                if tok.text in "([{":
                    depth += 1
                elif tok.text in ")]}":
                    if depth == 0 and tok.text in stops:
                        return
                    if depth == 0:
                        return  # unmatched closer ends the region too
                    depth -= 1
                elif depth == 0 and tok.text in stops:
                    return
            elif depth == 0 and self._newline_before_cur():
                if tok.kind is TokenKind.KEYWORD and tok.text in _STMT_KEYWORDS:
                    return
            self.advance()

    def unary(self) -> Node:
        tok = self.cur()
        if tok.kind is TokenKind.OP and tok.text == "-" and self._next_is_number():
            start = self.pos
            self.advance()
            num = self.advance()
            return NumberLit("-" + num.text, -float(num.value), span=self._span(start))
        return self.postfix()

    def _next_is_number(self) -> bool:
        nxt = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None
        return nxt is not None and nxt.kind is TokenKind.NUMBER

    def postfix(self) -> Node:
        start = self.pos
        node = self.primary()
        while True:
            if self.at_punct("."):
                nxt = self.tokens[self.pos + 1]
                if nxt.kind in (TokenKind.IDENT, TokenKind.KEYWORD):
                    self.advance()
                    prop = self.advance().text
                    node = Member(node, prop, span=self._span(start))
                    continue
                return self._opaque_takeover(start, node)
            if self.at_punct("["):
                self.advance()
                key = self.expression()
                if not self.at_punct("]"):
                    return self._recover_bracketed(start, "]")
                self.advance()
                node = Index(node, key, span=self._span(start))
                continue
            if self.at_punct("("):
                args, ok = self.argument_list()
                if not ok:
                    return self._recover_bracketed(start, ")")
                node = Call(node, args, span=self._span(start))
                continue
            return node

    def _recover_bracketed(self, start: int, closer: str) -> OpaqueExpr:
        """Recover from a malformed bracketed construct, consuming its closer."""
        self._skip_balanced_until({closer})
        if self.at_punct(closer):
            self.advance()
        tokens = self.tokens[start : self.pos]
        return OpaqueExpr(
            self._text(start), _scan_assigned_names(tokens), span=self._span(start)
        )

    def argument_list(self) -> tuple[list[Node], bool]:
        self.expect_punct("(")
        args: list[Node] = []
        while not self.at_punct(")"):
            if self.at(TokenKind.EOF):
                return args, False
            args.append(self.expression())
            if self.at_punct(","):
                self.advance()
                continue
            if not self.at_punct(")"):
                return args, False
        self.advance()
        return args, True

    def primary(self) -> Node:
        tok = self.cur()
        start = self.pos
        if tok.kind is TokenKind.STRING:
            self.advance()
            return StringLit(str(tok.value), span=tok.span)
        if tok.kind is TokenKind.NUMBER:
            self.advance()
            return NumberLit(tok.text, float(tok.value), span=tok.span)
        if tok.kind is TokenKind.TEMPLATE:
            self.advance()
            return self._desugar_template(tok)
        if tok.kind is TokenKind.IDENT:
            self.advance()
            return Identifier(tok.text, span=tok.span)
        if tok.kind is TokenKind.KEYWORD:
            if tok.text in ("true", "false"):
                self.advance()
                return BoolLit(tok.text == "true", span=tok.span)
            if tok.text == "null":
                self.advance()
                return NullLit(span=tok.span)
            if tok.text == "function":
                return self.function_expression()
        if tok.kind is TokenKind.PUNCT and tok.text == "(":
            self.advance()
            inner = self.expression()
            if not self.at_punct(")"):
                return self._recover_bracketed(start, ")")
            self.advance()
            return inner
        if tok.kind is TokenKind.PUNCT and tok.text == "{":
            return self.object_literal()
        # Not a subset expression: go opaque from here.
        return self._opaque_takeover(start)

    def function_expression(self) -> Node:
        start = self.pos
        self.advance()  # function
        name: str | None = None
        if self.at(TokenKind.IDENT):
            name = self.advance().text
        params = self.parameter_list()
        body = self.function_body()
        return FunctionExpr(name, params, body, span=self._span(start))

    def object_literal(self) -> Node:
        start = self.pos
        self.expect_punct("{")
        entries: list[tuple[str, Node]] = []
        index: dict[str, int] = {}
        try:
            while not self.at_punct("}"):
                if self.at(TokenKind.EOF):
                    raise _Bail("unterminated object literal", self.cur().span)
                key = self._object_key()
                if self.at_punct("("):
                    # Method shorthand: parse as a function expression.
                    params = self.parameter_list()
                    body = self.function_body()
                    value: Node = FunctionExpr(
                        None, params, body, span=self._span(start)
                    )
                elif self.at_punct(":"):
                    self.advance()
                    value = self.expression()
                elif self.at_punct(",") or self.at_punct("}"):
                    # Shorthand property {a} means {a: a}.
                    value = Identifier(key, span=self.prev().span)
                else:
                    tok = self.cur()
                    raise _Bail(
                        f"expected ':' in object literal, found {self._describe(tok)}",
                        tok.span,
                    )
                if key in index:
                    self.errors.append(
                        ParseDiagnostic(
                            f"duplicate object key {key!r}", self.prev().span
                        )
                    )
                    entries[index[key]] = (key, value)
                else:
                    index[key] = len(entries)
                    entries.append((key, value))
                if self.at_punct(","):
                    self.advance()
            self.expect_punct("}")
        except _Bail as bail:
            self.errors.append(ParseDiagnostic(bail.message, bail.span))
            return self._recover_bracketed(start, "}")
        return ObjectLit(entries, span=self._span(start))

    def _object_key(self) -> str:
        tok = self.cur()
        if tok.kind in (TokenKind.IDENT, TokenKind.KEYWORD):
            self.advance()
            return tok.text
        if tok.kind is TokenKind.STRING:
            self.advance()
            return str(tok.value)
        if tok.kind is TokenKind.NUMBER:
            self.advance()
            return tok.text
        raise _Bail(
            f"expected object key, found {self._describe(tok)}", tok.span
        )

    def _desugar_template(self, tok: Token) -> Node:
        parts: list[Node] = []
        for part in tok.value:
            if isinstance(part, TemplateChunk):
                parts.append(StringLit(part.text, span=tok.span))
            elif isinstance(part, TemplateHole):
                parts.append(self._parse_hole(part, tok.span))
        if not parts:
            return StringLit("", span=tok.span)
        if not isinstance(parts[0], StringLit):
            # Keep the chain string-typed even when it starts with a hole.
            parts.insert(0, StringLit("", span=tok.span))
        node = parts[0]
        for nxt in parts[1:]:
            node = Binary("+", node, nxt, span=tok.span)
        return node

    def _parse_hole(self, hole: TemplateHole, template_span: SourceSpan) -> Node:
        tokens, lex_errors = lex_tolerant(
            hole.source, self.file, line=hole.line, col=hole.col
        )
        for err in lex_errors:
            self.errors.append(ParseDiagnostic(err.message, err.span))
        sub = _Parser(hole.source, self.file, tokens)
        expr = sub.expression()
        self.errors.extend(sub.errors)
        if not sub.at(TokenKind.EOF):
            return OpaqueExpr(hole.source.strip(), (), span=template_span)
        return expr


def parse(source: str, file: str = "<input>") -> ParseResult:
    """Parse a source file; always returns a Program plus diagnostics."""
    tokens, lex_errors = lex_tolerant(source, file)
    parser = _Parser(source, file, tokens)
    program = parser.parse_program()
    errors = [ParseDiagnostic(e.message, e.span) for e in lex_errors]
    errors.extend(parser.errors)
    errors.sort(key=lambda d: (d.span.start_line, d.span.start_col))
    return ParseResult(program, errors)
