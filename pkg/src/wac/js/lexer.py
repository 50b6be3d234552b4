"""Tokenizer for the JavaScript subset.

Produces identifiers, keywords, string/template/number literals,
operators, and punctuation, with 1-based source spans (end column
exclusive).  Line and block comments are skipped.  Template literals
are lexed into literal chunks and raw hole sources; the parser turns
them into concatenation chains.

Only unterminated constructs (string, template, block comment) are lex
errors; any other unexpected character becomes a single-char OP token
so the parser can recover around it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from wac.js.nodes import SourceSpan

KEYWORDS = frozenset(
    {
        "var",
        "let",
        "const",
        "function",
        "return",
        "if",
        "else",
        "true",
        "false",
        "null",
        "while",
        "for",
    }
)

# Longest match first.  Single '/' is handled separately because of
# comment detection.
_MULTI_OPS = (
    ">>>=",
    "===",
    "!==",
    "**=",
    "<<=",
    ">>=",
    ">>>",
    "...",
    "&&",
    "||",
    "??",
    "==",
    "!=",
    "<=",
    ">=",
    "=>",
    "++",
    "--",
    "+=",
    "-=",
    "*=",
    "%=",
    "&=",
    "|=",
    "^=",
    "<<",
    ">>",
    "**",
)

_SINGLE_OPS = frozenset("+-*%=<>!&|^~?")
_PUNCT = frozenset("()[]{},;:.")

_ESCAPES = {
    "n": "\n",
    "t": "\t",
    "r": "\r",
    "b": "\b",
    "f": "\f",
    "v": "\v",
    "0": "\0",
    "\\": "\\",
    "'": "'",
    '"': '"',
    "`": "`",
    "$": "$",
}


class TokenKind(Enum):
    IDENT = "ident"
    KEYWORD = "keyword"
    STRING = "string"
    TEMPLATE = "template"
    NUMBER = "number"
    OP = "op"
    PUNCT = "punct"
    EOF = "eof"


@dataclass(frozen=True)
class TemplateChunk:
    """A decoded literal piece of a template literal."""

    text: str


@dataclass(frozen=True)
class TemplateHole:
    """An interpolation hole: raw source plus its start position."""

    source: str
    line: int
    col: int


TemplatePart = Union[TemplateChunk, TemplateHole]


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    value: object = None  # decoded str for STRING, tuple of parts for TEMPLATE
    offset: int = 0  # start offset into the lexed source, for text slicing


@dataclass(frozen=True)
class LexError(Exception):
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


class _Scanner:
    def __init__(self, source: str, file: str, line: int = 1, col: int = 1):
        self.source = source
        self.file = file
        self.pos = 0
        self.line = line
        self.col = col

    def at_end(self) -> bool:
        return self.pos >= len(self.source)

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.source[i] if i < len(self.source) else ""

    def advance(self) -> str:
        ch = self.source[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def mark(self) -> tuple[int, int, int]:
        return (self.pos, self.line, self.col)

    def span_from(self, mark: tuple[int, int, int]) -> SourceSpan:
        return SourceSpan(self.file, mark[1], mark[2], self.line, self.col)


def lex_tolerant(
    source: str, file: str = "<input>", line: int = 1, col: int = 1
) -> tuple[list[Token], list[LexError]]:
    """Tokenize, collecting errors instead of raising.

    An unterminated construct ends the token stream (it always runs to
    end of input); the tokens before it are still returned.
    """
    sc = _Scanner(source, file, line, col)
    tokens: list[Token] = []
    errors: list[LexError] = []

    while not sc.at_end():
        ch = sc.peek()
        if ch in " \t\r\n":
            sc.advance()
            continue
        if ch == "/":
            nxt = sc.peek(1)
            if nxt == "/":
                while not sc.at_end() and sc.peek() != "\n":
                    sc.advance()
                continue
            if nxt == "*":
                mark = sc.mark()
                sc.advance()
                sc.advance()
                closed = False
                while not sc.at_end():
                    if sc.peek() == "*" and sc.peek(1) == "/":
                        sc.advance()
                        sc.advance()
                        closed = True
                        break
                    sc.advance()
                if not closed:
                    errors.append(
                        LexError("unterminated block comment", sc.span_from(mark))
                    )
                    break
                continue
            mark = sc.mark()
            sc.advance()
            if sc.peek() == "=":
                sc.advance()
                tokens.append(Token(TokenKind.OP, "/=", sc.span_from(mark), offset=mark[0]))
            else:
                tokens.append(Token(TokenKind.OP, "/", sc.span_from(mark), offset=mark[0]))
            continue
        if ch in "'\"":
            mark = sc.mark()
            try:
                value = _scan_string(sc)
            except LexError as exc:
                errors.append(exc)
                break
            raw = sc.source[mark[0] : sc.pos]
            tokens.append(Token(TokenKind.STRING, raw, sc.span_from(mark), value, offset=mark[0]))
            continue
        if ch == "`":
            mark = sc.mark()
            try:
                parts = _scan_template(sc)
            except LexError as exc:
                errors.append(exc)
                break
            raw = sc.source[mark[0] : sc.pos]
            tokens.append(Token(TokenKind.TEMPLATE, raw, sc.span_from(mark), parts, offset=mark[0]))
            continue
        if ch.isdigit():
            tokens.append(_scan_number(sc))
            continue
        if ch.isalpha() or ch in "_$":
            mark = sc.mark()
            while not sc.at_end() and (sc.peek().isalnum() or sc.peek() in "_$"):
                sc.advance()
            text = sc.source[mark[0] : sc.pos]
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, text, sc.span_from(mark), offset=mark[0]))
            continue
        matched = _match_multi_op(sc)
        if matched is not None:
            tokens.append(matched)
            continue
        mark = sc.mark()
        sc.advance()
        if ch in _PUNCT:
            tokens.append(Token(TokenKind.PUNCT, ch, sc.span_from(mark), offset=mark[0]))
        else:
            # Unexpected characters become opaque operator tokens.
            tokens.append(Token(TokenKind.OP, ch, sc.span_from(mark), offset=mark[0]))

    eof_span = SourceSpan(sc.file, sc.line, sc.col, sc.line, sc.col)
    tokens.append(Token(TokenKind.EOF, "", eof_span, offset=sc.pos))
    return tokens, errors


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Tokenize a whole source; raises LexError on unterminated constructs."""
    tokens, errors = lex_tolerant(source, file)
    if errors:
        raise errors[0]
    return tokens


def _match_multi_op(sc: _Scanner) -> Optional[Token]:
    rest = sc.source[sc.pos :]
    for op in _MULTI_OPS:
        if rest.startswith(op):
            mark = sc.mark()
            for _ in op:
                sc.advance()
            return Token(TokenKind.OP, op, sc.span_from(mark), offset=mark[0])
    ch = sc.peek()
    if ch in _SINGLE_OPS:
        mark = sc.mark()
        sc.advance()
        return Token(TokenKind.OP, ch, sc.span_from(mark), offset=mark[0])
    return None


def _scan_number(sc: _Scanner) -> Token:
    mark = sc.mark()
    if sc.peek() == "0" and sc.peek(1) in "xX":
        sc.advance()
        sc.advance()
        while not sc.at_end() and sc.peek() in "0123456789abcdefABCDEF":
            sc.advance()
        raw = sc.source[mark[0] : sc.pos]
        value = float(int(raw, 16)) if len(raw) > 2 else 0.0
        return Token(TokenKind.NUMBER, raw, sc.span_from(mark), value, offset=mark[0])
    while not sc.at_end() and sc.peek().isdigit():
        sc.advance()
    if sc.peek() == "." and sc.peek(1).isdigit():
        sc.advance()
        while not sc.at_end() and sc.peek().isdigit():
            sc.advance()
    if sc.peek() in "eE" and (
        sc.peek(1).isdigit() or (sc.peek(1) in "+-" and sc.peek(2).isdigit())
    ):
        sc.advance()
        if sc.peek() in "+-":
            sc.advance()
        while not sc.at_end() and sc.peek().isdigit():
            sc.advance()
    raw = sc.source[mark[0] : sc.pos]
    return Token(TokenKind.NUMBER, raw, sc.span_from(mark), float(raw), offset=mark[0])


def _decode_escape(sc: _Scanner) -> str:
    # Caller consumed the backslash.
    if sc.at_end():
        return ""
    ch = sc.advance()
    if ch == "\n":
        return ""  # line continuation
    if ch == "u":
        digits = ""
        if sc.peek() == "{":
            sc.advance()
            while not sc.at_end() and sc.peek() != "}":
                digits += sc.advance()
            if sc.peek() == "}":
                sc.advance()
        else:
            for _ in range(4):
                if sc.peek() in "0123456789abcdefABCDEF":
                    digits += sc.advance()
        try:
            return chr(int(digits, 16))
        except ValueError:
            return "u" + digits
    if ch == "x":
        digits = ""
        for _ in range(2):
            if sc.peek() in "0123456789abcdefABCDEF":
                digits += sc.advance()
        try:
            return chr(int(digits, 16))
        except ValueError:
            return "x" + digits
    return _ESCAPES.get(ch, ch)


def _scan_string(sc: _Scanner) -> str:
    mark = sc.mark()
    quote = sc.advance()
    out: list[str] = []
    while True:
        if sc.at_end():
            raise LexError("unterminated string", sc.span_from(mark))
        ch = sc.peek()
        if ch == "\n":
            raise LexError("unterminated string", sc.span_from(mark))
        if ch == quote:
            sc.advance()
            return "".join(out)
        if ch == "\\":
            sc.advance()
            out.append(_decode_escape(sc))
            continue
        out.append(sc.advance())


def _scan_template(sc: _Scanner) -> tuple[TemplatePart, ...]:
    mark = sc.mark()
    sc.advance()  # opening backtick
    parts: list[TemplatePart] = []
    chunk: list[str] = []

    def flush_chunk() -> None:
        if chunk:
            parts.append(TemplateChunk("".join(chunk)))
            chunk.clear()

    while True:
        if sc.at_end():
            raise LexError("unterminated template literal", sc.span_from(mark))
        ch = sc.peek()
        if ch == "`":
            sc.advance()
            flush_chunk()
            return tuple(parts)
        if ch == "\\":
            sc.advance()
            chunk.append(_decode_escape(sc))
            continue
        if ch == "$" and sc.peek(1) == "{":
            sc.advance()
            sc.advance()
            flush_chunk()
            hole_mark = sc.mark()
            _skip_hole(sc, mark)
            source = sc.source[hole_mark[0] : sc.pos]
            sc.advance()  # closing '}'
            parts.append(TemplateHole(source, hole_mark[1], hole_mark[2]))
            continue
        chunk.append(sc.advance())


def _skip_hole(sc: _Scanner, template_mark: tuple[int, int, int]) -> None:
    """Advance to the '}' closing a template hole, honoring nesting."""
    depth = 0
    while True:
        if sc.at_end():
            raise LexError(
                "unterminated template literal", sc.span_from(template_mark)
            )
        ch = sc.peek()
        if ch in "'\"":
            _scan_string(sc)
            continue
        if ch == "`":
            _scan_template(sc)
            continue
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            if ch == "}" and depth == 0:
                return
            depth -= 1
        sc.advance()
