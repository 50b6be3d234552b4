"""Lexer, parser, AST, and renderer for the analyzed JavaScript subset."""

from wac.js.lexer import LexError, Token, TokenKind, tokenize
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
    structurally_equal,
    walk,
)
from wac.js.parser import ParseDiagnostic, ParseResult, parse
from wac.js.render import render

__all__ = [
    "Assign",
    "Binary",
    "BoolLit",
    "Call",
    "ExprStmt",
    "FunctionDecl",
    "FunctionExpr",
    "Identifier",
    "If",
    "Index",
    "LexError",
    "Loop",
    "Member",
    "Node",
    "NullLit",
    "NumberLit",
    "ObjectLit",
    "OpaqueExpr",
    "OpaqueStmt",
    "ParseDiagnostic",
    "ParseResult",
    "Program",
    "Return",
    "SourceSpan",
    "StringLit",
    "Token",
    "TokenKind",
    "VarDecl",
    "parse",
    "render",
    "structurally_equal",
    "tokenize",
    "walk",
]
