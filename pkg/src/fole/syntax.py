"""Surface syntax for type lists, morphisms and formulas.

    phi   ::= join ('->' phi)?                 right associative, loosest
    join  ::= meet ('\\/' meet)*
    meet  ::= diff ('/\\' diff)*
    diff  ::= unary ('\\' unary)*
    unary ::= '~' unary | IDENT | '(' phi ')'
            | ('exists' | 'forall' | 'subst') '[' morph ']' '(' phi ')'
            | ('top' | 'bot') '[' tlist ']'
    tlist ::= IDENT | '(' (IDENT ':' IDENT (',' IDENT ':' IDENT)*)? ')'
    morph ::= IDENT | tlist '->' tlist '{' (IDENT '->' IDENT (',' ...)*)? '}'

The printer parenthesizes every binary connective and always writes
morphisms and type lists inline unless a morphism carries a name.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from fole.errors import FoleError, FoleSyntaxError
from fole.formula import (
    Atom,
    Bottom,
    Diff,
    Exists,
    Forall,
    Formula,
    Impl,
    Join,
    Meet,
    Neg,
    Subst,
    Top,
)
from fole.kernel import TypeList, TypeListMorphism

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>-?[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\|-|->|/\\|\\/|\\|~|\(|\)|\[|\]|\{|\}|,|:|=|\*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, source: str | None = None, line_offset: int = 0) -> list[Token]:
    out = []
    pos = 0
    line, line_start = 1 + line_offset, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FoleSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            out.append(Token(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


@dataclass
class Env:
    """Names visible to the parser."""

    type_lists: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    schema: object = None


class Parser:
    def __init__(self, tokens: list[Token], env: Env | None = None, source: str | None = None):
        self.tokens = tokens
        self.i = 0
        self.env = env or Env()
        self.source = source

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return FoleSyntaxError(msg, tok.line, tok.column, self.source)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> str:
        if self.tok.kind != "ident":
            shown = self.tok.text or "end of input"
            raise self.error(f"expected identifier, found {shown!r}")
        tok = self.tok
        self.i += 1
        return tok.text

    def done(self) -> bool:
        return self.tok.kind == "eof"

    def expect_end(self):
        if not self.done():
            raise self.error(f"unexpected {self.tok.text!r}")

    # type lists and morphisms
    def type_list(self) -> TypeList:
        if self.tok.kind == "ident":
            tok = self.tok
            name = self.ident()
            if name in self.env.type_lists:
                return self.env.type_lists[name]
            schema = self.env.schema
            if schema is not None and name in schema.signature:
                return schema.signature[name]
            raise self.error(f"unknown type list {name!r}", tok)
        self.expect("(")
        items = {}
        if not self.at(")"):
            while True:
                tok = self.tok
                i = self.ident()
                self.expect(":")
                x = self.ident()
                if i in items:
                    raise self.error(f"duplicate index {i!r}", tok)
                items[i] = x
                if not self.accept(","):
                    break
        self.expect(")")
        return TypeList(items)

    def morphism(self) -> TypeListMorphism:
        if self.tok.kind == "ident" and not (self.peek().text == "->" and self.tok.text in self.env.type_lists):
            tok = self.tok
            name = self.ident()
            if name not in self.env.morphisms:
                raise self.error(f"unknown morphism {name!r}", tok)
            return self.env.morphisms[name]
        start = self.tok
        src = self.type_list()
        self.expect("->")
        tgt = self.type_list()
        self.expect("{")
        mapping = {}
        if not self.at("}"):
            while True:
                a = self.ident()
                self.expect("->")
                mapping[a] = self.ident()
                if not self.accept(","):
                    break
        self.expect("}")
        try:
            return TypeListMorphism(src, tgt, mapping)
        except FoleError as exc:
            raise self.error(str(exc), start) from None

    # formulas
    def formula(self) -> Formula:
        left = self.join()
        if self.accept("->"):
            return Impl(left, self.formula())
        return left

    def join(self) -> Formula:
        left = self.meet()
        while self.accept("\\/"):
            left = Join(left, self.meet())
        return left

    def meet(self) -> Formula:
        left = self.diff()
        while self.accept("/\\"):
            left = Meet(left, self.diff())
        return left

    def diff(self) -> Formula:
        left = self.unary()
        while self.accept("\\"):
            left = Diff(left, self.unary())
        return left

    def unary(self) -> Formula:
        if self.accept("~"):
            return Neg(self.unary())
        if self.accept("("):
            inner = self.formula()
            self.expect(")")
            return inner
        tok = self.tok
        if tok.kind != "ident":
            shown = tok.text or "end of input"
            raise self.error(f"expected a formula, found {shown!r}")
        if self.peek().text == "[":
            if tok.text in ("exists", "forall", "subst"):
                self.i += 2
                h = self.morphism()
                self.expect("]")
                self.expect("(")
                body = self.formula()
                self.expect(")")
                return {"exists": Exists, "forall": Forall, "subst": Subst}[tok.text](h, body)
            if tok.text in ("top", "bot"):
                self.i += 2
                L = self.type_list()
                self.expect("]")
                return Top(L) if tok.text == "top" else Bottom(L)
        name = self.ident()
        schema = self.env.schema
        if schema is not None and name not in schema.signature:
            raise self.error(f"unknown relation type {name!r}", tok)
        return Atom(name)

    def sequent(self):
        lhs = self.formula()
        self.expect("|-")
        return lhs, self.formula()


def parse_formula(text: str, env: Env | None = None, source: str | None = None) -> Formula:
    p = Parser(tokenize(text, source), env, source)
    phi = p.formula()
    p.expect_end()
    return phi


def parse_type_list(text: str, env: Env | None = None) -> TypeList:
    p = Parser(tokenize(text), env)
    L = p.type_list()
    p.expect_end()
    return L


def parse_morphism(text: str, env: Env | None = None) -> TypeListMorphism:
    p = Parser(tokenize(text), env)
    h = p.morphism()
    p.expect_end()
    return h


def print_type_list(L: TypeList) -> str:
    return "(" + ", ".join(f"{i}: {x}" for i, x in L.items()) + ")"


def print_morphism(h: TypeListMorphism, use_names: bool = True) -> str:
    if use_names and h.name:
        return h.name
    pairs = ", ".join(f"{a} -> {b}" for a, b in h.mapping.items())
    return f"{print_type_list(h.source)} -> {print_type_list(h.target)} {{{pairs}}}"


_BIN = {Meet: "/\\", Join: "\\/", Impl: "->", Diff: "\\"}
_FLOW = {Exists: "exists", Forall: "forall", Subst: "subst"}


def print_formula(phi: Formula, use_names: bool = True) -> str:
    if isinstance(phi, Atom):
        return str(phi.relation)
    if isinstance(phi, Top):
        return f"top[{print_type_list(phi.type_list)}]"
    if isinstance(phi, Bottom):
        return f"bot[{print_type_list(phi.type_list)}]"
    if isinstance(phi, Neg):
        return "~" + print_formula(phi.body, use_names)
    for cls, op in _BIN.items():
        if isinstance(phi, cls):
            return f"({print_formula(phi.left, use_names)} {op} {print_formula(phi.right, use_names)})"
    for cls, kw in _FLOW.items():
        if isinstance(phi, cls):
            return f"{kw}[{print_morphism(phi.h, use_names)}]({print_formula(phi.body, use_names)})"
    raise TypeError(f"not a formula: {phi!r}")
