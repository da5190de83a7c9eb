"""Lexer and recursive-descent parser for `.asl` sources.

Grammar (EBNF, `//` line comments allowed anywhere):

    program     = [ "service" IDENT ";" ] { decl } ;
    decl        = plain_class | adaptable_class | alternative ;
    plain_class = "class" IDENT "{" { method_def } "}" ;
    adaptable_class
                = "adaptable" "class" IDENT "{" { adaptable_sig | method_def } "}" ;
    adaptable_sig = "adaptable" "fn" IDENT "(" ")" ";" ;
    alternative = "alternative" IDENT "adapts" IDENT "{" { method_def } "}" ;
    method_def  = "fn" IDENT "(" ")" block ;
    block       = "{" { stmt } "}" ;
    stmt        = "use" IDENT ";"
                | "consume" IDENT INT ";"
                | "reserve" IDENT INT ";"
                | "call" IDENT "." IDENT "(" ")" ";"
                | "repeat" INT block
                | "choose" block "or" block { "or" block } ;
"""
from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    AdaptableClassDecl,
    AdaptableProgram,
    AlternativeDecl,
    Call,
    Choose,
    ClassDecl,
    Consume,
    Diagnostic,
    MethodDef,
    MethodSig,
    Repeat,
    Reserve,
    Span,
    Stmt,
    Use,
)

KEYWORDS = frozenset(
    {
        "service",
        "class",
        "adaptable",
        "alternative",
        "adapts",
        "fn",
        "use",
        "consume",
        "reserve",
        "call",
        "repeat",
        "choose",
        "or",
    }
)

PUNCT = frozenset("{}();.")

E_SYNTAX = "E100_SYNTAX"
E_BAD_BOUND = "E101_BAD_BOUND"


class ParseError(Exception):
    """Raised when a source cannot be parsed; carries positioned diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(d.message for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "kw" | one of PUNCT | "eof"
    value: str
    line: int
    column: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.column, max(len(self.value), 1))


def _error(message: str, span: Span, code: str = E_SYNTAX) -> ParseError:
    return ParseError([Diagnostic("error", code, message, span)])


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("int", source[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch in PUNCT:
            tokens.append(Token(ch, ch, line, start_col))
            i += 1
            col += 1
            continue
        raise _error(f"unexpected character {ch!r}", Span(line, start_col, 1))
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_kw(self, word: str) -> bool:
        return self.cur.kind == "kw" and self.cur.value == word

    def accept_kw(self, word: str) -> bool:
        if self.at_kw(word):
            self.advance()
            return True
        return False

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            raise _error(f"expected {word!r}, found {self.cur.value or 'end of input'!r}", self.cur.span)
        return self.advance()

    def expect(self, kind: str) -> Token:
        if self.cur.kind != kind:
            what = {"ident": "identifier", "int": "integer literal"}.get(kind, repr(kind))
            raise _error(f"expected {what}, found {self.cur.value or 'end of input'!r}", self.cur.span)
        return self.advance()

    def parse_program(self) -> AdaptableProgram:
        name = ""
        span = self.cur.span
        if self.accept_kw("service"):
            name = self.expect("ident").value
            self.expect(";")
        plain: list[ClassDecl] = []
        adaptable: list[AdaptableClassDecl] = []
        alternatives: list[AlternativeDecl] = []
        while self.cur.kind != "eof":
            if self.at_kw("class"):
                plain.append(self.parse_plain_class())
            elif self.at_kw("adaptable"):
                adaptable.append(self.parse_adaptable_class())
            elif self.at_kw("alternative"):
                alternatives.append(self.parse_alternative())
            else:
                raise _error(
                    f"expected a declaration, found {self.cur.value or 'end of input'!r}",
                    self.cur.span,
                )
        return AdaptableProgram(name, tuple(plain), tuple(adaptable), tuple(alternatives), span)

    def parse_plain_class(self) -> ClassDecl:
        start = self.expect_kw("class")
        name = self.expect("ident").value
        self.expect("{")
        methods = []
        while not self.cur.kind == "}":
            methods.append(self.parse_method_def())
        self.expect("}")
        return ClassDecl(name, tuple(methods), start.span)

    def parse_adaptable_class(self) -> AdaptableClassDecl:
        start = self.expect_kw("adaptable")
        self.expect_kw("class")
        name = self.expect("ident").value
        self.expect("{")
        sigs: list[MethodSig] = []
        plain: list[MethodDef] = []
        while self.cur.kind != "}":
            if self.accept_kw("adaptable"):
                self.expect_kw("fn")
                sig_tok = self.expect("ident")
                self.expect("(")
                self.expect(")")
                self.expect(";")
                sigs.append(MethodSig(sig_tok.value, sig_tok.span))
            else:
                plain.append(self.parse_method_def())
        self.expect("}")
        return AdaptableClassDecl(name, tuple(sigs), tuple(plain), start.span)

    def parse_alternative(self) -> AlternativeDecl:
        start = self.expect_kw("alternative")
        name = self.expect("ident").value
        self.expect_kw("adapts")
        target = self.expect("ident").value
        self.expect("{")
        methods = []
        while self.cur.kind != "}":
            methods.append(self.parse_method_def())
        self.expect("}")
        return AlternativeDecl(name, target, tuple(methods), start.span)

    def parse_method_def(self) -> MethodDef:
        start = self.expect_kw("fn")
        name = self.expect("ident").value
        self.expect("(")
        self.expect(")")
        body = self.parse_block()
        return MethodDef(name, body, start.span)

    def parse_block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        stmts: list[Stmt] = []
        while self.cur.kind != "}":
            stmts.append(self.parse_stmt())
        self.expect("}")
        return tuple(stmts)

    def parse_stmt(self) -> Stmt:
        tok = self.cur
        if self.accept_kw("use"):
            name = self.expect("ident").value
            self.expect(";")
            return Use(name, tok.span)
        if self.accept_kw("consume"):
            name = self.expect("ident").value
            amount = int(self.expect("int").value)
            self.expect(";")
            return Consume(name, amount, tok.span)
        if self.accept_kw("reserve"):
            name = self.expect("ident").value
            amount = int(self.expect("int").value)
            self.expect(";")
            return Reserve(name, amount, tok.span)
        if self.accept_kw("call"):
            cls = self.expect("ident").value
            self.expect(".")
            method = self.expect("ident").value
            self.expect("(")
            self.expect(")")
            self.expect(";")
            return Call(cls, method, tok.span)
        if self.accept_kw("repeat"):
            if self.cur.kind != "int":
                raise _error(
                    f"repeat bound must be a positive integer literal, found {self.cur.value!r}",
                    self.cur.span,
                    E_BAD_BOUND,
                )
            bound_tok = self.advance()
            count = int(bound_tok.value)
            if count < 1:
                raise _error(
                    f"repeat bound must be positive, got {count}", bound_tok.span, E_BAD_BOUND
                )
            body = self.parse_block()
            return Repeat(count, body, tok.span)
        if self.accept_kw("choose"):
            branches = [self.parse_block()]
            self.expect_kw("or")
            branches.append(self.parse_block())
            while self.accept_kw("or"):
                branches.append(self.parse_block())
            return Choose(tuple(branches), tok.span)
        raise _error(f"expected a statement, found {tok.value or 'end of input'!r}", tok.span)


def parse(source: str) -> AdaptableProgram:
    """Parse ASL source text; raises :class:`ParseError` with diagnostics on failure."""
    parser = _Parser(tokenize(source))
    return parser.parse_program()


def try_parse(source: str):
    """Parse, returning ``(program, [])`` or ``(None, diagnostics)``."""
    try:
        return parse(source), []
    except ParseError as exc:
        return None, exc.diagnostics
