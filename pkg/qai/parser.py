"""
Recursive-descent parser for the quantum while-language.

Grammar (``//`` comments run to end of line)::

    program  := "qubits" IDENT+ ";" decl* stmt*
    decl     := "unitary" NAME "=" matrix ";"
              | "space" NAME "=" "span" "(" vec ("," vec)* ")" ";"
    matrix   := "[" row ("," row)* "]"        row := "[" cnum ("," cnum)* "]"
    cnum     := "-"? FLOAT (("+"|"-") FLOAT "i")? | "-"? FLOAT "i"
    vec      := term (("+"|"-") term)*        term := (cnum "*")? "|" BITS ">"
    stmt     := "skip" ";"
              | qlist ":=" KET ";"
              | qlist "*=" NAME ";"
              | "assert" pref "on" qlist ";"
              | "if" pref "on" qlist "{" stmt* "}" "else" "{" stmt* "}"
              | "while" pref "on" qlist "{" stmt* "}"
    qlist    := IDENT ("," IDENT)*
    pref     := "~"? NAME
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from qai.exceptions import ProgramSyntaxError, ValidationError
from qai.lang import (
    KEYWORDS,
    Assert,
    Diagnostic,
    If,
    Init,
    KetTerm,
    Program,
    SourceLocation,
    SpaceDecl,
    Stmt,
    Skip,
    Unitary,
    UnitaryDecl,
    While,
    validate,
)
from qai.linalg import QubitLayout

logger = logging.getLogger("qai")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<ket>\|[01]*>)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|\*=|[;,=()\[\]{}+\-*~])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ket", "number", "ident", "op" or "eof"
    value: str
    line: int
    col: int
    start: int
    end: int

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.value)


def tokenize(text: str) -> list[Token]:
    """Split *text* into tokens, dropping whitespace and comments."""
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ProgramSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1, "a token"
            )
        kind = match.lastgroup or ""
        value = match.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, line, pos - line_start + 1, pos, match.end()))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = match.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos, pos))
    return tokens


class Parser:
    """Token cursor with ``accept``/``expect`` helpers."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    # -- cursor --------------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def consume(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, value: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind in ("op", "ident") and tok.value == value

    def accept(self, value: str) -> Token | None:
        if self.at(value):
            return self.consume()
        return None

    def expect(self, value: str) -> Token:
        tok = self.accept(value)
        if tok is None:
            self.fail(f"'{value}'")
        return tok  # type: ignore[return-value]

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.peek().kind != kind:
            self.fail(what)
        return self.consume()

    def fail(self, expected: str) -> None:
        tok = self.peek()
        raise ProgramSyntaxError(
            f"expected {expected}, found {tok.describe()}", tok.line, tok.col, expected
        )

    def location(self, first: Token) -> SourceLocation:
        last = self.tokens[self.pos - 1]
        return SourceLocation(first.line, first.col, first.start, last.end)

    def name(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.value in KEYWORDS:
            self.fail("a name")
        return self.consume()

    # -- program -------------------------------------------------------------

    def program(self) -> Program:
        self.expect("qubits")
        names = [self.name()]
        while self.peek().kind == "ident" and not self.at(";"):
            names.append(self.name())
        self.expect(";")
        seen: set[str] = set()
        for tok in names:
            if tok.value in seen:
                self.diagnostics.append(
                    Diagnostic(
                        "DuplicateQubit",
                        f"qubit '{tok.value}' declared twice",
                        SourceLocation(tok.line, tok.col, tok.start, tok.end),
                    )
                )
            seen.add(tok.value)
        if self.diagnostics:
            raise ValidationError(self.diagnostics)
        layout = QubitLayout(tuple(t.value for t in names))

        unitaries: list[UnitaryDecl] = []
        spaces: list[SpaceDecl] = []
        while self.at("unitary") or self.at("space"):
            if self.at("unitary"):
                unitaries.append(self.unitary_decl())
            else:
                spaces.append(self.space_decl())
        body = self.statements(until="eof")
        return Program(layout, tuple(unitaries), tuple(spaces), body, source=self.text)

    def unitary_decl(self) -> UnitaryDecl:
        first = self.expect("unitary")
        name = self.name().value
        self.expect("=")
        self.expect("[")
        rows = [self.row()]
        while self.accept(","):
            rows.append(self.row())
        self.expect("]")
        self.expect(";")
        return UnitaryDecl(name, tuple(rows), self.location(first))

    def row(self) -> tuple[complex, ...]:
        self.expect("[")
        entries = [self.cnum()]
        while self.accept(","):
            entries.append(self.cnum())
        self.expect("]")
        return tuple(entries)

    def space_decl(self) -> SpaceDecl:
        first = self.expect("space")
        name = self.name().value
        self.expect("=")
        self.expect("span")
        self.expect("(")
        vectors = [self.vec()]
        while self.accept(","):
            vectors.append(self.vec())
        self.expect(")")
        self.expect(";")
        return SpaceDecl(name, tuple(vectors), self.location(first))

    def number(self) -> float:
        return float(self.expect_kind("number", "a number").value)

    def _imaginary_unit_follows(self, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind == "ident" and tok.value == "i"

    def cnum(self) -> complex:
        sign = -1.0 if self.accept("-") else 1.0
        real = sign * self.number()
        if self._imaginary_unit_follows():
            self.consume()
            return complex(0.0, real)
        if (
            (self.at("+") or self.at("-"))
            and self.peek(1).kind == "number"
            and self._imaginary_unit_follows(2)
        ):
            imag_sign = 1.0 if self.consume().value == "+" else -1.0
            imag = imag_sign * self.number()
            self.consume()
            return complex(real, imag)
        return complex(real, 0.0)

    def term(self, negate: bool) -> KetTerm:
        coeff = 1 + 0j
        if self.peek().kind != "ket":
            coeff = self.cnum()
            self.expect("*")
        tok = self.expect_kind("ket", "a ket such as |01>")
        bits = tok.value[1:-1]
        if not bits:
            raise ProgramSyntaxError(
                "expected a non-empty ket, found '|>'", tok.line, tok.col, "a non-empty ket"
            )
        return KetTerm(-coeff if negate else coeff, bits)

    def vec(self) -> tuple[KetTerm, ...]:
        terms = [self.term(negate=False)]
        while self.at("+") or self.at("-"):
            negate = self.consume().value == "-"
            terms.append(self.term(negate))
        return tuple(terms)

    # -- statements ----------------------------------------------------------

    def statements(self, until: str) -> tuple[Stmt, ...]:
        body: list[Stmt] = []
        while not (self.peek().kind == "eof" if until == "eof" else self.at(until)):
            if self.peek().kind == "eof":
                self.fail(f"'{until}'")
            body.append(self.statement())
        return tuple(body)

    def block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        body = self.statements(until="}")
        self.expect("}")
        return body

    def qlist(self) -> tuple[str, ...]:
        names = [self.name().value]
        while self.accept(","):
            names.append(self.name().value)
        return tuple(names)

    def pref(self) -> tuple[str, bool]:
        negated = self.accept("~") is not None
        tok = self.peek()
        if tok.kind != "ident" or (tok.value in KEYWORDS):
            self.fail("a space name")
        return self.consume().value, negated

    def statement(self) -> Stmt:
        first = self.peek()
        if self.accept("skip"):
            self.expect(";")
            return Skip(loc=self.location(first))
        if self.accept("assert"):
            space, negated = self.pref()
            self.expect("on")
            targets = self.qlist()
            self.expect(";")
            return Assert(targets, space, negated, loc=self.location(first))
        if self.accept("if"):
            space, negated = self.pref()
            self.expect("on")
            targets = self.qlist()
            then_body = self.block()
            self.expect("else")
            else_body = self.block()
            return If(targets, space, then_body, else_body, negated, loc=self.location(first))
        if self.accept("while"):
            space, negated = self.pref()
            self.expect("on")
            targets = self.qlist()
            body = self.block()
            return While(targets, space, body, negated, loc=self.location(first))
        if first.kind == "ident" and first.value not in KEYWORDS:
            targets = self.qlist()
            if self.accept(":="):
                ket_tok = self.expect_kind("ket", "'|0>'")
                bits = ket_tok.value[1:-1]
                if "1" in bits or not bits:
                    raise ProgramSyntaxError(
                        f"initialisation must use |0>, found {ket_tok.value}",
                        ket_tok.line,
                        ket_tok.col,
                        "'|0>'",
                    )
                self.expect(";")
                loc = self.location(first)
                if len(bits) not in (1, len(targets)):
                    self.diagnostics.append(
                        Diagnostic(
                            "DimensionMismatch",
                            f"{ket_tok.value} has width {len(bits)}, initialising {len(targets)} qubit(s)",
                            loc,
                        )
                    )
                return Init(targets, loc=loc)
            if self.accept("*="):
                gate = self.expect_kind("ident", "a unitary name").value
                self.expect(";")
                return Unitary(targets, gate, loc=self.location(first))
            self.fail("':=' or '*='")
        self.fail("a statement")
        raise AssertionError("unreachable")


def parse(text: str) -> Program:
    """
    Parse and validate program text.

    Raises:
        ProgramSyntaxError: On malformed text, with line, column and the
            expected token.
        ValidationError: When the program is well-formed text but violates a
            well-formedness rule; carries every diagnostic.
    """
    parser = Parser(text)
    program = parser.program()
    diagnostics = parser.diagnostics + validate(program)
    if diagnostics:
        raise ValidationError(diagnostics)
    logger.debug(
        "Parsed program: %d qubit(s), %d statement(s)", program.layout.n, len(program.body)
    )
    return program


def parse_fragment(text: str, context: Program) -> tuple[Stmt, ...]:
    """
    Parse a statement sequence against the declarations of *context*.

    Used to read back the program fragments recorded in derivations.
    """
    parser = Parser(text)
    body = parser.statements(until="eof")
    diagnostics = parser.diagnostics + validate(context.with_body(body))
    if diagnostics:
        raise ValidationError(diagnostics)
    return body
