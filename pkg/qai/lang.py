"""
AST and validation for the quantum while-language.

A ``Program`` declares its qubits (the tensor layout), named unitaries and
named spaces, and holds a statement body. Statements are immutable and
compare structurally; source locations are carried along for diagnostics
but ignored by equality.

Conditionals and loops measure ``{P, P^perp}`` on their targets: the
``then`` branch and the loop body run on the ``P`` outcome.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from qai.gates import BUILTIN_SPACES, builtin_space, gate_matrix, is_builtin_gate
from qai.linalg import ComplexMatrix, QubitLayout, embed, is_unitary, ket
from qai.subspace import Subspace, orthocomplement, projector

logger = logging.getLogger("qai")

KEYWORDS = frozenset(
    {"qubits", "unitary", "space", "span", "skip", "assert", "on", "if", "else", "while"}
)


@dataclass(frozen=True)
class SourceLocation:
    """Position of a construct in program text."""

    line: int  # 1-based
    col: int  # 1-based
    start: int = 0  # character offset of the first token
    end: int = 0  # character offset just past the last token

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    """A well-formedness violation found by ``validate``."""

    kind: str  # e.g. "DuplicateTarget", "NotUnitary"
    message: str
    loc: SourceLocation | None

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc is not None else ""
        return f"{where}{self.kind}: {self.message}"


# -- statements --------------------------------------------------------------


@dataclass(frozen=True)
class Stmt:
    """Base class of all statements."""

    loc: SourceLocation | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class Init(Stmt):
    targets: tuple[str, ...]


@dataclass(frozen=True)
class Unitary(Stmt):
    targets: tuple[str, ...]
    gate: str


@dataclass(frozen=True)
class Assert(Stmt):
    targets: tuple[str, ...]
    space: str
    negated: bool = False  # asserts the orthocomplement of `space`


@dataclass(frozen=True)
class If(Stmt):
    targets: tuple[str, ...]
    space: str
    then_body: tuple[Stmt, ...]
    else_body: tuple[Stmt, ...]
    negated: bool = False


@dataclass(frozen=True)
class While(Stmt):
    targets: tuple[str, ...]
    space: str
    body: tuple[Stmt, ...]
    negated: bool = False


BasicStmt = Skip | Init | Unitary | Assert
BASIC_TYPES = (Skip, Init, Unitary, Assert)


def is_basic(stmt: Stmt) -> bool:
    return isinstance(stmt, BASIC_TYPES)


def guard(stmt: If | While) -> Assert:
    """``assert P on q`` for the branch that runs the then-body / loop body."""
    return Assert(stmt.targets, stmt.space, stmt.negated)


def exit_guard(stmt: If | While) -> Assert:
    """``assert P^perp on q`` for the else branch / loop exit."""
    return Assert(stmt.targets, stmt.space, not stmt.negated)


def walk(body: Sequence[Stmt]) -> Iterator[Stmt]:
    """Yield every statement of *body*, depth first."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            yield from walk(stmt.then_body)
            yield from walk(stmt.else_body)
        elif isinstance(stmt, While):
            yield from walk(stmt.body)


def span_of(body: Sequence[Stmt]) -> tuple[int, int] | None:
    """Character range covered by *body*, if every statement has a location."""
    if not body or body[0].loc is None or body[-1].loc is None:
        return None
    return (body[0].loc.start, body[-1].loc.end)


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class KetTerm:
    coeff: complex
    bits: str


@dataclass(frozen=True)
class UnitaryDecl:
    """``unitary NAME = [[...], ...];``"""

    name: str
    rows: tuple[tuple[complex, ...], ...]
    loc: SourceLocation | None = field(default=None, compare=False, repr=False)

    def matrix(self) -> ComplexMatrix:
        return np.array(self.rows, dtype=np.complex128)

    @classmethod
    def from_matrix(cls, name: str, m: ComplexMatrix) -> UnitaryDecl:
        return cls(name, tuple(tuple(complex(z) for z in row) for row in np.asarray(m)))


@dataclass(frozen=True)
class SpaceDecl:
    """``space NAME = span(vec, ...);``"""

    name: str
    vectors: tuple[tuple[KetTerm, ...], ...]
    loc: SourceLocation | None = field(default=None, compare=False, repr=False)

    @property
    def width(self) -> int:
        return len(self.vectors[0][0].bits) if self.vectors and self.vectors[0] else 0

    def widths(self) -> set[int]:
        return {len(term.bits) for vec in self.vectors for term in vec}

    def vector_arrays(self) -> list[ComplexMatrix]:
        width = self.width
        out = []
        for vec in self.vectors:
            v = np.zeros(2**width, dtype=np.complex128)
            for term in vec:
                v += term.coeff * ket(term.bits)[:, 0]
            out.append(v)
        return out

    def subspace(self) -> Subspace:
        return Subspace.span(self.vector_arrays(), ambient_dim=2**self.width)

    @classmethod
    def from_vectors(cls, name: str, vectors: Sequence[ComplexMatrix], width: int) -> SpaceDecl:
        """Declaration spanning *vectors*; zero amplitudes are omitted."""
        decl_vectors = []
        for v in vectors:
            flat = np.asarray(v, dtype=np.complex128).reshape(-1)
            terms = tuple(
                KetTerm(complex(amp), format(i, f"0{width}b"))
                for i, amp in enumerate(flat)
                if amp != 0
            )
            decl_vectors.append(terms or (KetTerm(0j, "0" * width),))
        return cls(name, tuple(decl_vectors))


# -- program -----------------------------------------------------------------


@dataclass(frozen=True)
class Program:
    """A parsed and validated program."""

    layout: QubitLayout
    unitaries: tuple[UnitaryDecl, ...] = ()
    spaces: tuple[SpaceDecl, ...] = ()
    body: tuple[Stmt, ...] = ()
    source: str | None = field(default=None, compare=False, repr=False)

    def with_body(self, body: Sequence[Stmt]) -> Program:
        return replace(self, body=tuple(body))

    def unitary_decl(self, name: str) -> UnitaryDecl | None:
        return next((d for d in self.unitaries if d.name == name), None)

    def space_decl(self, name: str) -> SpaceDecl | None:
        return next((d for d in self.spaces if d.name == name), None)

    def gate(self, name: str) -> ComplexMatrix:
        decl = self.unitary_decl(name)
        if decl is not None:
            return decl.matrix()
        return gate_matrix(name)

    def local_space(self, name: str, width: int, negated: bool = False) -> Subspace:
        decl = self.space_decl(name)
        space = decl.subspace() if decl is not None else builtin_space(name, width)
        return orthocomplement(space) if negated else space

    def unitary_operator(self, stmt: Unitary) -> ComplexMatrix:
        """Global matrix of ``targets *= gate``."""
        return embed(self.gate(stmt.gate), stmt.targets, self.layout)

    def projector_operator(self, stmt: Assert | If | While, negated: bool | None = None) -> ComplexMatrix:
        """Global projector asserted by *stmt* (or its complement when *negated* flips it)."""
        flip = stmt.negated if negated is None else negated
        local = self.local_space(stmt.space, len(stmt.targets), flip)
        return embed(projector(local), stmt.targets, self.layout)


# -- validation --------------------------------------------------------------


def _check_targets(stmt: Stmt, targets: tuple[str, ...], layout: QubitLayout) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    if not targets:
        diags.append(Diagnostic("DimensionMismatch", "statement has no targets", stmt.loc))
    if len(set(targets)) != len(targets):
        diags.append(
            Diagnostic("DuplicateTarget", f"targets {', '.join(targets)} are not distinct", stmt.loc)
        )
    for name in targets:
        if name not in layout.index:
            diags.append(Diagnostic("UnknownVariable", f"qubit '{name}' is not declared", stmt.loc))
    return diags


def _check_space_ref(p: Program, stmt: Assert | If | While) -> list[Diagnostic]:
    width = len(stmt.targets)
    decl = p.space_decl(stmt.space)
    if decl is None:
        if stmt.space in BUILTIN_SPACES:
            return []
        return [Diagnostic("UnknownSpace", f"space '{stmt.space}' is not declared", stmt.loc)]
    if decl.width != width:
        return [
            Diagnostic(
                "DimensionMismatch",
                f"space '{stmt.space}' has ambient dimension {2**decl.width}, "
                f"asserted on {width} qubit(s)",
                stmt.loc,
            )
        ]
    return []


def _check_stmt(p: Program, stmt: Stmt) -> list[Diagnostic]:
    if isinstance(stmt, Skip):
        return []
    diags = _check_targets(stmt, stmt.targets, p.layout)  # type: ignore[attr-defined]
    if isinstance(stmt, Unitary):
        decl = p.unitary_decl(stmt.gate)
        if decl is None and not is_builtin_gate(stmt.gate):
            diags.append(Diagnostic("UnknownUnitary", f"unitary '{stmt.gate}' is not declared", stmt.loc))
        else:
            m = p.gate(stmt.gate)
            expected = 2 ** len(stmt.targets)
            if m.shape != (expected, expected):
                diags.append(
                    Diagnostic(
                        "DimensionMismatch",
                        f"unitary '{stmt.gate}' is {m.shape[0]}x{m.shape[1]}, "
                        f"applied to {len(stmt.targets)} qubit(s)",
                        stmt.loc,
                    )
                )
    elif isinstance(stmt, (Assert, If, While)):
        diags.extend(_check_space_ref(p, stmt))
    return diags


def _check_decls(p: Program) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen: set[str] = set()
    for decl in (*p.unitaries, *p.spaces):
        if decl.name in seen:
            diags.append(Diagnostic("DuplicateDeclaration", f"'{decl.name}' is declared twice", decl.loc))
        seen.add(decl.name)
        if decl.name in KEYWORDS or decl.name in BUILTIN_SPACES or is_builtin_gate(decl.name):
            diags.append(Diagnostic("ReservedName", f"'{decl.name}' is a reserved name", decl.loc))
    for udecl in p.unitaries:
        rows = udecl.rows
        if not rows or any(len(r) != len(rows) for r in rows):
            diags.append(Diagnostic("DimensionMismatch", f"unitary '{udecl.name}' is not square", udecl.loc))
            continue
        n = len(rows)
        if n & (n - 1):
            diags.append(
                Diagnostic("DimensionMismatch", f"unitary '{udecl.name}' has size {n}, not a power of 2", udecl.loc)
            )
        elif not is_unitary(udecl.matrix()):
            diags.append(Diagnostic("NotUnitary", f"'{udecl.name}' is not unitary", udecl.loc))
    for sdecl in p.spaces:
        if len(sdecl.widths()) > 1:
            diags.append(
                Diagnostic(
                    "InconsistentKetWidth",
                    f"vectors of space '{sdecl.name}' use kets of different widths",
                    sdecl.loc,
                )
            )
    return diags


def _is_square_power_of_two(rows: tuple[tuple[complex, ...], ...]) -> bool:
    n = len(rows)
    return n > 0 and not n & (n - 1) and all(len(r) == n for r in rows)


def validate(p: Program) -> list[Diagnostic]:
    """Return every well-formedness violation of *p*; empty means valid."""
    diags = _check_decls(p)
    broken_unitaries = {d.name for d in p.unitaries if not _is_square_power_of_two(d.rows)}
    for stmt in walk(p.body):
        if isinstance(stmt, Unitary) and stmt.gate in broken_unitaries:
            diags.extend(_check_targets(stmt, stmt.targets, p.layout))
            continue
        diags.extend(_check_stmt(p, stmt))
    if diags:
        logger.debug("validate: %d diagnostic(s)", len(diags))
    return diags
