"""
Source rendering for programs.

Produces program text from ``Program`` and ``Stmt`` values such that
``parse(pretty(p)) == p``. Floats are written with ``repr`` so every
coefficient survives the round trip bit for bit.

All functions are pure.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

from qai.lang import (
    Assert,
    If,
    Init,
    KetTerm,
    Program,
    Skip,
    SpaceDecl,
    Stmt,
    Unitary,
    UnitaryDecl,
    While,
)

INDENT = "    "

StmtRenderer = Callable[[Stmt, int], list[str]]

# ---------------------------------------------------------------------------
# Literals
# ---------------------------------------------------------------------------


def format_complex(z: complex) -> str:
    """``a``, ``a+bi`` or ``a-bi`` with shortest round-trip floats."""
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    sign = "+" if z.imag > 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def format_term(term: KetTerm) -> str:
    ket = f"|{term.bits}>"
    if term.coeff == 1:
        return ket
    return f"{format_complex(term.coeff)}*{ket}"


def format_vector(terms: Sequence[KetTerm]) -> str:
    return " + ".join(format_term(t) for t in terms)


def _targets(targets: Sequence[str]) -> str:
    return ", ".join(targets)


def _pref(space: str, negated: bool) -> str:
    return f"~{space}" if negated else space


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------


def render_unitary_decl(decl: UnitaryDecl) -> str:
    rows = [f"[{', '.join(format_complex(z) for z in row)}]" for row in decl.rows]
    if len(rows) <= 2:
        return f"unitary {decl.name} = [{', '.join(rows)}];"
    inner = (",\n" + INDENT).join(rows)
    return f"unitary {decl.name} = [\n{INDENT}{inner}\n];"


def render_space_decl(decl: SpaceDecl) -> str:
    vectors = ", ".join(format_vector(v) for v in decl.vectors)
    return f"space {decl.name} = span({vectors});"


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------

# The registry: statement type -> renderer producing indented lines
RENDERERS: dict[type[Stmt], StmtRenderer] = {}


def _register_renderer(stmt_type: type[Stmt]):
    def decorator(func: StmtRenderer) -> StmtRenderer:
        RENDERERS[stmt_type] = func
        return func

    return decorator


def _block(body: Sequence[Stmt], depth: int) -> list[str]:
    lines: list[str] = []
    for stmt in body:
        lines.extend(render_stmt(stmt, depth))
    return lines


@_register_renderer(Skip)
def _skip_source(stmt: Stmt, depth: int) -> list[str]:
    return [INDENT * depth + "skip;"]


@_register_renderer(Init)
def _init_source(stmt: Stmt, depth: int) -> list[str]:
    assert isinstance(stmt, Init)
    return [INDENT * depth + f"{_targets(stmt.targets)} := |0>;"]


@_register_renderer(Unitary)
def _unitary_source(stmt: Stmt, depth: int) -> list[str]:
    assert isinstance(stmt, Unitary)
    return [INDENT * depth + f"{_targets(stmt.targets)} *= {stmt.gate};"]


@_register_renderer(Assert)
def _assert_source(stmt: Stmt, depth: int) -> list[str]:
    assert isinstance(stmt, Assert)
    return [INDENT * depth + f"assert {_pref(stmt.space, stmt.negated)} on {_targets(stmt.targets)};"]


@_register_renderer(If)
def _if_source(stmt: Stmt, depth: int) -> list[str]:
    assert isinstance(stmt, If)
    pad = INDENT * depth
    head = f"{pad}if {_pref(stmt.space, stmt.negated)} on {_targets(stmt.targets)} {{"
    return [
        head,
        *_block(stmt.then_body, depth + 1),
        f"{pad}}} else {{",
        *_block(stmt.else_body, depth + 1),
        f"{pad}}}",
    ]


@_register_renderer(While)
def _while_source(stmt: Stmt, depth: int) -> list[str]:
    assert isinstance(stmt, While)
    pad = INDENT * depth
    head = f"{pad}while {_pref(stmt.space, stmt.negated)} on {_targets(stmt.targets)} {{"
    return [head, *_block(stmt.body, depth + 1), f"{pad}}}"]


def render_stmt(stmt: Stmt, depth: int = 0) -> list[str]:
    return RENDERERS[type(stmt)](stmt, depth)


def fragment_text(body: Sequence[Stmt]) -> str:
    """Source text of a statement sequence (no header or declarations)."""
    return "\n".join(_block(body, 0))


def pretty(p: Program) -> str:
    """Full program text: header, declarations, body."""
    lines = [f"qubits {' '.join(p.layout.order)};"]
    lines.extend(render_unitary_decl(d) for d in p.unitaries)
    lines.extend(render_space_decl(d) for d in p.spaces)
    lines.extend(_block(p.body, 0))
    return "\n".join(lines) + "\n"
