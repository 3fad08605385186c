"""
JSON documents for subspaces, states, abstract elements, derivations and
program ASTs.

Complex numbers are written as ``[re, im]`` pairs. Floats go through
``json``'s shortest round-trip ``repr``, so decoding restores every
double exactly.

Decoders raise ``SerializationError`` on malformed documents; numerical
problems with well-formed documents (a non-PSD state, say) surface as the
corresponding linear-algebra error.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Callable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from qai.concrete import State
from qai.conf import get_tolerances
from qai.domains import AbstractElement, DomainKind, Signature
from qai.exceptions import QaiError, SerializationError
from qai.lang import Assert, If, Init, Program, Skip, Stmt, Unitary, While
from qai.linalg import ComplexMatrix, QubitLayout, ket, reorder_qubits
from qai.logic import Derivation, OrderCheck, Rule
from qai.parser import parse_fragment
from qai.printer import fragment_text
from qai.subspace import Subspace

logger = logging.getLogger("qai")


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(value: Any) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value, 0.0)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    raise SerializationError(f"Expected a number or an [re, im] pair, got {value!r}")


def encode_matrix(m: ComplexMatrix) -> list[list[list[float]]]:
    return [[encode_complex(z) for z in row] for row in np.asarray(m)]


def decode_matrix(value: Any) -> ComplexMatrix:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise SerializationError("Expected a non-empty list of rows")
    if len({len(r) for r in value}) != 1:
        raise SerializationError("Matrix rows have different lengths")
    return np.array([[decode_complex(z) for z in row] for row in value], dtype=np.complex128)


def _field(data: Any, key: str, what: str) -> Any:
    if not isinstance(data, Mapping):
        raise SerializationError(f"{what} must be a JSON object")
    try:
        return data[key]
    except KeyError:
        raise SerializationError(f"{what} is missing '{key}'") from None


def _layout(value: Any) -> QubitLayout:
    if not isinstance(value, list) or not value or not all(isinstance(n, str) for n in value):
        raise SerializationError("'layout' must be a non-empty list of qubit names")
    try:
        return QubitLayout(tuple(value))
    except QaiError as exc:
        raise SerializationError(f"Invalid layout: {exc}") from exc


def load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise SerializationError(f"Cannot read '{path}': {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SerializationError(f"'{path}' is not valid JSON: {exc}") from exc


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2)


# ---------------------------------------------------------------------------
# Subspaces and states
# ---------------------------------------------------------------------------


def subspace_to_json(s: Subspace) -> dict[str, Any]:
    return {
        "ambient_dim": s.ambient_dim,
        "basis": [[encode_complex(z) for z in v.ravel()] for v in s.vectors()],
    }


def subspace_from_json(data: Any) -> Subspace:
    """
    Read ``{"ambient_dim": d, "basis": [...]}``.

    ``{"kets": ["00", "11"]}`` is accepted as shorthand for the span of
    computational basis states. An orthonormal basis (within ``incl_tol``)
    is kept as written; any other list of vectors is replaced by an
    orthonormal basis of its span.
    """
    if isinstance(data, Mapping) and "kets" in data:
        kets = data["kets"]
        if not isinstance(kets, list) or not kets or not all(isinstance(k, str) for k in kets):
            raise SerializationError("'kets' must be a non-empty list of bit strings")
        if len({len(k) for k in kets}) != 1 or any(set(k) - {"0", "1"} for k in kets):
            raise SerializationError(f"Invalid kets {kets!r}")
        return Subspace.from_kets(*kets)
    dim = _field(data, "ambient_dim", "Subspace")
    if not isinstance(dim, int) or dim < 1:
        raise SerializationError(f"'ambient_dim' must be a positive integer, got {dim!r}")
    vectors = _field(data, "basis", "Subspace")
    if not isinstance(vectors, list):
        raise SerializationError("'basis' must be a list of vectors")
    decoded = []
    for v in vectors:
        if not isinstance(v, list) or len(v) != dim:
            raise SerializationError(f"Basis vectors must have {dim} entries")
        decoded.append(np.array([decode_complex(z) for z in v], dtype=np.complex128))
    if not decoded:
        return Subspace.zero(dim)
    basis = np.column_stack(decoded)
    gram = basis.conj().T @ basis
    if basis.shape[1] <= dim and np.max(np.abs(gram - np.eye(basis.shape[1]))) <= get_tolerances().incl_tol:
        return Subspace(basis)
    return Subspace.span(decoded, dim)


def state_to_json(state: State) -> dict[str, Any]:
    return {"layout": list(state.layout.order), "rho": encode_matrix(state.rho)}


def state_from_json(data: Any, layout: QubitLayout | None = None) -> State:
    """
    Read ``{"layout": [...], "rho": [[...]]}``.

    ``"vector"`` (a state vector) or ``"bits"`` (a computational basis
    state) may replace ``"rho"``. *layout* is used when the document has none.
    """
    if isinstance(data, Mapping) and "layout" in data:
        layout = _layout(data["layout"])
    elif layout is None:
        raise SerializationError("State is missing 'layout'")
    if isinstance(data, Mapping) and "bits" in data:
        bits = data["bits"]
        if not isinstance(bits, str) or len(bits) != layout.n or set(bits) - {"0", "1"}:
            raise SerializationError(f"'bits' must be {layout.n} binary digits")
        return State.pure(ket(bits), layout)
    if isinstance(data, Mapping) and "vector" in data:
        vector = data["vector"]
        if not isinstance(vector, list):
            raise SerializationError("'vector' must be a list of amplitudes")
        return State.pure(np.array([decode_complex(z) for z in vector]), layout)
    return State(decode_matrix(_field(data, "rho", "State")), layout)


# ---------------------------------------------------------------------------
# Abstract elements
# ---------------------------------------------------------------------------


def element_to_json(e: AbstractElement) -> dict[str, Any]:
    signature = None if e.kind.signature is None else [list(s) for s in e.kind.signature.subsets]
    return {
        "kind": e.kind.name,
        "signature": signature,
        "layout": list(e.layout.order),
        "parts": [subspace_to_json(p) for p in e.parts],
    }


def _in_layout_order(part: Subspace, names: tuple[str, ...], ordered: tuple[str, ...]) -> Subspace:
    if names == ordered or part.ambient_dim != 2 ** len(names):
        return part
    return Subspace(reorder_qubits(part.basis, names, ordered))


def element_from_json(data: Any, layout: QubitLayout | None = None) -> AbstractElement:
    """
    Read an abstract element.

    The document's ``"layout"`` must agree with *layout* when both are
    given; the signature is checked against the layout. Local parts are
    read over their subset in the order written and rewritten into layout
    order.
    """
    kind_name = _field(data, "kind", "Abstract element")
    if "layout" in data and data["layout"] is not None:
        own = _layout(data["layout"])
        if layout is not None and own != layout:
            raise SerializationError(
                f"Element is over qubits {list(own.order)}, expected {list(layout.order)}"
            )
        layout = own
    if layout is None:
        raise SerializationError("Abstract element is missing 'layout'")
    if kind_name == "subspace":
        kind = DomainKind.subspace()
    elif kind_name == "local":
        subsets = _field(data, "signature", "Local element")
        if not isinstance(subsets, list) or not all(
            isinstance(s, list) and all(isinstance(n, str) for n in s) for s in subsets
        ):
            raise SerializationError("'signature' must be a list of lists of qubit names")
        written = tuple(tuple(s) for s in subsets)
        try:
            kind = DomainKind.local(Signature(written)).bind(layout)
        except QaiError as exc:
            raise SerializationError(f"Invalid signature: {exc}") from exc
    else:
        raise SerializationError(f"Unknown element kind {kind_name!r}")
    parts = _field(data, "parts", "Abstract element")
    if not isinstance(parts, list):
        raise SerializationError("'parts' must be a list")
    try:
        decoded = [subspace_from_json(p) for p in parts]
        if kind.signature is not None:
            decoded = [
                _in_layout_order(part, names, ordered)
                for part, names, ordered in zip(decoded, written, kind.signature.subsets)
            ] + decoded[len(written) :]
        return AbstractElement(kind, layout, decoded)
    except QaiError as exc:
        if isinstance(exc, SerializationError):
            raise
        raise SerializationError(f"Invalid abstract element: {exc}") from exc


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------


def derivation_to_json(d: Derivation) -> dict[str, Any]:
    return {
        "rule": d.rule.value,
        "conclusion": {
            "pre": element_to_json(d.pre),
            "post": element_to_json(d.post),
            "program": fragment_text(d.program),
            "program_span": list(d.span) if d.span is not None else None,
        },
        "premises": [derivation_to_json(p) for p in d.premises],
        "side": [
            {"lhs": element_to_json(c.lhs), "rhs": element_to_json(c.rhs), "residual": c.residual}
            for c in d.side
        ],
    }


def derivation_from_json(data: Any, program: Program) -> Derivation:
    """Read a derivation whose fragments refer to the declarations of *program*."""
    layout = program.layout
    try:
        rule = Rule(_field(data, "rule", "Derivation node"))
    except ValueError as exc:
        raise SerializationError(f"Unknown rule {data.get('rule')!r}") from exc
    conclusion = _field(data, "conclusion", "Derivation node")
    text = _field(conclusion, "program", "Conclusion")
    if not isinstance(text, str):
        raise SerializationError("'program' must be fragment text")
    fragment = parse_fragment(text, program)
    premises = _field(data, "premises", "Derivation node")
    side = data.get("side", [])
    if not isinstance(premises, list) or not isinstance(side, list):
        raise SerializationError("'premises' and 'side' must be lists")
    checks = []
    for record in side:
        residual = _field(record, "residual", "Side record")
        if not isinstance(residual, (int, float)):
            raise SerializationError("'residual' must be a number")
        checks.append(
            OrderCheck(
                element_from_json(_field(record, "lhs", "Side record"), layout),
                element_from_json(_field(record, "rhs", "Side record"), layout),
                float(residual),
            )
        )
    return Derivation(
        rule,
        element_from_json(_field(conclusion, "pre", "Conclusion"), layout),
        fragment,
        element_from_json(_field(conclusion, "post", "Conclusion"), layout),
        tuple(derivation_from_json(p, program) for p in premises),
        tuple(checks),
    )


# ---------------------------------------------------------------------------
# Program AST
# ---------------------------------------------------------------------------

StmtEncoder = Callable[[Stmt], dict[str, Any]]

# The registry: statement type -> AST encoder
ENCODERS: dict[type[Stmt], StmtEncoder] = {}


def _register_encoder(stmt_type: type[Stmt]):
    def decorator(func: StmtEncoder) -> StmtEncoder:
        ENCODERS[stmt_type] = func
        return func

    return decorator


def _guarded(stmt: Assert | If | While) -> dict[str, Any]:
    return {"targets": list(stmt.targets), "space": stmt.space, "negated": stmt.negated}


@_register_encoder(Skip)
def _skip_json(stmt: Stmt) -> dict[str, Any]:
    return {"type": "skip"}


@_register_encoder(Init)
def _init_json(stmt: Stmt) -> dict[str, Any]:
    assert isinstance(stmt, Init)
    return {"type": "init", "targets": list(stmt.targets)}


@_register_encoder(Unitary)
def _unitary_json(stmt: Stmt) -> dict[str, Any]:
    assert isinstance(stmt, Unitary)
    return {"type": "unitary", "targets": list(stmt.targets), "gate": stmt.gate}


@_register_encoder(Assert)
def _assert_json(stmt: Stmt) -> dict[str, Any]:
    assert isinstance(stmt, Assert)
    return {"type": "assert", **_guarded(stmt)}


@_register_encoder(If)
def _if_json(stmt: Stmt) -> dict[str, Any]:
    assert isinstance(stmt, If)
    return {
        "type": "if",
        **_guarded(stmt),
        "then": body_to_json(stmt.then_body),
        "else": body_to_json(stmt.else_body),
    }


@_register_encoder(While)
def _while_json(stmt: Stmt) -> dict[str, Any]:
    assert isinstance(stmt, While)
    return {"type": "while", **_guarded(stmt), "body": body_to_json(stmt.body)}


def stmt_to_json(stmt: Stmt) -> dict[str, Any]:
    data = ENCODERS[type(stmt)](stmt)
    if stmt.loc is not None:
        data["loc"] = {"line": stmt.loc.line, "col": stmt.loc.col}
    return data


def body_to_json(body: Sequence[Stmt]) -> list[dict[str, Any]]:
    return [stmt_to_json(s) for s in body]


def program_to_json(p: Program) -> dict[str, Any]:
    return {
        "qubits": list(p.layout.order),
        "unitaries": [{"name": d.name, "matrix": encode_matrix(d.matrix())} for d in p.unitaries],
        "spaces": [
            {
                "name": d.name,
                "vectors": [
                    [{"coeff": encode_complex(t.coeff), "bits": t.bits} for t in v] for v in d.vectors
                ],
            }
            for d in p.spaces
        ],
        "body": body_to_json(p.body),
    }
