"""
Builtin gates and spaces.

Gates are registered with ``register_gate`` and looked up by the name used
in program text. Multi-qubit gates list their factors in target order: for
``q0, q1 *= CNOT`` the control is ``q0``.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from qai.linalg import ComplexMatrix, ket
from qai.subspace import Subspace

GateFactory = Callable[[], ComplexMatrix]

# The main registry: gate name -> matrix factory
GATE_MAP: dict[str, GateFactory] = {}

BUILTIN_SPACES = ("zero", "one", "full")


def register_gate(name: str):
    """Decorator to register a builtin gate under *name*."""

    def decorator(func: GateFactory) -> GateFactory:
        GATE_MAP[name] = func
        return func

    return decorator


@register_gate("I")
def _identity() -> ComplexMatrix:
    return np.eye(2, dtype=np.complex128)


@register_gate("H")
def _hadamard() -> ComplexMatrix:
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


@register_gate("X")
def _pauli_x() -> ComplexMatrix:
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


@register_gate("Y")
def _pauli_y() -> ComplexMatrix:
    return np.array([[0, -1j], [1j, 0]], dtype=np.complex128)


@register_gate("Z")
def _pauli_z() -> ComplexMatrix:
    return np.diag([1, -1]).astype(np.complex128)


@register_gate("S")
def _phase() -> ComplexMatrix:
    return np.diag([1, 1j]).astype(np.complex128)


@register_gate("T")
def _t_gate() -> ComplexMatrix:
    return np.diag([1, np.exp(1j * np.pi / 4)]).astype(np.complex128)


@register_gate("CNOT")
def _cnot() -> ComplexMatrix:
    m = np.eye(4, dtype=np.complex128)
    m[[2, 3]] = m[[3, 2]]
    return m


@register_gate("CZ")
def _cz() -> ComplexMatrix:
    return np.diag([1, 1, 1, -1]).astype(np.complex128)


@register_gate("SWAP")
def _swap() -> ComplexMatrix:
    m = np.eye(4, dtype=np.complex128)
    m[[1, 2]] = m[[2, 1]]
    return m


def is_builtin_gate(name: str) -> bool:
    return name in GATE_MAP


def gate_matrix(name: str) -> ComplexMatrix:
    return GATE_MAP[name]()


def builtin_space(name: str, width: int) -> Subspace:
    """``zero``, ``one`` or ``full`` over *width* qubits."""
    if name == "zero":
        return Subspace(ket("0" * width))
    if name == "one":
        return Subspace(ket("1" * width))
    if name == "full":
        return Subspace.full(2**width)
    raise KeyError(name)
