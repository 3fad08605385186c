"""
Abstract domains over quantum states.

Two domains are provided:

- the *subspace* domain, whose elements are subspaces of the global
  Hilbert space, abstracting a set of states by the join of their supports;
- the *local* domain for a signature ``(s_1, ..., s_m)`` of proper qubit
  subsets, whose elements are tuples of subspaces, one per subset,
  abstracting a set of states by the supports of its reduced states.

Lattice operations on local elements are componentwise. Every local
element denotes the same set of states as one global subspace (the meet of
the cylindrical extensions of its components), returned by
``gamma_as_subspace``.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

from qai.exceptions import ConfigurationError, ShapeMismatch
from qai.linalg import QubitLayout, reduce_to
from qai.subspace import (
    Subspace,
    alpha_s,
    cylinder,
    equal,
    gamma_s_contains,
    inclusion_residual,
    join,
    leq,
    meet,
    reduced_support,
)

if TYPE_CHECKING:
    from qai.concrete import State

logger = logging.getLogger("qai")


@dataclass(frozen=True)
class Signature:
    """Tuple of proper, nonempty qubit subsets."""

    subsets: tuple[tuple[str, ...], ...]

    @classmethod
    def parse(cls, text: str) -> Signature:
        """Read ``"q1,q2;q2,q3"``."""
        subsets = []
        for chunk in text.split(";"):
            names = tuple(n.strip() for n in chunk.split(",") if n.strip())
            subsets.append(names)
        return cls(tuple(subsets))

    def validated(self, layout: QubitLayout) -> Signature:
        """Check against *layout* and return the subsets in layout order."""
        if not self.subsets:
            raise ConfigurationError("A signature needs at least one subset")
        normalized = []
        for subset in self.subsets:
            if not subset:
                raise ConfigurationError(f"Empty subset in signature {self}")
            ordered = layout.sorted(subset)  # raises UnknownVariable
            if len(ordered) != len(subset):
                raise ConfigurationError(f"Repeated qubit in signature subset {','.join(subset)}")
            if len(ordered) == layout.n:
                raise ConfigurationError(f"Signature subset {','.join(subset)} is not a proper subset")
            normalized.append(ordered)
        return Signature(tuple(normalized))

    def height(self) -> int:
        return sum(2 ** len(s) for s in self.subsets)

    def __len__(self) -> int:
        return len(self.subsets)

    def __str__(self) -> str:
        return ";".join(",".join(s) for s in self.subsets)


@dataclass(frozen=True)
class DomainKind:
    """The subspace domain (``signature is None``) or a local domain."""

    signature: Signature | None = None

    @classmethod
    def subspace(cls) -> DomainKind:
        return cls(None)

    @classmethod
    def local(cls, signature: Signature | str) -> DomainKind:
        if isinstance(signature, str):
            signature = Signature.parse(signature)
        return cls(signature)

    @classmethod
    def parse(cls, text: str, layout: QubitLayout | None = None) -> DomainKind:
        """Read ``"subspace"`` or ``"local:q1,q2;q2,q3"``."""
        text = text.strip()
        if text == "subspace":
            kind = cls.subspace()
        elif text.startswith("local:"):
            kind = cls.local(text[len("local:") :])
        else:
            raise ConfigurationError(f"Unknown domain {text!r}; use 'subspace' or 'local:SIG'")
        return kind.bind(layout) if layout is not None else kind

    @property
    def is_local(self) -> bool:
        return self.signature is not None

    @property
    def name(self) -> str:
        return "local" if self.is_local else "subspace"

    def bind(self, layout: QubitLayout) -> DomainKind:
        if self.signature is None:
            return self
        return DomainKind(self.signature.validated(layout))

    def part_dims(self, layout: QubitLayout) -> list[int]:
        if self.signature is None:
            return [layout.dim]
        return [2 ** len(s) for s in self.signature.subsets]

    def height(self, layout: QubitLayout) -> int:
        return layout.dim if self.signature is None else self.signature.height()

    def __str__(self) -> str:
        return "subspace" if self.signature is None else f"local:{self.signature}"


class AbstractElement:
    """An element of a subspace or local domain over a fixed layout."""

    __slots__ = ("kind", "layout", "parts")

    def __init__(self, kind: DomainKind, layout: QubitLayout, parts: Sequence[Subspace]) -> None:
        expected = kind.part_dims(layout)
        if len(parts) != len(expected):
            raise ShapeMismatch(f"{kind.name} element needs {len(expected)} part(s), got {len(parts)}")
        for i, (part, dim) in enumerate(zip(parts, expected)):
            if part.ambient_dim != dim:
                raise ShapeMismatch(f"Part {i} has ambient dimension {part.ambient_dim}, expected {dim}")
        self.kind = kind
        self.layout = layout
        self.parts: tuple[Subspace, ...] = tuple(parts)

    @classmethod
    def global_(cls, layout: QubitLayout, s: Subspace) -> AbstractElement:
        return cls(DomainKind.subspace(), layout, (s,))

    @property
    def subspace(self) -> Subspace:
        """The single part of a subspace-domain element."""
        if self.kind.is_local:
            raise ShapeMismatch("A local element has no single subspace; use gamma_as_subspace")
        return self.parts[0]

    def __repr__(self) -> str:
        dims = ", ".join(str(p.dim) for p in self.parts)
        return f"AbstractElement({self.kind}, dims=({dims}))"


def _check_shape(a: AbstractElement, b: AbstractElement) -> None:
    if a.kind != b.kind or a.layout != b.layout:
        raise ShapeMismatch(f"Cannot combine {a.kind} and {b.kind} elements")


def check_kind(kind: DomainKind, e: AbstractElement) -> None:
    if kind != e.kind:
        raise ShapeMismatch(f"Element of {e.kind} used with domain {kind}")


def dom_leq(a: AbstractElement, b: AbstractElement) -> bool:
    _check_shape(a, b)
    return all(leq(x, y) for x, y in zip(a.parts, b.parts))


def dom_residual(a: AbstractElement, b: AbstractElement) -> float:
    """Largest inclusion residual of a part of *a* in the matching part of *b*."""
    _check_shape(a, b)
    return max(inclusion_residual(x, y) for x, y in zip(a.parts, b.parts))


def dom_equal(a: AbstractElement, b: AbstractElement) -> bool:
    _check_shape(a, b)
    return all(equal(x, y) for x, y in zip(a.parts, b.parts))


def dom_join(a: AbstractElement, b: AbstractElement) -> AbstractElement:
    _check_shape(a, b)
    return AbstractElement(a.kind, a.layout, [join(x, y) for x, y in zip(a.parts, b.parts)])


def dom_meet(a: AbstractElement, b: AbstractElement) -> AbstractElement:
    _check_shape(a, b)
    return AbstractElement(a.kind, a.layout, [meet(x, y) for x, y in zip(a.parts, b.parts)])


def bottom(kind: DomainKind, layout: QubitLayout) -> AbstractElement:
    return AbstractElement(kind, layout, [Subspace.zero(d) for d in kind.part_dims(layout)])


def top(kind: DomainKind, layout: QubitLayout) -> AbstractElement:
    return AbstractElement(kind, layout, [Subspace.full(d) for d in kind.part_dims(layout)])


def alpha(kind: DomainKind, states: Iterable[State], layout: QubitLayout | None = None) -> AbstractElement:
    """
    Abstraction of a finite set of ``State`` objects.

    The subspace domain joins supports; a local domain joins, per subset,
    the supports of the reduced states. *layout* is required only when
    *states* is empty.
    """
    members = list(states)
    if layout is None:
        if not members:
            raise ShapeMismatch("alpha of an empty set needs a layout")
        layout = members[0].layout
    for s in members:
        if s.layout != layout:
            raise ShapeMismatch("States live on different layouts")
    if kind.signature is None:
        return AbstractElement(kind, layout, [alpha_s((s.rho for s in members), layout.dim)])
    parts = [
        alpha_s((reduce_to(s.rho, subset, layout) for s in members), 2 ** len(subset))
        for subset in kind.signature.subsets
    ]
    return AbstractElement(kind, layout, parts)


def alpha_of_subspace(kind: DomainKind, layout: QubitLayout, g: Subspace) -> AbstractElement:
    """Abstraction of every state supported in *g*."""
    if kind.signature is None:
        return AbstractElement(kind, layout, [g])
    parts = [reduced_support(g, subset, layout) for subset in kind.signature.subsets]
    return AbstractElement(kind, layout, parts)


def gamma_as_subspace(e: AbstractElement) -> Subspace:
    """The largest global subspace whose states are exactly those described by *e*."""
    if e.kind.signature is None:
        return e.parts[0]
    result = Subspace.full(e.layout.dim)
    for subset, part in zip(e.kind.signature.subsets, e.parts):
        result = meet(result, cylinder(part, subset, e.layout))
    return result


def satisfies(state: State, e: AbstractElement) -> bool:
    """Whether *state* belongs to the concretisation of *e*."""
    return gamma_s_contains(gamma_as_subspace(e), state.rho)
