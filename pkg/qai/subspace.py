"""
The subspace lattice of a finite-dimensional Hilbert space.

A ``Subspace`` is stored as an orthonormal basis (columns of a
``ambient_dim x dim`` array); projectors are derived on demand. Two
subspaces are equal when each is included in the other, since bases are
not unique.

The Galois pair between partial density operators and subspaces is
``alpha_s`` (join of supports) and ``gamma_s_contains`` (support inclusion).
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence

import numpy as np
import numpy.typing as npt
from scipy.linalg import null_space

from qai.conf import get_tolerances
from qai.exceptions import DimensionMismatch, NotPSD, TraceTooLarge
from qai.linalg import (
    ComplexMatrix,
    QubitLayout,
    as_matrix,
    dagger,
    eig_hermitian,
    embed,
    ket,
    max_abs,
    orthonormalize,
    reduce_to,
)

logger = logging.getLogger("qai")

# Residual a computational basis vector must keep after projection before it
# is accepted into a canonical basis.
_CANONICAL_PIVOT = 1e-4


class Subspace:
    """A linear subspace given by an orthonormal basis."""

    __slots__ = ("basis",)

    def __init__(self, basis: npt.ArrayLike) -> None:
        arr = np.asarray(basis, dtype=np.complex128)
        if arr.ndim != 2:
            raise DimensionMismatch(f"Subspace basis must be 2-D, got shape {arr.shape}")
        if arr.shape[1] > arr.shape[0]:
            raise DimensionMismatch(
                f"Subspace basis has {arr.shape[1]} columns in dimension {arr.shape[0]}"
            )
        self.basis: ComplexMatrix = arr

    @property
    def ambient_dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def is_zero(self) -> bool:
        return self.dim == 0

    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def vectors(self) -> list[ComplexMatrix]:
        return [self.basis[:, i] for i in range(self.dim)]

    @classmethod
    def zero(cls, ambient_dim: int) -> Subspace:
        return cls(np.zeros((ambient_dim, 0), dtype=np.complex128))

    @classmethod
    def full(cls, ambient_dim: int) -> Subspace:
        return cls(np.eye(ambient_dim, dtype=np.complex128))

    @classmethod
    def span(cls, vectors: Sequence[npt.ArrayLike], ambient_dim: int | None = None) -> Subspace:
        return cls(orthonormalize(vectors, dim=ambient_dim))

    @classmethod
    def from_kets(cls, *bits: str) -> Subspace:
        """Span of computational basis states, e.g. ``Subspace.from_kets("00", "11")``."""
        return cls.span([ket(b) for b in bits])

    def __repr__(self) -> str:
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _same_dim(a: Subspace, b: Subspace) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(
            f"Subspaces live in different spaces ({a.ambient_dim} vs {b.ambient_dim})"
        )


def projector(s: Subspace) -> ComplexMatrix:
    return s.basis @ dagger(s.basis)


def support(rho: npt.ArrayLike) -> Subspace:
    """Span of the eigenvectors of *rho* with eigenvalue above ``rank_tol * lambda_max``."""
    tol = get_tolerances()
    values, vectors = eig_hermitian(rho)
    scale = float(np.max(np.abs(values)))
    if values[-1] < -tol.herm_tol * max(1.0, scale):
        raise NotPSD(f"Operator has negative eigenvalue {values[-1]:.3e}")
    lam_max = float(values[0])
    if lam_max <= tol.zero_tol:
        return Subspace.zero(vectors.shape[0])
    keep = values > tol.rank_tol * lam_max
    return Subspace(vectors[:, keep])


def inclusion_residual(a: Subspace, b: Subspace) -> float:
    """``max |(I - P_b) basis_a|``; zero exactly when *a* is inside *b*."""
    _same_dim(a, b)
    if a.dim == 0:
        return 0.0
    outside = a.basis - b.basis @ (dagger(b.basis) @ a.basis)
    return max_abs(outside)


def leq(a: Subspace, b: Subspace) -> bool:
    return inclusion_residual(a, b) <= get_tolerances().incl_tol


def equal(a: Subspace, b: Subspace) -> bool:
    return leq(a, b) and leq(b, a)


def join(a: Subspace, b: Subspace) -> Subspace:
    _same_dim(a, b)
    stacked = np.hstack([a.basis, b.basis])
    return Subspace(orthonormalize(stacked, dim=a.ambient_dim, scale=1.0))


def join_all(spaces: Iterable[Subspace], ambient_dim: int) -> Subspace:
    result = Subspace.zero(ambient_dim)
    for s in spaces:
        result = join(result, s)
    return result


def orthocomplement(a: Subspace) -> Subspace:
    if a.dim == 0:
        return Subspace.full(a.ambient_dim)
    if a.dim == a.ambient_dim:
        return Subspace.zero(a.ambient_dim)
    return Subspace(null_space(dagger(a.basis), rcond=get_tolerances().rank_tol))


def meet(a: Subspace, b: Subspace) -> Subspace:
    _same_dim(a, b)
    return orthocomplement(join(orthocomplement(a), orthocomplement(b)))


def image(op: npt.ArrayLike, s: Subspace) -> Subspace:
    """Span of ``op |psi>`` over ``|psi>`` in *s*."""
    matrix = as_matrix(op)
    if matrix.shape[1] != s.ambient_dim:
        raise DimensionMismatch(
            f"Operator with {matrix.shape[1]} columns applied to a subspace of {s.ambient_dim}"
        )
    if s.dim == 0:
        return Subspace.zero(matrix.shape[0])
    scale = float(np.linalg.norm(matrix, 2))
    return Subspace(orthonormalize(matrix @ s.basis, dim=matrix.shape[0], scale=scale))


def kraus_image(kraus: Sequence[npt.ArrayLike], s: Subspace) -> Subspace:
    """Span of ``E_k |psi>`` over all Kraus operators and ``|psi>`` in *s*."""
    matrices = [as_matrix(e) for e in kraus]
    if not matrices or s.dim == 0:
        out_dim = matrices[0].shape[0] if matrices else s.ambient_dim
        return Subspace.zero(out_dim)
    scale = max(float(np.linalg.norm(e, 2)) for e in matrices)
    stacked = np.hstack([e @ s.basis for e in matrices])
    return Subspace(orthonormalize(stacked, dim=matrices[0].shape[0], scale=scale))


def _check_state(rho: ComplexMatrix) -> None:
    trace = float(np.trace(rho).real)
    limit = 1.0 + get_tolerances().trace_tol
    if trace > limit:
        raise TraceTooLarge(f"State has trace {trace:.12g} > {limit:.12g}")


def alpha_s(states: Iterable[npt.ArrayLike], ambient_dim: int) -> Subspace:
    """Join of the supports of *states*; the empty join is the zero subspace."""
    result = Subspace.zero(ambient_dim)
    for rho in states:
        matrix = as_matrix(rho)
        _check_state(matrix)
        result = join(result, support(matrix))
    return result


def gamma_s_contains(p: Subspace, rho: npt.ArrayLike) -> bool:
    matrix = as_matrix(rho)
    _check_state(matrix)
    return leq(support(matrix), p)


def canonical(s: Subspace) -> Subspace:
    """
    Deterministic basis of *s* built from projected computational basis vectors.

    The vectors ``P_s |x>`` are taken in index order and Gram-Schmidt
    orthonormalized; a vector enters the basis when its residual exceeds a
    fixed pivot threshold. For spans of computational basis states the
    result is exactly those basis states.
    """
    if s.dim == 0 or s.dim == s.ambient_dim:
        return Subspace.zero(s.ambient_dim) if s.dim == 0 else Subspace.full(s.ambient_dim)
    p = projector(s)
    chosen: list[ComplexMatrix] = []
    for x in range(s.ambient_dim):
        v = p[:, x].copy()
        for _ in range(2):
            for b in chosen:
                v = v - b * np.vdot(b, v)
        norm = float(np.linalg.norm(v))
        if norm > _CANONICAL_PIVOT:
            chosen.append(v / norm)
            if len(chosen) == s.dim:
                break
    if len(chosen) != s.dim:
        logger.warning("canonical: found %d of %d basis vectors; keeping stored basis", len(chosen), s.dim)
        return s
    return Subspace(np.column_stack(chosen))


def cylinder(s: Subspace, names: Sequence[str], layout: QubitLayout) -> Subspace:
    """Cylindrical extension ``s (x) I`` of a subspace over *names*."""
    embedded = embed(projector(s), names, layout)
    return Subspace(orthonormalize(embedded, dim=layout.dim, scale=1.0))


def reduced_support(s: Subspace, names: Sequence[str], layout: QubitLayout) -> Subspace:
    """Support of the partial trace of ``projector(s)`` onto *names* (layout order)."""
    return support(reduce_to(projector(s), names, layout))
