"""
Dense complex linear algebra over qubit registers.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. A
``QubitLayout`` fixes the tensor-factor order of the global Hilbert space:
qubit ``layout.order[0]`` is the leftmost (most significant) factor, so the
basis index of ``|b0 b1 ... bn-1>`` is the binary number ``b0 b1 ... bn-1``.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from qai.conf import get_tolerances
from qai.exceptions import ConfigurationError, DimensionMismatch, NotHermitian, UnknownVariable

logger = logging.getLogger("qai")

ComplexMatrix = npt.NDArray[np.complex128]


@dataclass(frozen=True)
class QubitLayout:
    """Canonical tensor order of the program's qubits."""

    order: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", tuple(self.order))
        if len(set(self.order)) != len(self.order):
            raise ConfigurationError(f"Duplicate qubit names in layout {self.order}")
        object.__setattr__(self, "index", {name: i for i, name in enumerate(self.order)})

    @classmethod
    def of(cls, *names: str) -> QubitLayout:
        return cls(tuple(names))

    @property
    def n(self) -> int:
        return len(self.order)

    @property
    def dim(self) -> int:
        return 2**self.n

    def position(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UnknownVariable(f"Unknown qubit '{name}' (layout: {', '.join(self.order)})") from None

    def positions(self, names: Iterable[str]) -> list[int]:
        return [self.position(name) for name in names]

    def sorted(self, names: Iterable[str]) -> tuple[str, ...]:
        """Return *names* deduplicated and in layout order."""
        return tuple(sorted(set(names), key=self.position))

    def complement(self, names: Iterable[str]) -> tuple[str, ...]:
        excluded = set(names)
        self.positions(excluded)
        return tuple(name for name in self.order if name not in excluded)


def as_matrix(m: npt.ArrayLike) -> ComplexMatrix:
    """Return *m* as a 2-D complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"Expected a matrix, got an array of shape {arr.shape}")
    return arr


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return m.conj().T


def max_abs(m: npt.ArrayLike) -> float:
    arr = np.asarray(m)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def ket(bits: str) -> ComplexMatrix:
    """Computational basis column vector ``|bits>``."""
    vec = np.zeros((2 ** len(bits), 1), dtype=np.complex128)
    vec[int(bits, 2) if bits else 0, 0] = 1.0
    return vec


def tensor(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product with *a* as the leftmost factor."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def _check_square(m: ComplexMatrix, dim: int, what: str) -> None:
    if m.shape != (dim, dim):
        raise DimensionMismatch(f"{what} must be {dim}x{dim}, got {m.shape[0]}x{m.shape[1]}")


def embed(op: npt.ArrayLike, targets: Sequence[str], layout: QubitLayout) -> ComplexMatrix:
    """
    Cylindrical extension of a local operator.

    Args:
        op: ``2^k x 2^k`` operator whose factors follow the order of *targets*.
        targets: ``k`` distinct qubit names.
        layout: Global tensor order.

    Returns:
        The ``2^n x 2^n`` operator acting as *op* on *targets* and as the
        identity on every other qubit.
    """
    targets = tuple(targets)
    if len(set(targets)) != len(targets):
        raise DimensionMismatch(f"Duplicate targets {targets}")
    positions = layout.positions(targets)
    matrix = as_matrix(op)
    _check_square(matrix, 2 ** len(targets), f"Operator on {len(targets)} qubit(s)")

    n = layout.n
    rest = [p for p in range(n) if p not in positions]
    full = np.kron(matrix, np.eye(2 ** len(rest), dtype=np.complex128))
    # axis i of `full` belongs to qubit order[i]
    order = positions + rest
    perm = [int(a) for a in np.argsort(order)]
    tensor_form = full.reshape([2] * (2 * n)).transpose(perm + [n + a for a in perm])
    return tensor_form.reshape(2**n, 2**n)


def reorder_qubits(columns: npt.ArrayLike, names: Sequence[str], new_order: Sequence[str]) -> ComplexMatrix:
    """
    Rewrite ``2^k x r`` column vectors over *names* in the tensor order *new_order*.

    *new_order* must be a permutation of *names*.
    """
    names, new_order = tuple(names), tuple(new_order)
    if sorted(names) != sorted(new_order) or len(set(names)) != len(names):
        raise DimensionMismatch(f"{new_order} is not a reordering of {names}")
    matrix = np.asarray(columns, dtype=np.complex128)
    k = len(names)
    if matrix.ndim != 2 or matrix.shape[0] != 2**k:
        raise DimensionMismatch(f"Expected {2**k} rows for {k} qubit(s), got shape {matrix.shape}")
    r = matrix.shape[1]
    perm = [names.index(q) for q in new_order]
    return matrix.reshape([2] * k + [r]).transpose(perm + [k]).reshape(2**k, r)


def partial_trace(m: npt.ArrayLike, traced_out: Iterable[str], layout: QubitLayout) -> ComplexMatrix:
    """
    Trace out the qubits in *traced_out*.

    Returns:
        The reduced operator on the remaining qubits, in layout order.
    """
    matrix = as_matrix(m)
    n = layout.n
    _check_square(matrix, layout.dim, "Global operator")
    traced = sorted(set(layout.positions(traced_out)), reverse=True)
    if not traced:
        return matrix.copy()

    t = matrix.reshape([2] * (2 * n))
    remaining = n
    for p in traced:
        t = np.trace(t, axis1=p, axis2=p + remaining)
        remaining -= 1
    d = 2**remaining
    return np.asarray(t, dtype=np.complex128).reshape(d, d)


def reduce_to(m: npt.ArrayLike, kept: Iterable[str], layout: QubitLayout) -> ComplexMatrix:
    """Partial trace keeping only *kept* (result in layout order)."""
    return partial_trace(m, layout.complement(kept), layout)


def hermiticity_residual(m: ComplexMatrix) -> float:
    return max_abs(m - dagger(m))


def check_hermitian(m: npt.ArrayLike) -> ComplexMatrix:
    """Validate Hermiticity and return the exactly Hermitian part of *m*."""
    matrix = as_matrix(m)
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got {matrix.shape}")
    tol = get_tolerances().herm_tol * max(1.0, max_abs(matrix))
    residual = hermiticity_residual(matrix)
    if residual > tol:
        raise NotHermitian(f"Matrix is not Hermitian (residual {residual:.3e} > {tol:.3e})")
    return (matrix + dagger(matrix)) / 2


def eig_hermitian(m: npt.ArrayLike) -> tuple[npt.NDArray[np.float64], ComplexMatrix]:
    """
    Spectral decomposition of a Hermitian matrix.

    Returns:
        ``(eigenvalues, eigenvectors)`` with eigenvalues in descending order
        and eigenvectors as orthonormal columns.
    """
    hermitian = check_hermitian(m)
    values, vectors = np.linalg.eigh(hermitian)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def is_unitary(u: npt.ArrayLike, tol: float | None = None) -> bool:
    matrix = as_matrix(u)
    if matrix.shape[0] != matrix.shape[1]:
        return False
    tol = get_tolerances().herm_tol if tol is None else tol
    return max_abs(dagger(matrix) @ matrix - np.eye(matrix.shape[0])) <= tol


def orthonormalize(
    vectors: npt.ArrayLike | Sequence[npt.ArrayLike],
    tol: float | None = None,
    *,
    dim: int | None = None,
    scale: float | None = None,
) -> ComplexMatrix:
    """
    Orthonormal basis of the span of *vectors*.

    Args:
        vectors: Either a 2-D array whose columns are the vectors, or a
            sequence of 1-D vectors.
        tol: Relative rank threshold (defaults to the active ``rank_tol``).
        dim: Ambient dimension, required when *vectors* is empty.
        scale: Extra reference magnitude; components are discarded when
            their singular value is at most ``tol * max(max input norm, scale)``.

    Returns:
        A ``dim x r`` array with orthonormal columns.
    """
    tolerances = get_tolerances()
    tol = tolerances.rank_tol if tol is None else tol
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        columns = vectors.astype(np.complex128, copy=False)
    else:
        items = [np.asarray(v, dtype=np.complex128).reshape(-1) for v in vectors]  # type: ignore[union-attr]
        if not items:
            if dim is None:
                raise DimensionMismatch("Ambient dimension required for an empty vector family")
            return np.zeros((dim, 0), dtype=np.complex128)
        if len({v.shape[0] for v in items}) != 1:
            raise DimensionMismatch("Vectors do not share one dimension")
        columns = np.column_stack(items)
    if dim is not None and columns.shape[0] != dim:
        raise DimensionMismatch(f"Vectors have dimension {columns.shape[0]}, expected {dim}")

    d = columns.shape[0]
    if columns.shape[1] == 0:
        return np.zeros((d, 0), dtype=np.complex128)
    reference = max(float(np.max(np.linalg.norm(columns, axis=0))), scale or 0.0)
    if reference <= tolerances.zero_tol:
        return np.zeros((d, 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(columns, full_matrices=False)
    rank = int(np.sum(s > tol * reference))
    if rank < columns.shape[1]:
        logger.debug("orthonormalize: kept %d of %d component(s)", rank, columns.shape[1])
    return u[:, :rank].copy()
