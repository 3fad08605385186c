"""
Denotational semantics on partial density operators.

``evaluate`` runs a program on a ``State``. Loops are unrolled until the
mass still inside the loop drops below ``LoopPolicy.trace_eps``; when the
budget ``max_iters`` runs out first, ``LoopBudgetExceeded`` carries the
truncated result (or, with ``strict=False``, the truncated result is
returned and a warning logged).

Also provides Kraus extraction through the Choi matrix, the mixture
representative of a finite set of states, and the state-preparation
program that maps every input to a fixed state.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from qai.conf import DEFAULTS, get_tolerances
from qai.exceptions import (
    ConfigurationError,
    DimensionMismatch,
    EmptySet,
    LoopBudgetExceeded,
    NotPSD,
    TraceNotOne,
    TraceTooLarge,
    ZeroState,
)
from qai.lang import (
    Assert,
    If,
    Init,
    Program,
    SpaceDecl,
    Skip,
    Stmt,
    Unitary,
    UnitaryDecl,
    While,
)
from qai.linalg import (
    ComplexMatrix,
    QubitLayout,
    as_matrix,
    check_hermitian,
    dagger,
    eig_hermitian,
    embed,
    ket,
)
from qai.subspace import Subspace, canonical, orthocomplement

logger = logging.getLogger("qai")


@dataclass(frozen=True)
class LoopPolicy:
    """Truncation of the infinite sum defining a while loop."""

    trace_eps: float = DEFAULTS["TRACE_EPS"]
    max_iters: int = DEFAULTS["MAX_ITERS"]

    def __post_init__(self) -> None:
        if not self.trace_eps > 0:
            raise ConfigurationError(f"trace_eps must be positive, got {self.trace_eps!r}")
        if self.max_iters < 1:
            raise ConfigurationError(f"max_iters must be at least 1, got {self.max_iters!r}")


def loop_policy_from_config(config: Mapping[str, Any]) -> LoopPolicy:
    return LoopPolicy(trace_eps=float(config["TRACE_EPS"]), max_iters=int(config["MAX_ITERS"]))


class State:
    """A partial density operator over a qubit layout."""

    __slots__ = ("layout", "rho")

    def __init__(self, rho: npt.ArrayLike, layout: QubitLayout, *, validate: bool = True) -> None:
        matrix = as_matrix(rho)
        if matrix.shape != (layout.dim, layout.dim):
            raise DimensionMismatch(
                f"State over {layout.n} qubit(s) must be {layout.dim}x{layout.dim}, got {matrix.shape}"
            )
        if validate:
            matrix = check_hermitian(matrix)
            tol = get_tolerances()
            values = np.linalg.eigvalsh(matrix)
            if values[0] < -tol.herm_tol * max(1.0, float(np.max(np.abs(values)))):
                raise NotPSD(f"State has negative eigenvalue {values[0]:.3e}")
            trace = float(np.trace(matrix).real)
            if trace > 1.0 + tol.trace_tol:
                raise TraceTooLarge(f"State has trace {trace:.12g}")
        self.rho: ComplexMatrix = matrix
        self.layout = layout

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def normalized(self) -> State:
        trace = self.trace
        if trace <= get_tolerances().rank_tol:
            raise ZeroState(f"Cannot normalize a state of trace {trace:.3e}")
        return State(self.rho / trace, self.layout, validate=False)

    @classmethod
    def pure(cls, vector: npt.ArrayLike, layout: QubitLayout) -> State:
        """``|psi><psi|`` for a normalized copy of *vector*."""
        v = np.asarray(vector, dtype=np.complex128).reshape(-1, 1)
        norm = float(np.linalg.norm(v))
        if norm == 0:
            raise ZeroState("Cannot build a pure state from the zero vector")
        v = v / norm
        return cls(v @ dagger(v), layout)

    @classmethod
    def basis(cls, bits: str, layout: QubitLayout) -> State:
        return cls.pure(ket(bits), layout)

    @classmethod
    def maximally_mixed(cls, layout: QubitLayout) -> State:
        return cls(np.eye(layout.dim) / layout.dim, layout)

    def __repr__(self) -> str:
        return f"State(qubits={self.layout.order}, trace={self.trace:.6g})"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass
class _Run:
    """Per-evaluation context: program, policy and budget bookkeeping."""

    program: Program
    policy: LoopPolicy
    exhausted: list[float] = field(default_factory=list)  # residual mass of exhausted loops


Semantics = Callable[[_Run, Stmt, ComplexMatrix], ComplexMatrix]

# The registry: statement type -> semantic function on raw matrices
SEMANTICS: dict[type[Stmt], Semantics] = {}


def _register_semantics(stmt_type: type[Stmt]):
    def decorator(func: Semantics) -> Semantics:
        SEMANTICS[stmt_type] = func
        return func

    return decorator


def _run_body(run: _Run, body: Sequence[Stmt], rho: ComplexMatrix) -> ComplexMatrix:
    for stmt in body:
        rho = SEMANTICS[type(stmt)](run, stmt, rho)
    return rho


@_register_semantics(Skip)
def _skip(run: _Run, stmt: Stmt, rho: ComplexMatrix) -> ComplexMatrix:
    return rho


@_register_semantics(Init)
def _init(run: _Run, stmt: Stmt, rho: ComplexMatrix) -> ComplexMatrix:
    assert isinstance(stmt, Init)
    k = len(stmt.targets)
    zero = ket("0" * k)
    out = np.zeros_like(rho)
    for i in range(2**k):
        op = embed(zero @ dagger(ket(format(i, f"0{k}b"))), stmt.targets, run.program.layout)
        out += op @ rho @ dagger(op)
    return out


@_register_semantics(Unitary)
def _unitary(run: _Run, stmt: Stmt, rho: ComplexMatrix) -> ComplexMatrix:
    assert isinstance(stmt, Unitary)
    u = run.program.unitary_operator(stmt)
    return u @ rho @ dagger(u)


@_register_semantics(Assert)
def _assert(run: _Run, stmt: Stmt, rho: ComplexMatrix) -> ComplexMatrix:
    assert isinstance(stmt, Assert)
    p = run.program.projector_operator(stmt)
    return p @ rho @ p


@_register_semantics(If)
def _if(run: _Run, stmt: Stmt, rho: ComplexMatrix) -> ComplexMatrix:
    assert isinstance(stmt, If)
    p = run.program.projector_operator(stmt)
    p_perp = run.program.projector_operator(stmt, not stmt.negated)
    then_part = _run_body(run, stmt.then_body, p @ rho @ p)
    else_part = _run_body(run, stmt.else_body, p_perp @ rho @ p_perp)
    return then_part + else_part


@_register_semantics(While)
def _while(run: _Run, stmt: Stmt, rho: ComplexMatrix) -> ComplexMatrix:
    assert isinstance(stmt, While)
    p = run.program.projector_operator(stmt)
    p_perp = run.program.projector_operator(stmt, not stmt.negated)
    accumulated = np.zeros_like(rho)
    current = rho
    for i in range(run.policy.max_iters):
        accumulated = accumulated + p_perp @ current @ p_perp
        current = _run_body(run, stmt.body, p @ current @ p)
        mass = float(np.trace(current).real)
        logger.debug("while: iteration %d, mass left in loop %.3e", i, mass)
        if mass < run.policy.trace_eps:
            return accumulated
    logger.warning(
        "while loop exhausted %d iteration(s) with mass %.3e still inside",
        run.policy.max_iters,
        mass,
    )
    run.exhausted.append(mass)
    return accumulated


def evaluate(
    p: Program,
    state: State,
    policy: LoopPolicy | None = None,
    *,
    body: Sequence[Stmt] | None = None,
    strict: bool = True,
) -> State:
    """
    Run *p* (or the fragment *body* of it) on *state*.

    Raises:
        LoopBudgetExceeded: When a loop is still carrying at least
            ``trace_eps`` of mass after ``max_iters`` iterations and *strict*
            is set. The exception holds the truncated result.
    """
    if state.layout != p.layout:
        raise DimensionMismatch(
            f"State layout {state.layout.order} does not match program layout {p.layout.order}"
        )
    run = _Run(p, policy or LoopPolicy())
    result = _run_body(run, p.body if body is None else body, state.rho)
    out = State(result, p.layout, validate=False)
    if run.exhausted and strict:
        accumulated = out.trace
        raise LoopBudgetExceeded(
            f"{len(run.exhausted)} loop(s) did not converge within {run.policy.max_iters} iteration(s)",
            partial=out,
            accumulated_trace=accumulated,
            residual=state.trace - accumulated,
        )
    return out


# ---------------------------------------------------------------------------
# Kraus operators
# ---------------------------------------------------------------------------


def _outer(v: ComplexMatrix) -> ComplexMatrix:
    return v @ dagger(v)


def choi_matrix(p: Program, policy: LoopPolicy | None = None, *, strict: bool = True) -> ComplexMatrix:
    """
    ``J = sum_ij |i><j| (x) E(|i><j|)`` for the channel ``E`` of *p*.

    Off-diagonal matrix units are assembled from positive inputs so the loop
    truncation only ever sees partial density operators.
    """
    layout = p.layout
    d = layout.dim

    def channel(rho: ComplexMatrix) -> ComplexMatrix:
        return evaluate(p, State(rho, layout, validate=False), policy, strict=strict).rho

    basis = [ket(format(i, f"0{layout.n}b")) for i in range(d)]
    diagonal = [channel(_outer(e)) for e in basis]
    choi = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        choi[i * d : (i + 1) * d, i * d : (i + 1) * d] = diagonal[i]
        for j in range(i + 1, d):
            plus = channel(_outer((basis[i] + basis[j]) / np.sqrt(2)))
            plus_i = channel(_outer((basis[i] + 1j * basis[j]) / np.sqrt(2)))
            block = plus + 1j * plus_i - (1 + 1j) / 2 * (diagonal[i] + diagonal[j])
            choi[i * d : (i + 1) * d, j * d : (j + 1) * d] = block
            choi[j * d : (j + 1) * d, i * d : (i + 1) * d] = dagger(block)
    return choi


def kraus_of(p: Program, policy: LoopPolicy | None = None, *, strict: bool = True) -> list[ComplexMatrix]:
    """Kraus operators of *p*, one per Choi eigenvalue above ``rank_tol * largest``."""
    d = p.layout.dim
    tol = get_tolerances()
    values, vectors = eig_hermitian(choi_matrix(p, policy, strict=strict))
    if values[0] <= tol.zero_tol:
        return []
    kraus = [
        np.sqrt(values[k]) * vectors[:, k].reshape(d, d).T
        for k in range(values.size)
        if values[k] > tol.rank_tol * values[0]
    ]
    logger.debug("kraus_of: %d operator(s)", len(kraus))
    return kraus


def apply_kraus(kraus: Sequence[ComplexMatrix], rho: npt.ArrayLike) -> ComplexMatrix:
    matrix = as_matrix(rho)
    out = np.zeros_like(matrix)
    for e in kraus:
        out += e @ matrix @ dagger(e)
    return out


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------


def mix_representative(states: Sequence[State]) -> State:
    """
    A single state whose support is the join of the supports of *states*.

    Each member is normalized and the results averaged, so the
    representative has unit trace.
    """
    if not states:
        raise EmptySet("mix_representative needs at least one state")
    layout = states[0].layout
    total = np.zeros((layout.dim, layout.dim), dtype=np.complex128)
    for s in states:
        if s.layout != layout:
            raise DimensionMismatch("States live on different layouts")
        total += s.normalized().rho
    return State(total / len(states), layout, validate=False)


def prepare_program(state: State) -> Program:
    """
    A program mapping every input ``sigma`` to ``Tr(sigma) * rho``.

    The register is reset, a unitary ``U`` with ``U|0...0> = sum_i sqrt(l_i)|psi_i>``
    is applied, and a chain of conditionals on the rank-one spaces of the
    eigenvectors ``psi_0 .. psi_{d-2}`` decoheres the result into
    ``rho = sum_i l_i |psi_i><psi_i|``.
    """
    trace = state.trace
    if abs(trace - 1.0) > get_tolerances().trace_tol:
        raise TraceNotOne(f"prepare_program needs a unit-trace state, got trace {trace:.12g}")
    layout = state.layout
    d = layout.dim
    values, vectors = eig_hermitian(state.rho)
    weights = np.sqrt(np.clip(values, 0.0, None))
    psi = vectors @ weights
    psi = psi / np.linalg.norm(psi)
    rest = canonical(orthocomplement(Subspace(psi.reshape(-1, 1))))
    u = np.column_stack([psi, rest.basis])

    spaces = tuple(SpaceDecl.from_vectors(f"P{i}", [vectors[:, i]], layout.n) for i in range(d - 1))
    targets = layout.order

    def chain(i: int) -> tuple[Stmt, ...]:
        if i == d - 1:
            return (Skip(),)
        return (If(targets, f"P{i}", (Skip(),), chain(i + 1)),)

    body: tuple[Stmt, ...] = (Init(targets), Unitary(targets, "U"), *chain(0))
    logger.debug("prepare_program: %d conditional(s) over %d qubit(s)", d - 1, layout.n)
    return Program(layout, (UnitaryDecl.from_matrix("U", u),), spaces, body)
