"""
Forward abstract interpretation of programs.

Basic statements on the subspace domain use the exact subspace transfer
functions:

- ``skip``: ``Q``
- ``q := |0>``: ``|0><0|_q (x) supp Tr_q(Q)``
- ``q *= U``: ``U Q``
- ``assert P on q``: ``span{P|psi> : |psi> in Q}``

On a local domain every basic statement uses its best abstraction,
obtained by concretising to the global subspace, applying the global
transfer and abstracting again.

Sequences compose, conditionals join their two guarded branches, and
loops run the increasing iteration ``d_{n+1} = d_n join T(d_n)`` with
``T = assert P; body`` until it stabilises, then apply ``assert P^perp``.
The iteration never needs more than ``height + 1`` steps.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from qai.concrete import LoopPolicy, State, evaluate
from qai.conf import get_tolerances
from qai.domains import (
    AbstractElement,
    DomainKind,
    alpha,
    alpha_of_subspace,
    bottom,
    check_kind,
    dom_join,
    dom_leq,
    dom_residual,
    gamma_as_subspace,
)
from qai.exceptions import ConfigurationError, FixpointBudgetExceeded, ShapeMismatch
from qai.lang import Assert, If, Init, Program, Skip, Stmt, Unitary, While, exit_guard, guard, is_basic
from qai.linalg import embed, ket, partial_trace
from qai.subspace import Subspace, canonical, cylinder, image, projector, support

logger = logging.getLogger("qai")

GlobalTransfer = Callable[[Program, Stmt, Subspace], Subspace]

# The registry: basic statement type -> transfer on global subspaces
TRANSFERS: dict[type[Stmt], GlobalTransfer] = {}


def _register_transfer(stmt_type: type[Stmt]):
    def decorator(func: GlobalTransfer) -> GlobalTransfer:
        TRANSFERS[stmt_type] = func
        return func

    return decorator


@_register_transfer(Skip)
def _skip_transfer(program: Program, stmt: Stmt, q: Subspace) -> Subspace:
    return q


@_register_transfer(Init)
def _init_transfer(program: Program, stmt: Stmt, q: Subspace) -> Subspace:
    assert isinstance(stmt, Init)
    layout = program.layout
    if q.dim == 0:
        return q
    rest = layout.complement(stmt.targets)
    reduced = support(partial_trace(projector(q), stmt.targets, layout))
    zeros = ket("0" * len(stmt.targets))
    reset = embed(zeros @ zeros.conj().T, stmt.targets, layout)
    return image(reset, cylinder(reduced, rest, layout))


@_register_transfer(Unitary)
def _unitary_transfer(program: Program, stmt: Stmt, q: Subspace) -> Subspace:
    assert isinstance(stmt, Unitary)
    return image(program.unitary_operator(stmt), q)


@_register_transfer(Assert)
def _assert_transfer(program: Program, stmt: Stmt, q: Subspace) -> Subspace:
    assert isinstance(stmt, Assert)
    return image(program.projector_operator(stmt), q)


def global_transfer(program: Program, stmt: Stmt, q: Subspace) -> Subspace:
    try:
        transfer = TRANSFERS[type(stmt)]
    except KeyError:
        raise ShapeMismatch(f"{type(stmt).__name__} is not a basic statement") from None
    return transfer(program, stmt, q)


def transfer_basic(kind: DomainKind, program: Program, stmt: Stmt, e: AbstractElement) -> AbstractElement:
    """Abstract effect of one basic statement."""
    kind = kind.bind(program.layout)
    check_kind(kind, e)
    if kind.signature is None:
        return AbstractElement(kind, e.layout, [global_transfer(program, stmt, e.parts[0])])
    g = global_transfer(program, stmt, gamma_as_subspace(e))
    return alpha_of_subspace(kind, e.layout, g)


# ---------------------------------------------------------------------------
# Composite statements
# ---------------------------------------------------------------------------


def _analyze_stmt(kind: DomainKind, program: Program, stmt: Stmt, e: AbstractElement) -> AbstractElement:
    if is_basic(stmt):
        out = transfer_basic(kind, program, stmt, e)
    elif isinstance(stmt, If):
        then_part = analyze_body(kind, program, (guard(stmt), *stmt.then_body), e)
        else_part = analyze_body(kind, program, (exit_guard(stmt), *stmt.else_body), e)
        out = dom_join(then_part, else_part)
    elif isinstance(stmt, While):
        invariant, _ = while_fixpoint(kind, program, stmt, e)
        out = transfer_basic(kind, program, exit_guard(stmt), invariant)
    else:
        raise ShapeMismatch(f"Unknown statement {type(stmt).__name__}")
    logger.debug("analyze: %s -> dims %s", type(stmt).__name__, [p.dim for p in out.parts])
    return out


def analyze_body(
    kind: DomainKind, program: Program, body: Sequence[Stmt], e: AbstractElement
) -> AbstractElement:
    for stmt in body:
        e = _analyze_stmt(kind, program, stmt, e)
    return e


def while_fixpoint(
    kind: DomainKind, program: Program, stmt: While, e: AbstractElement
) -> tuple[AbstractElement, int]:
    """
    Loop invariant of *stmt* reached from *e* by increasing iteration.

    Returns:
        ``(invariant, iterations)`` where the invariant ``d`` satisfies
        ``T(d) <= d`` for ``T = assert P; body`` and ``e <= d``.

    Raises:
        FixpointBudgetExceeded: If more than ``height + 1`` iterations are
            needed, which a finite-height lattice rules out.
    """
    kind = kind.bind(program.layout)
    bound = kind.height(program.layout) + 1
    step_body = (guard(stmt), *stmt.body)
    current = e
    iterations = 0
    while True:
        iterations += 1
        nxt = dom_join(current, analyze_body(kind, program, step_body, current))
        if dom_leq(nxt, current):
            logger.debug("while: fixpoint after %d iteration(s)", iterations)
            return current, iterations
        if iterations >= bound:
            raise FixpointBudgetExceeded(
                f"Loop analysis did not stabilise within {bound} iterations (lattice height {bound - 1})"
            )
        current = nxt


def analyze(
    kind: DomainKind,
    program: Program,
    e: AbstractElement,
    body: Sequence[Stmt] | None = None,
) -> AbstractElement:
    """Abstract post-state of *program* (or of the fragment *body*) from *e*."""
    kind = kind.bind(program.layout)
    check_kind(kind, e)
    if e.layout != program.layout:
        raise ShapeMismatch("Abstract element and program use different layouts")
    return analyze_body(kind, program, program.body if body is None else body, e)


# ---------------------------------------------------------------------------
# Best abstraction and completeness
# ---------------------------------------------------------------------------


def representative(g: Subspace, layout) -> State | None:
    """The maximally mixed state on *g*, or ``None`` for the zero subspace."""
    if g.dim == 0:
        return None
    return State(projector(g) / g.dim, layout, validate=False)


def best_abstraction(
    kind: DomainKind,
    program: Program,
    e: AbstractElement,
    policy: LoopPolicy | None = None,
) -> AbstractElement:
    """
    ``alpha(sem(gamma(e)))`` computed exactly from one representative state.

    Every state described by *e* is supported in ``G = gamma_as_subspace(e)``
    and the maximally mixed state on ``G`` has support ``G``, so its image
    abstracts to the same element as the image of the whole set.
    """
    kind = kind.bind(program.layout)
    check_kind(kind, e)
    rho_g = representative(gamma_as_subspace(e), program.layout)
    if rho_g is None:
        return bottom(kind, program.layout)
    return alpha(kind, [evaluate(program, rho_g, policy, strict=False)])


def random_pure_in(g: Subspace, rng: np.random.Generator) -> np.ndarray:
    """Gaussian-random unit vector of *g*."""
    coeffs = rng.normal(size=g.dim) + 1j * rng.normal(size=g.dim)
    v = g.basis @ coeffs
    return v / np.linalg.norm(v)


def random_state_in(g: Subspace, layout, rng: np.random.Generator) -> State:
    """Random mixture of ``dim(g)`` pure states of *g* (full support almost surely)."""
    weights = rng.dirichlet(np.ones(g.dim))
    rho = np.zeros((layout.dim, layout.dim), dtype=np.complex128)
    for w in weights:
        v = random_pure_in(g, rng).reshape(-1, 1)
        rho += w * (v @ v.conj().T)
    return State(rho, layout, validate=False)


# Pairwise superpositions are only generated for subspaces up to this size.
_MAX_PAIRWISE_DIM = 16


def witness_candidates(
    g: Subspace, layout, trials: int, rng: np.random.Generator
) -> list[State]:
    """
    States supported in *g* used to look for counterexamples.

    In order: the maximally mixed state on *g*, its canonical basis states,
    the superpositions ``(b_i + c b_j)/sqrt(2)`` for ``c`` in ``{1, -1, i, -i}``,
    and *trials* random full-support mixtures.
    """
    rep = representative(g, layout)
    if rep is None:
        return []
    candidates = [rep]
    basis = canonical(g).vectors()
    candidates.extend(State.pure(b, layout) for b in basis)
    if len(basis) <= _MAX_PAIRWISE_DIM:
        for i in range(len(basis)):
            for j in range(i + 1, len(basis)):
                for phase in (1, -1, 1j, -1j):
                    candidates.append(State.pure(basis[i] + phase * basis[j], layout))
    else:
        logger.debug("witness_candidates: skipping pairwise superpositions for dim %d", len(basis))
    candidates.extend(random_state_in(g, layout, rng) for _ in range(trials))
    return candidates


@dataclass
class CompletenessReport:
    """Outcome of comparing the analyzer with concrete executions."""

    kind: DomainKind
    abstract: AbstractElement  # analyze(e)
    concrete: AbstractElement  # join of alpha(eval(rho)) over all candidates
    deviation: float  # largest residual found
    candidates: int
    witness: State | None = None
    witness_deviation: float = 0.0
    details: list[float] = field(default_factory=list)  # per-candidate residuals

    @property
    def complete(self) -> bool:
        return self.witness is None

    @property
    def verdict(self) -> str:
        return "Complete" if self.complete else "IncompleteWitness"


def check_completeness(
    kind: DomainKind,
    program: Program,
    e: AbstractElement,
    trials: int = 8,
    *,
    seed: int | None = None,
    policy: LoopPolicy | None = None,
    witnesses: Sequence[State] = (),
) -> CompletenessReport:
    """
    Look for states where the analyzer is less precise than the semantics.

    For each candidate state ``rho`` (caller-supplied *witnesses* first, then
    ``witness_candidates`` of ``gamma(e)``) the analyzer's result on
    ``alpha({rho})`` is compared with ``alpha({eval(rho)})``. The join of the
    concrete abstractions over all candidates is also compared with
    ``analyze(e)``.
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be at least 1, got {trials}")
    kind = kind.bind(program.layout)
    check_kind(kind, e)
    layout = program.layout
    tol = get_tolerances().incl_tol
    rng = np.random.default_rng(seed)

    abstract = analyze(kind, program, e)
    candidates = list(witnesses) + witness_candidates(gamma_as_subspace(e), layout, trials, rng)
    concrete = bottom(kind, layout)
    report = CompletenessReport(kind, abstract, concrete, 0.0, len(candidates))
    for rho in candidates:
        out = alpha(kind, [evaluate(program, rho, policy, strict=False)])
        concrete = dom_join(concrete, out)
        pointwise = analyze(kind, program, alpha(kind, [rho]))
        deviation = max(dom_residual(pointwise, out), dom_residual(out, pointwise))
        report.details.append(deviation)
        if deviation > tol and report.witness is None:
            report.witness, report.witness_deviation = rho, deviation
            logger.info("check_completeness: witness found (deviation %.3e)", deviation)
    overall = max(dom_residual(abstract, concrete), dom_residual(concrete, abstract))
    report.concrete = concrete
    report.deviation = max([overall, *report.details])
    if overall > tol and report.witness is None and candidates:
        report.witness = representative(gamma_as_subspace(e), layout) or candidates[0]
        report.witness_deviation = overall
    logger.info(
        "check_completeness: %s over %d candidate(s), deviation %.3e",
        report.verdict,
        len(candidates),
        report.deviation,
    )
    return report
