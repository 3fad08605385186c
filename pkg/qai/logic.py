"""
Hoare and incorrectness triples over an abstract domain.

``check_hoare`` decides ``{a} S {b}`` by comparing the strongest
postcondition ``spc(S, a)`` (the forward analysis) with ``b``, and
``check_incorrectness`` decides ``[a] S [b]`` by the reverse comparison.
Valid triples come with a ``Derivation`` in the corresponding proof
system, which ``replay`` re-checks rule by rule. Invalid Hoare triples
come with a concrete witness state.

Derivations are built in a fixed shape:

- sequences are right-nested ``Seq`` nodes and the empty program is an
  ``Exp`` leaf whose post equals its pre;
- ``Imp`` appears at the root and around each ``While`` node, first
  strengthening the incoming precondition to the loop invariant and then,
  inside the body premise, weakening ``T(inv)`` to ``inv``;
- ``WhileIn`` lists its premises as pairs ``[a_i] assert P; S [a_{i+1}]``,
  ``[a_i] assert P^perp [b_i]`` up to the first ``n`` with
  ``a_{n+1} <= a_0 join ... join a_n``, recorded as its side condition.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from qai.analysis import analyze, analyze_body, transfer_basic, while_fixpoint, witness_candidates
from qai.concrete import LoopPolicy, State, evaluate, mix_representative
from qai.conf import get_tolerances
from qai.domains import (
    AbstractElement,
    DomainKind,
    check_kind,
    dom_equal,
    dom_join,
    dom_leq,
    dom_residual,
    gamma_as_subspace,
)
from qai.exceptions import FixpointBudgetExceeded, QaiError, ShapeMismatch, UnsupportedDomain
from qai.lang import If, Program, Stmt, While, exit_guard, guard, is_basic, span_of
from qai.subspace import (
    Subspace,
    canonical,
    image,
    inclusion_residual,
    meet,
    orthocomplement,
    projector,
    support,
)

logger = logging.getLogger("qai")


class Rule(str, enum.Enum):
    EXP = "Exp"
    SEQ = "Seq"
    MEAS = "Meas"
    IMP = "Imp"
    WHILE = "While"
    EXP_IN = "ExpIn"
    SEQ_IN = "SeqIn"
    MEAS_IN = "MeasIn"
    IMP_IN = "ImpIn"
    WHILE_IN = "WhileIn"

    @property
    def incorrectness(self) -> bool:
        return self.value.endswith("In")


HOARE_RULES = frozenset({Rule.EXP, Rule.SEQ, Rule.MEAS, Rule.IMP, Rule.WHILE})
INCORRECTNESS_RULES = frozenset(set(Rule) - HOARE_RULES)


@dataclass(frozen=True)
class HoareTriple:
    """``{pre} program {post}``: every run from ``pre`` ends in ``post``."""

    pre: AbstractElement
    program: Program
    post: AbstractElement


@dataclass(frozen=True)
class IncorrectnessTriple:
    """``[pre] program [post]``: ``post`` under-approximates what ``pre`` reaches."""

    pre: AbstractElement
    program: Program
    post: AbstractElement


@dataclass(frozen=True)
class OrderCheck:
    """A recorded ``lhs <= rhs`` fact and its inclusion residual."""

    lhs: AbstractElement
    rhs: AbstractElement
    residual: float

    @classmethod
    def of(cls, lhs: AbstractElement, rhs: AbstractElement) -> OrderCheck:
        return cls(lhs, rhs, dom_residual(lhs, rhs))


@dataclass(frozen=True)
class Derivation:
    """One node of a proof tree; ``program`` is the statement fragment it concludes about."""

    rule: Rule
    pre: AbstractElement
    program: tuple[Stmt, ...]
    post: AbstractElement
    premises: tuple[Derivation, ...] = ()
    side: tuple[OrderCheck, ...] = ()

    @property
    def span(self) -> tuple[int, int] | None:
        return span_of(self.program)

    @property
    def kind(self) -> DomainKind:
        return self.pre.kind

    def walk(self) -> Iterator[Derivation]:
        yield self
        for premise in self.premises:
            yield from premise.walk()

    def size(self) -> int:
        return sum(1 for _ in self.walk())


def _check_triple(pre: AbstractElement, program: Program, post: AbstractElement) -> DomainKind:
    if pre.kind != post.kind:
        raise ShapeMismatch(f"Precondition is a {pre.kind} element, postcondition a {post.kind} element")
    if pre.layout != program.layout or post.layout != program.layout:
        raise ShapeMismatch("Triple elements and program use different layouts")
    kind = pre.kind.bind(program.layout)
    check_kind(kind, pre)
    return kind


def spc(
    kind: DomainKind, program: Program, a: AbstractElement, body: Sequence[Stmt] | None = None
) -> AbstractElement:
    """Strongest postcondition of *program* (or *body*) from *a*."""
    return analyze(kind, program, a, body)


# ---------------------------------------------------------------------------
# Derivation construction
# ---------------------------------------------------------------------------


@dataclass
class _Builder:
    kind: DomainKind
    program: Program
    incorrectness: bool

    def rule(self, hoare: Rule) -> Rule:
        return Rule(hoare.value + "In") if self.incorrectness else hoare

    def body(self, body: Sequence[Stmt], a: AbstractElement) -> Derivation:
        body = tuple(body)
        if not body:
            return Derivation(self.rule(Rule.EXP), a, (), a)
        if len(body) == 1:
            return self.stmt(body[0], a)
        first = self.stmt(body[0], a)
        rest = self.body(body[1:], first.post)
        return Derivation(self.rule(Rule.SEQ), a, body, rest.post, (first, rest))

    def stmt(self, stmt: Stmt, a: AbstractElement) -> Derivation:
        if is_basic(stmt):
            post = transfer_basic(self.kind, self.program, stmt, a)
            return Derivation(self.rule(Rule.EXP), a, (stmt,), post)
        if isinstance(stmt, If):
            then_part = self.body((guard(stmt), *stmt.then_body), a)
            else_part = self.body((exit_guard(stmt), *stmt.else_body), a)
            post = dom_join(else_part.post, then_part.post)
            return Derivation(self.rule(Rule.MEAS), a, (stmt,), post, (then_part, else_part))
        if isinstance(stmt, While):
            return self.while_in(stmt, a) if self.incorrectness else self.while_hoare(stmt, a)
        raise ShapeMismatch(f"Unknown statement {type(stmt).__name__}")

    def while_hoare(self, stmt: While, a: AbstractElement) -> Derivation:
        invariant, iterations = while_fixpoint(self.kind, self.program, stmt, a)
        step = self.body((guard(stmt), *stmt.body), invariant)
        kept = Derivation(
            Rule.IMP,
            invariant,
            step.program,
            invariant,
            (step,),
            (OrderCheck.of(invariant, invariant), OrderCheck.of(step.post, invariant)),
        )
        leave = self.stmt(exit_guard(stmt), invariant)
        loop = Derivation(Rule.WHILE, invariant, (stmt,), leave.post, (kept, leave))
        logger.debug("derive: loop invariant after %d iteration(s)", iterations)
        return Derivation(
            Rule.IMP,
            a,
            (stmt,),
            leave.post,
            (loop,),
            (OrderCheck.of(a, invariant), OrderCheck.of(leave.post, leave.post)),
        )

    def while_in(self, stmt: While, a: AbstractElement) -> Derivation:
        bound = self.kind.height(self.program.layout) + 1
        step_body = (guard(stmt), *stmt.body)
        premises: list[Derivation] = []
        current, reached = a, a
        for _ in range(bound):
            step = self.body(step_body, current)
            leave = self.stmt(exit_guard(stmt), current)
            premises.extend((step, leave))
            if dom_leq(step.post, reached):
                post = premises[1].post
                for exit_premise in premises[3::2]:
                    post = dom_join(post, exit_premise.post)
                side = (OrderCheck.of(step.post, reached),)
                return Derivation(Rule.WHILE_IN, a, (stmt,), post, tuple(premises), side)
            current = step.post
            reached = dom_join(reached, current)
        raise FixpointBudgetExceeded(f"Loop chain did not stabilise within {bound} steps")


def derive_hoare(
    kind: DomainKind, program: Program, pre: AbstractElement, post: AbstractElement
) -> Derivation:
    """Proof tree for ``{pre} program {post}``; replay fails unless the triple is valid."""
    kind = kind.bind(program.layout)
    inner = _Builder(kind, program, incorrectness=False).body(program.body, pre)
    return Derivation(
        Rule.IMP,
        pre,
        program.body,
        post,
        (inner,),
        (OrderCheck.of(pre, pre), OrderCheck.of(inner.post, post)),
    )


def derive_incorrectness(
    kind: DomainKind, program: Program, pre: AbstractElement, post: AbstractElement
) -> Derivation:
    """Proof tree for ``[pre] program [post]``; replay fails unless the triple is valid."""
    kind = kind.bind(program.layout)
    inner = _Builder(kind, program, incorrectness=True).body(program.body, pre)
    return Derivation(
        Rule.IMP_IN,
        pre,
        program.body,
        post,
        (inner,),
        (OrderCheck.of(pre, pre), OrderCheck.of(post, inner.post)),
    )


# ---------------------------------------------------------------------------
# Checking triples
# ---------------------------------------------------------------------------


@dataclass
class HoareReport:
    verdict: str  # "Valid", "Invalid" or "Unknown"
    triple: HoareTriple
    spc: AbstractElement
    residual: float  # how far spc sticks out of post
    derivation: Derivation | None = None
    witness: State | None = None
    witness_output: State | None = None
    witness_residual: float = 0.0

    @property
    def valid(self) -> bool:
        return self.verdict == "Valid"


@dataclass
class IncorrectnessReport:
    verdict: str  # "Valid" or "Invalid"
    triple: IncorrectnessTriple
    spc: AbstractElement
    residual: float  # how far post sticks out of spc
    derivation: Derivation | None = None
    outside: Subspace | None = None  # (I - P_spc) applied to post
    gap: Subspace | None = None  # post meet spc^perp

    @property
    def valid(self) -> bool:
        return self.verdict == "Valid"


def _violation(
    program: Program, rho: State, post: Subspace, policy: LoopPolicy | None
) -> tuple[State, float]:
    out = evaluate(program, rho, policy, strict=False)
    return out, inclusion_residual(support(out.rho), post)


def find_witness(
    program: Program,
    pre: AbstractElement,
    post: AbstractElement,
    *,
    policy: LoopPolicy | None = None,
    trials: int = 16,
    seed: int | None = None,
) -> tuple[State, State, float] | None:
    """
    A state satisfying *pre* whose output violates *post*, if one is found.

    The mixture of the canonical basis states of ``gamma(pre)`` is tried
    first; its output support is the join of the outputs over all of
    ``gamma(pre)``. Sampled states of ``gamma(pre)`` follow.
    """
    g = gamma_as_subspace(pre)
    if g.dim == 0:
        return None
    target = gamma_as_subspace(post)
    tol = get_tolerances().incl_tol
    layout = program.layout
    basis_states = [State.pure(b, layout) for b in canonical(g).vectors()]
    mixture = mix_representative(basis_states)
    out, residual = _violation(program, mixture, target, policy)
    if residual > tol:
        return mixture, out, residual
    logger.warning("find_witness: mixture satisfies the postcondition; sampling states of the precondition")
    rng = np.random.default_rng(seed)
    for rho in witness_candidates(g, layout, trials, rng):
        out, residual = _violation(program, rho, target, policy)
        if residual > tol:
            return rho, out, residual
    return None


def check_hoare(
    t: HoareTriple,
    *,
    policy: LoopPolicy | None = None,
    trials: int = 16,
    seed: int | None = None,
) -> HoareReport:
    """
    Decide ``{pre} program {post}``.

    Valid triples carry a derivation. When the strongest postcondition is
    not below ``post``, a witness state is searched for; on the subspace
    domain one always exists, on a local domain the verdict is Unknown if
    the search comes back empty.
    """
    kind = _check_triple(t.pre, t.program, t.post)
    strongest = spc(kind, t.program, t.pre)
    residual = dom_residual(strongest, t.post)
    report = HoareReport("Valid", t, strongest, residual)
    if dom_leq(strongest, t.post):
        report.derivation = derive_hoare(kind, t.program, t.pre, t.post)
        logger.info("check_hoare: Valid (derivation of %d node(s))", report.derivation.size())
        return report
    found = find_witness(t.program, t.pre, t.post, policy=policy, trials=trials, seed=seed)
    if found is not None:
        report.verdict = "Invalid"
        report.witness, report.witness_output, report.witness_residual = found
    elif kind.is_local:
        report.verdict = "Unknown"
    else:
        report.verdict = "Invalid"
    logger.info("check_hoare: %s (residual %.3e)", report.verdict, residual)
    return report


def check_incorrectness(t: IncorrectnessTriple) -> IncorrectnessReport:
    """
    Decide ``[pre] program [post]`` on the subspace domain.

    Raises:
        UnsupportedDomain: For local-domain triples.
    """
    kind = _check_triple(t.pre, t.program, t.post)
    if kind.is_local:
        raise UnsupportedDomain("Incorrectness triples are only checked on the subspace domain")
    strongest = spc(kind, t.program, t.pre)
    residual = dom_residual(t.post, strongest)
    report = IncorrectnessReport("Valid", t, strongest, residual)
    if dom_leq(t.post, strongest):
        report.derivation = derive_incorrectness(kind, t.program, t.pre, t.post)
        logger.info("check_incorrectness: Valid (derivation of %d node(s))", report.derivation.size())
        return report
    report.verdict = "Invalid"
    s, b = strongest.subspace, t.post.subspace
    report.outside = image(np.eye(s.ambient_dim) - projector(s), b)
    report.gap = meet(b, orthocomplement(s))
    logger.info("check_incorrectness: Invalid (residual %.3e)", residual)
    return report


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReplayReport:
    ok: bool
    path: tuple[int, ...] = ()  # premise indices from the root to the failing node
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class _ReplayFailure(Exception):
    def __init__(self, path: tuple[int, ...], reason: str) -> None:
        super().__init__(reason)
        self.path = path
        self.reason = reason


@dataclass
class _Replayer:
    program: Program
    kind: DomainKind
    incorrectness: bool

    def fail(self, path: tuple[int, ...], reason: str) -> None:
        raise _ReplayFailure(path, reason)

    def same(self, path: tuple[int, ...], a: AbstractElement, b: AbstractElement, what: str) -> None:
        if not dom_equal(a, b):
            self.fail(path, f"{what} differ (residual {max(dom_residual(a, b), dom_residual(b, a)):.3e})")

    def below(self, path: tuple[int, ...], a: AbstractElement, b: AbstractElement, what: str) -> None:
        if not dom_leq(a, b):
            self.fail(path, f"{what} does not hold (residual {dom_residual(a, b):.3e})")

    def premises(self, path: tuple[int, ...], d: Derivation, count: int) -> None:
        if len(d.premises) != count:
            self.fail(path, f"{d.rule.value} needs {count} premise(s), found {len(d.premises)}")

    def single(self, path: tuple[int, ...], d: Derivation, types: type | tuple[type, ...]) -> Stmt:
        if len(d.program) != 1 or not isinstance(d.program[0], types):
            self.fail(path, f"{d.rule.value} does not conclude about a single matching statement")
        return d.program[0]

    def check(self, d: Derivation, path: tuple[int, ...] = ()) -> None:
        if d.rule.incorrectness != self.incorrectness:
            self.fail(path, f"rule {d.rule.value} does not belong to this proof system")
        check_kind(self.kind, d.pre)
        check_kind(self.kind, d.post)
        hoare = Rule(d.rule.value.removesuffix("In"))
        getattr(self, f"_check_{hoare.value.lower()}")(d, path)
        for i, premise in enumerate(d.premises):
            self.check(premise, (*path, i))

    def _check_exp(self, d: Derivation, path: tuple[int, ...]) -> None:
        self.premises(path, d, 0)
        if not d.program:
            self.same(path, d.post, d.pre, "post and pre of the empty program")
            return
        stmt = self.single(path, d, Stmt)
        if not is_basic(stmt):
            self.fail(path, f"{d.rule.value} applied to a compound statement")
        expected = transfer_basic(self.kind, self.program, stmt, d.pre)
        self.same(path, d.post, expected, "post and transfer of the statement")

    def _check_seq(self, d: Derivation, path: tuple[int, ...]) -> None:
        self.premises(path, d, 2)
        first, rest = d.premises
        if not first.program or not rest.program or first.program + rest.program != d.program:
            self.fail(path, "premises do not split the sequence")
        self.same(path, first.pre, d.pre, "pre of the first premise and of the conclusion")
        self.same(path, rest.pre, first.post, "intermediate assertions")
        self.same(path, rest.post, d.post, "post of the second premise and of the conclusion")

    def _check_meas(self, d: Derivation, path: tuple[int, ...]) -> None:
        self.premises(path, d, 2)
        stmt = self.single(path, d, If)
        assert isinstance(stmt, If)
        then_part, else_part = d.premises
        if then_part.program != (guard(stmt), *stmt.then_body):
            self.fail(path, "first premise is not the guarded then-branch")
        if else_part.program != (exit_guard(stmt), *stmt.else_body):
            self.fail(path, "second premise is not the guarded else-branch")
        self.same(path, then_part.pre, d.pre, "pre of the then-branch")
        self.same(path, else_part.pre, d.pre, "pre of the else-branch")
        self.same(path, d.post, dom_join(else_part.post, then_part.post), "post and join of branch posts")

    def _check_imp(self, d: Derivation, path: tuple[int, ...]) -> None:
        self.premises(path, d, 1)
        (inner,) = d.premises
        if inner.program != d.program:
            self.fail(path, "premise concludes about a different program")
        if self.incorrectness:
            self.below(path, inner.pre, d.pre, "weakening of the precondition")
            self.below(path, d.post, inner.post, "strengthening of the postcondition")
        else:
            self.below(path, d.pre, inner.pre, "strengthening of the precondition")
            self.below(path, inner.post, d.post, "weakening of the postcondition")

    def _check_while(self, d: Derivation, path: tuple[int, ...]) -> None:
        stmt = self.single(path, d, While)
        assert isinstance(stmt, While)
        if self.incorrectness:
            self._check_while_chain(d, stmt, path)
            return
        self.premises(path, d, 2)
        kept, leave = d.premises
        if kept.program != (guard(stmt), *stmt.body):
            self.fail(path, "first premise is not the guarded loop body")
        if leave.program != (exit_guard(stmt),):
            self.fail(path, "second premise is not the loop exit")
        self.same(path, kept.pre, d.pre, "invariant and pre of the body premise")
        self.same(path, kept.post, d.pre, "invariant and post of the body premise")
        self.same(path, leave.pre, d.pre, "invariant and pre of the exit premise")
        self.same(path, leave.post, d.post, "post of the exit premise and of the loop")

    def _check_while_chain(self, d: Derivation, stmt: While, path: tuple[int, ...]) -> None:
        if self.kind.is_local:
            self.fail(path, "loop chains are only sound on the subspace domain")
        if not d.premises or len(d.premises) % 2:
            self.fail(path, "WhileIn needs body/exit premise pairs")
        steps, leaves = d.premises[0::2], d.premises[1::2]
        self.same(path, steps[0].pre, d.pre, "a_0 and the loop precondition")
        for i, (step, leave) in enumerate(zip(steps, leaves)):
            if step.program != (guard(stmt), *stmt.body):
                self.fail((*path, 2 * i), "premise is not the guarded loop body")
            if leave.program != (exit_guard(stmt),):
                self.fail((*path, 2 * i + 1), "premise is not the loop exit")
            self.same((*path, 2 * i + 1), leave.pre, step.pre, f"a_{i} of the body and exit premises")
            if i + 1 < len(steps):
                self.same((*path, 2 * i + 2), steps[i + 1].pre, step.post, f"a_{i + 1} along the chain")
        reached = steps[0].pre
        for step in steps[1:]:
            reached = dom_join(reached, step.pre)
        if len(d.side) != 1:
            self.fail(path, "WhileIn needs exactly one truncation record")
        self.below(path, steps[-1].post, reached, "truncation of the loop chain")
        joined = leaves[0].post
        for leave in leaves[1:]:
            joined = dom_join(joined, leave.post)
        self.same(path, d.post, joined, "post and join of the exit premises")


def replay(derivation: Derivation, program: Program) -> ReplayReport:
    """
    Re-check every node of *derivation* against its rule.

    *program* supplies the declarations the fragments refer to. Never
    raises; a failure names the first failing node by its premise path.
    """
    try:
        kind = derivation.pre.kind.bind(program.layout)
        replayer = _Replayer(program, kind, derivation.rule.incorrectness)
        replayer.check(derivation)
    except _ReplayFailure as failure:
        logger.info("replay: failed at %s: %s", list(failure.path), failure.reason)
        return ReplayReport(False, failure.path, failure.reason)
    except QaiError as exc:
        return ReplayReport(False, (), f"{type(exc).__name__}: {exc}")
    logger.debug("replay: %d node(s) checked", derivation.size())
    return ReplayReport(True)


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def concatenate(p1: Program, p2: Program) -> Program:
    """``p1; p2`` with the declarations of both."""
    if p1.layout != p2.layout:
        raise ShapeMismatch("Programs declare different qubits")
    unitaries = list(p1.unitaries)
    spaces = list(p1.spaces)
    for decl in p2.unitaries:
        mine = p1.unitary_decl(decl.name)
        if mine is None:
            unitaries.append(decl)
        elif mine.rows != decl.rows:
            raise ShapeMismatch(f"Unitary '{decl.name}' is declared differently in the two programs")
    for space in p2.spaces:
        mine_space = p1.space_decl(space.name)
        if mine_space is None:
            spaces.append(space)
        elif mine_space.vectors != space.vectors:
            raise ShapeMismatch(f"Space '{space.name}' is declared differently in the two programs")
    return Program(p1.layout, tuple(unitaries), tuple(spaces), p1.body + p2.body)


@dataclass
class CompositionReport:
    composed: AbstractElement  # analysis of p1; p2
    sequential: AbstractElement  # analysis of p2 after analysis of p1
    residual: float  # symmetric inclusion residual

    @property
    def equal(self) -> bool:
        return self.residual <= get_tolerances().incl_tol


def composition_identity_test(
    kind: DomainKind, p1: Program, p2: Program, a: AbstractElement
) -> CompositionReport:
    """Compare the analysis of ``p1; p2`` with the analysis of ``p2`` run on that of ``p1``."""
    both = concatenate(p1, p2)
    kind = kind.bind(both.layout)
    composed = analyze(kind, both, a)
    sequential = analyze_body(kind, both, p2.body, analyze_body(kind, both, p1.body, a))
    residual = max(dom_residual(composed, sequential), dom_residual(sequential, composed))
    report = CompositionReport(composed, sequential, residual)
    logger.info("composition_identity_test: equal=%s (residual %.3e)", report.equal, residual)
    return report
