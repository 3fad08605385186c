"""
Tests for the qai.logic module.

Validates the Hoare and incorrectness checkers, the shape of emitted
derivations, replay of valid and tampered derivations, and the
composition identity.
"""

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qai.concrete import LoopPolicy, State
from qai.domains import AbstractElement, DomainKind, alpha, bottom, dom_equal, top
from qai.exceptions import ShapeMismatch, UnsupportedDomain
from qai.lang import While
from qai.linalg import QubitLayout, ket
from qai.logic import (
    HOARE_RULES,
    INCORRECTNESS_RULES,
    Derivation,
    HoareTriple,
    IncorrectnessTriple,
    Rule,
    check_hoare,
    check_incorrectness,
    composition_identity_test,
    concatenate,
    derive_hoare,
    derive_incorrectness,
    find_witness,
    replay,
    spc,
)
from qai.parser import parse
from qai.subspace import Subspace, equal, meet, orthocomplement
from tests.strategies import random_program, random_subspace, random_vector

SEEDS = st.integers(0, 2**32 - 1)
GLOBAL = DomainKind.subspace()
POLICY = LoopPolicy(1e-12, 2000)


def g(program_layout: QubitLayout, *kets: str) -> AbstractElement:
    s = Subspace.from_kets(*kets) if kets else Subspace.full(program_layout.dim)
    return AbstractElement.global_(program_layout, s)


def plus(layout: QubitLayout) -> AbstractElement:
    return AbstractElement.global_(layout, Subspace.span([[1, 1]]))


class TestRules:
    def test_partition(self) -> None:
        assert HOARE_RULES | INCORRECTNESS_RULES == set(Rule)
        assert not HOARE_RULES & INCORRECTNESS_RULES
        assert Rule.WHILE_IN.incorrectness and not Rule.WHILE.incorrectness

    def test_values(self) -> None:
        assert Rule("MeasIn") is Rule.MEAS_IN
        assert Rule.SEQ == "Seq"


class TestCheckHoare:
    """check_hoare() on small triples."""

    def test_valid_flip(self) -> None:
        program = parse("qubits q; q *= X;")
        report = check_hoare(HoareTriple(g(program.layout, "0"), program, g(program.layout, "1")))
        assert report.valid
        assert report.derivation is not None
        assert replay(report.derivation, program).ok

    def test_invalid_assert_has_witness(self) -> None:
        program = parse("qubits q; assert zero on q;")
        layout = program.layout
        report = check_hoare(HoareTriple(plus(layout), program, bottom(GLOBAL, layout)))
        assert report.verdict == "Invalid"
        assert report.derivation is None
        assert report.witness is not None
        assert np.allclose(report.witness.rho, np.full((2, 2), 0.5))
        assert report.witness_residual == pytest.approx(1.0)
        assert equal(report.spc.subspace, Subspace.from_kets("0"))

    def test_local_imprecision_is_unknown(self) -> None:
        program = parse("qubits a b; a *= H; a, b *= CNOT; a, b *= CNOT; a *= H;")
        kind = DomainKind.local("a;b").bind(program.layout)
        zero = alpha(kind, [State.basis("00", program.layout)])
        report = check_hoare(HoareTriple(zero, program, zero), trials=4, seed=0)
        assert report.verdict == "Unknown"
        assert report.witness is None

    def test_local_valid_triple_replays(self) -> None:
        program = parse("qubits a b c; a, b *= CNOT; while one on c { c *= X; }")
        kind = DomainKind.local("a,b;b,c").bind(program.layout)
        pre = alpha(kind, [State.basis("101", program.layout)])
        report = check_hoare(HoareTriple(pre, program, top(kind, program.layout)))
        assert report.valid
        assert report.derivation is not None
        assert replay(report.derivation, program).ok

    def test_kinds_must_agree(self) -> None:
        program = parse("qubits a b;")
        kind = DomainKind.local("a;b").bind(program.layout)
        with pytest.raises(ShapeMismatch):
            check_hoare(HoareTriple(top(GLOBAL, program.layout), program, top(kind, program.layout)))

    @settings(max_examples=30, deadline=None)
    @given(seed=SEEDS)
    def test_valid_and_perturbed_triples(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        program = random_program(rng, loops=False)
        layout = program.layout
        dim = int(rng.integers(1, layout.dim + 1))
        pre = AbstractElement.global_(layout, random_subspace(rng, layout.dim, dim))
        strongest = spc(GLOBAL, program, pre)

        valid = check_hoare(HoareTriple(pre, program, strongest))
        assert valid.valid
        assert valid.derivation is not None and replay(valid.derivation, program).ok

        if strongest.subspace.dim == 0:
            return
        hyperplane = orthocomplement(Subspace.span([random_vector(rng, layout.dim)]))
        post = AbstractElement.global_(layout, meet(strongest.subspace, hyperplane))
        invalid = check_hoare(HoareTriple(pre, program, post), seed=seed)
        assert invalid.verdict == "Invalid"
        assert invalid.witness is not None
        assert invalid.witness_residual > 1e-6


class TestFindWitness:
    def test_none_when_triple_holds(self) -> None:
        program = parse("qubits q; q *= X;")
        assert find_witness(program, g(program.layout, "0"), g(program.layout, "1")) is None

    def test_empty_precondition(self) -> None:
        program = parse("qubits q; q *= X;")
        layout = program.layout
        assert find_witness(program, bottom(GLOBAL, layout), bottom(GLOBAL, layout)) is None

    def test_returns_output(self) -> None:
        program = parse("qubits q; q *= H;")
        found = find_witness(program, g(program.layout, "0"), g(program.layout, "0"))
        assert found is not None
        rho, out, residual = found
        assert np.allclose(rho.rho, State.basis("0", program.layout).rho)
        assert np.allclose(out.rho, np.full((2, 2), 0.5))
        assert residual > 0.1


class TestCheckIncorrectness:
    """check_incorrectness() on the subspace domain."""

    def test_valid_loop(self) -> None:
        program = parse("qubits q; while one on q { q *= X; }")
        layout = program.layout
        report = check_incorrectness(IncorrectnessTriple(g(layout), program, g(layout, "0")))
        assert report.valid
        assert report.derivation is not None
        assert replay(report.derivation, program).ok

    def test_bottom_is_always_reachable(self) -> None:
        program = parse("qubits q; q *= H;")
        layout = program.layout
        assert check_incorrectness(IncorrectnessTriple(g(layout, "0"), program, bottom(GLOBAL, layout))).valid

    def test_invalid_reports_unreachable_part(self) -> None:
        program = parse("qubits q; q *= X;")
        layout = program.layout
        report = check_incorrectness(IncorrectnessTriple(g(layout, "0"), program, g(layout)))
        assert report.verdict == "Invalid"
        assert report.derivation is None
        assert report.outside is not None and equal(report.outside, Subspace.from_kets("0"))
        assert report.gap is not None and equal(report.gap, Subspace.from_kets("0"))
        assert report.residual == pytest.approx(1.0)

    def test_local_is_unsupported(self) -> None:
        program = parse("qubits a b;")
        kind = DomainKind.local("a;b").bind(program.layout)
        e = top(kind, program.layout)
        with pytest.raises(UnsupportedDomain):
            check_incorrectness(IncorrectnessTriple(e, program, e))

    @settings(max_examples=30, deadline=None)
    @given(seed=SEEDS)
    def test_duality_with_hoare(self, seed: int) -> None:
        """The strongest postcondition is both a Hoare and an incorrectness post."""
        rng = np.random.default_rng(seed)
        program = random_program(rng)
        layout = program.layout
        pre = AbstractElement.global_(layout, random_subspace(rng, layout.dim))
        strongest = spc(GLOBAL, program, pre)
        hoare = check_hoare(HoareTriple(pre, program, strongest), policy=POLICY)
        incorrect = check_incorrectness(IncorrectnessTriple(pre, program, strongest))
        assert hoare.valid and incorrect.valid
        assert incorrect.derivation is not None
        assert replay(incorrect.derivation, program).ok

        bigger = AbstractElement.global_(layout, Subspace.full(layout.dim))
        assert check_hoare(HoareTriple(pre, program, bigger)).valid
        assert check_incorrectness(IncorrectnessTriple(pre, program, bigger)).valid == (
            strongest.subspace.is_full()
        )


class TestDerivationShape:
    """Emitted derivations have a fixed shape."""

    def test_empty_program(self) -> None:
        program = parse("qubits q;")
        e = g(program.layout, "1")
        d = derive_hoare(GLOBAL, program, e, e)
        assert d.rule is Rule.IMP
        (leaf,) = d.premises
        assert leaf.rule is Rule.EXP and leaf.program == ()
        assert dom_equal(leaf.post, e)

    def test_right_nested_sequence(self) -> None:
        program = parse("qubits q; q *= X; q *= H; q *= X;")
        e = g(program.layout, "0")
        d = derive_hoare(GLOBAL, program, e, spc(GLOBAL, program, e))
        seq = d.premises[0]
        assert seq.rule is Rule.SEQ
        first, rest = seq.premises
        assert first.rule is Rule.EXP and len(first.program) == 1
        assert rest.rule is Rule.SEQ and len(rest.program) == 2
        assert d.size() == 6

    def test_loop_is_wrapped_in_implications(self) -> None:
        program = parse("qubits q; while one on q { q *= X; }")
        e = g(program.layout, "1")
        d = derive_hoare(GLOBAL, program, e, spc(GLOBAL, program, e))
        wrapper = d.premises[0]
        assert wrapper.rule is Rule.IMP
        loop = wrapper.premises[0]
        assert loop.rule is Rule.WHILE
        assert isinstance(loop.program[0], While)
        kept, leave = loop.premises
        assert kept.rule is Rule.IMP
        assert dom_equal(kept.pre, loop.pre) and dom_equal(kept.post, loop.pre)
        assert leave.rule is Rule.EXP
        assert loop.pre.subspace.is_full()

    def test_conditional(self) -> None:
        program = parse("qubits q; if zero on q { skip; } else { q *= X; }")
        e = g(program.layout)
        d = derive_hoare(GLOBAL, program, e, spc(GLOBAL, program, e))
        meas = d.premises[0]
        assert meas.rule is Rule.MEAS
        assert equal(meas.post.subspace, Subspace.from_kets("0"))

    def test_incorrectness_loop_chain(self) -> None:
        program = parse("qubits q; while one on q { q *= H; }")
        e = g(program.layout, "1")
        d = derive_incorrectness(GLOBAL, program, e, spc(GLOBAL, program, e))
        chain = d.premises[0]
        assert chain.rule is Rule.WHILE_IN
        assert len(chain.premises) == 4
        assert len(chain.side) == 1
        assert equal(chain.post.subspace, Subspace.from_kets("0"))
        assert all(node.rule.incorrectness for node in d.walk())

    def test_span_points_into_source(self) -> None:
        text = "qubits q;\nq *= X;\nq *= H;\n"
        program = parse(text)
        e = g(program.layout, "0")
        d = derive_hoare(GLOBAL, program, e, spc(GLOBAL, program, e))
        first = d.premises[0].premises[0]
        assert first.span is not None
        assert text[first.span[0] : first.span[1]] == "q *= X;"


class TestReplay:
    """replay() accepts emitted derivations and rejects tampered ones."""

    def setup_method(self) -> None:
        self.program = parse("qubits a b; a *= H; if zero on a { b *= X; } else { skip; }")
        self.pre = g(self.program.layout, "00")
        self.post = spc(GLOBAL, self.program, self.pre)
        self.derivation = derive_hoare(GLOBAL, self.program, self.pre, self.post)

    def test_accepts(self) -> None:
        assert replay(self.derivation, self.program)

    def test_post_too_small(self) -> None:
        tampered = dataclasses.replace(self.derivation, post=bottom(GLOBAL, self.program.layout))
        report = replay(tampered, self.program)
        assert not report.ok
        assert report.path == ()
        assert "weakening" in report.reason

    def test_tampered_leaf(self) -> None:
        seq = self.derivation.premises[0]
        leaf = seq.premises[0]
        bad_leaf = dataclasses.replace(leaf, post=g(self.program.layout, "11"))
        bad_seq = dataclasses.replace(seq, premises=(bad_leaf, seq.premises[1]))
        tampered = dataclasses.replace(self.derivation, premises=(bad_seq,))
        report = replay(tampered, self.program)
        assert not report.ok
        assert report.path == (0,)

    def test_wrong_proof_system(self) -> None:
        inner = self.derivation.premises[0]
        tampered = dataclasses.replace(inner, rule=Rule.SEQ_IN)
        report = replay(tampered, self.program)
        assert report.ok is False

    def test_invalid_triple_does_not_replay(self) -> None:
        d = derive_hoare(GLOBAL, self.program, self.pre, bottom(GLOBAL, self.program.layout))
        assert not replay(d, self.program).ok

    def test_while_in_rejected_on_local(self) -> None:
        program = parse("qubits a b; while one on b { b *= H; }")
        kind = DomainKind.local("a;b").bind(program.layout)
        pre = alpha(kind, [State.basis("01", program.layout)])
        d = derive_incorrectness(kind, program, pre, spc(kind, program, pre))
        report = replay(d, program)
        assert not report.ok
        assert "subspace domain" in report.reason

    def test_extra_premise(self) -> None:
        leaf = Derivation(Rule.EXP, self.pre, (), self.pre)
        tampered = dataclasses.replace(leaf, premises=(leaf,))
        assert not replay(tampered, self.program).ok


class TestComposition:
    def test_concatenate_merges_declarations(self) -> None:
        p1 = parse("qubits q; unitary V = [[0, 1], [1, 0]]; q *= V;")
        p2 = parse("qubits q; space s = span(|1>); assert s on q;")
        both = concatenate(p1, p2)
        assert [d.name for d in both.unitaries] == ["V"]
        assert [d.name for d in both.spaces] == ["s"]
        assert len(both.body) == 2

    def test_conflicting_declarations(self) -> None:
        p1 = parse("qubits q; unitary V = [[0, 1], [1, 0]];")
        p2 = parse("qubits q; unitary V = [[1, 0], [0, 1]];")
        with pytest.raises(ShapeMismatch):
            concatenate(p1, p2)

    def test_layouts_must_match(self) -> None:
        with pytest.raises(ShapeMismatch):
            concatenate(parse("qubits a;"), parse("qubits b;"))

    @settings(max_examples=30, deadline=None)
    @given(seed=SEEDS)
    def test_identity_on_random_splits(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        program = random_program(rng)
        k = int(rng.integers(0, len(program.body) + 1))
        p1, p2 = program.with_body(program.body[:k]), program.with_body(program.body[k:])
        a = AbstractElement.global_(program.layout, random_subspace(rng, program.layout.dim))
        report = composition_identity_test(GLOBAL, p1, p2, a)
        assert report.equal
        assert dom_equal(report.composed, spc(GLOBAL, program, a))

    def test_local_identity(self) -> None:
        program = parse("qubits a b c; a, b *= CNOT; b, c *= CNOT;")
        kind = DomainKind.local("a,b;b,c").bind(program.layout)
        a = alpha(kind, [State.pure(ket("000") + ket("100"), program.layout)])
        p1, p2 = program.with_body(program.body[:1]), program.with_body(program.body[1:])
        assert composition_identity_test(kind, p1, p2, a).equal
