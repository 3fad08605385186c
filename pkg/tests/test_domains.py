"""
Tests for the qai.domains module.

Validates signatures, domain kinds, the componentwise lattice of abstract
elements and the abstraction / concretization of the subspace and local
domains.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qai.concrete import State
from qai.domains import (
    AbstractElement,
    DomainKind,
    Signature,
    alpha,
    alpha_of_subspace,
    bottom,
    check_kind,
    dom_equal,
    dom_join,
    dom_leq,
    dom_meet,
    dom_residual,
    gamma_as_subspace,
    satisfies,
    top,
)
from qai.exceptions import ConfigurationError, ShapeMismatch, UnknownVariable
from qai.linalg import QubitLayout, ket
from qai.subspace import Subspace, equal, leq
from tests.strategies import layout_of, random_state, random_state_in, random_subspace

SEEDS = st.integers(0, 2**32 - 1)
LAYOUT = QubitLayout.of("q1", "q2", "q3")
LOCAL = DomainKind.local("q1,q2;q2,q3").bind(LAYOUT)
GLOBAL = DomainKind.subspace()
P_EQ = Subspace.from_kets("00", "11")


def ghz() -> State:
    return State.pure(ket("000") + ket("111"), LAYOUT)


def local(*parts: Subspace) -> AbstractElement:
    return AbstractElement(LOCAL, LAYOUT, parts)


class TestSignature:
    def test_parse_and_str(self) -> None:
        sig = Signature.parse("q1, q2; q2,q3")
        assert sig.subsets == (("q1", "q2"), ("q2", "q3"))
        assert str(sig) == "q1,q2;q2,q3"
        assert sig.height() == 8

    def test_validated_sorts_by_layout(self) -> None:
        sig = Signature.parse("q3,q1").validated(LAYOUT)
        assert sig.subsets == (("q1", "q3"),)

    @pytest.mark.parametrize("text", ["q1,q2,q3", "q1,q1", "q1;", ""])
    def test_rejects_bad_subsets(self, text: str) -> None:
        with pytest.raises(ConfigurationError):
            Signature.parse(text).validated(LAYOUT)

    def test_unknown_qubit(self) -> None:
        with pytest.raises(UnknownVariable):
            Signature.parse("q1,q9").validated(LAYOUT)


class TestDomainKind:
    def test_parse(self) -> None:
        assert DomainKind.parse("subspace") == GLOBAL
        assert DomainKind.parse("local:q2,q1;q3", LAYOUT) == DomainKind.local("q1,q2;q3")
        with pytest.raises(ConfigurationError):
            DomainKind.parse("octagon")

    def test_height(self) -> None:
        assert GLOBAL.height(LAYOUT) == 8
        assert LOCAL.height(LAYOUT) == 8
        assert LOCAL.part_dims(LAYOUT) == [4, 4]

    def test_str(self) -> None:
        assert str(LOCAL) == "local:q1,q2;q2,q3"
        assert LOCAL.name == "local" and GLOBAL.name == "subspace"


class TestAbstractElement:
    def test_part_shapes(self) -> None:
        with pytest.raises(ShapeMismatch):
            AbstractElement(LOCAL, LAYOUT, [P_EQ])
        with pytest.raises(ShapeMismatch):
            AbstractElement(LOCAL, LAYOUT, [P_EQ, Subspace.full(8)])

    def test_local_has_no_single_subspace(self) -> None:
        with pytest.raises(ShapeMismatch):
            _ = local(P_EQ, P_EQ).subspace

    def test_kinds_do_not_mix(self) -> None:
        with pytest.raises(ShapeMismatch):
            dom_leq(bottom(GLOBAL, LAYOUT), bottom(LOCAL, LAYOUT))
        with pytest.raises(ShapeMismatch):
            check_kind(GLOBAL, top(LOCAL, LAYOUT))


class TestLattice:
    """Order, join and meet act componentwise."""

    def test_bottom_and_top(self) -> None:
        x = local(P_EQ, Subspace.from_kets("01"))
        assert dom_leq(bottom(LOCAL, LAYOUT), x)
        assert dom_leq(x, top(LOCAL, LAYOUT))
        assert dom_equal(dom_meet(top(LOCAL, LAYOUT), x), x)

    def test_componentwise_join(self) -> None:
        zeros = local(Subspace.from_kets("00"), Subspace.from_kets("00"))
        ones = local(Subspace.from_kets("11"), Subspace.from_kets("11"))
        assert dom_equal(dom_join(zeros, ones), local(P_EQ, P_EQ))

    def test_order_needs_every_component(self) -> None:
        a = local(Subspace.from_kets("00"), Subspace.from_kets("01"))
        b = local(P_EQ, P_EQ)
        assert not dom_leq(a, b)
        assert dom_residual(a, b) == pytest.approx(1.0)


class TestAlpha:
    """alpha() joins supports globally or per signature subset."""

    def test_global_ghz(self) -> None:
        e = alpha(GLOBAL, [ghz()])
        assert e.subspace.dim == 1
        assert equal(e.subspace, Subspace.span([ket("000") + ket("111")]))

    def test_local_ghz(self) -> None:
        e = alpha(LOCAL, [ghz()])
        assert dom_equal(e, local(P_EQ, P_EQ))

    def test_empty_set(self) -> None:
        assert dom_equal(alpha(GLOBAL, [], LAYOUT), bottom(GLOBAL, LAYOUT))
        with pytest.raises(ShapeMismatch):
            alpha(GLOBAL, [])

    def test_alpha_of_subspace_matches_states(self) -> None:
        g = Subspace.span([ket("000") + ket("111")])
        assert dom_equal(alpha_of_subspace(LOCAL, LAYOUT, g), alpha(LOCAL, [ghz()]))


class TestGamma:
    """gamma_as_subspace() is the meet of the cylinders of the parts."""

    def test_local_ghz_parts(self) -> None:
        g = gamma_as_subspace(local(P_EQ, P_EQ))
        assert equal(g, Subspace.from_kets("000", "111"))

    def test_top(self) -> None:
        assert gamma_as_subspace(top(LOCAL, LAYOUT)).is_full()

    def test_satisfies(self) -> None:
        e = local(P_EQ, P_EQ)
        assert satisfies(ghz(), e)
        assert satisfies(State.basis("111", LAYOUT), e)
        assert not satisfies(State.basis("110", LAYOUT), e)

    @settings(max_examples=30, deadline=None)
    @given(seed=SEEDS)
    def test_local_alpha_is_sound(self, seed: int) -> None:
        """Every abstracted state lies in the concretization."""
        rng = np.random.default_rng(seed)
        states = [random_state(rng, LAYOUT, rank=int(rng.integers(1, 3))) for _ in range(2)]
        e = alpha(LOCAL, states)
        assert all(satisfies(s, e) for s in states)

    @settings(max_examples=30, deadline=None)
    @given(seed=SEEDS)
    def test_galois_insertion_on_local_parts(self, seed: int) -> None:
        """alpha(gamma(e)) never exceeds e, and gamma(alpha(gamma(e))) equals gamma(e)."""
        rng = np.random.default_rng(seed)
        e = local(random_subspace(rng, 4, 2), random_subspace(rng, 4, 3))
        g = gamma_as_subspace(e)
        back = alpha_of_subspace(LOCAL, LAYOUT, g)
        assert dom_leq(back, e)
        assert equal(gamma_as_subspace(back), g)

    @settings(max_examples=30, deadline=None)
    @given(seed=SEEDS, n=st.integers(1, 3))
    def test_global_alpha_gamma(self, seed: int, n: int) -> None:
        rng = np.random.default_rng(seed)
        layout = layout_of(n)
        g = random_subspace(rng, layout.dim, int(rng.integers(1, layout.dim + 1)))
        state = random_state_in(rng, g, layout)
        e = alpha(GLOBAL, [state])
        assert equal(gamma_as_subspace(e), g)
        assert leq(e.subspace, g)
