"""
Tests for the qai.subspace module.

Validates the subspace lattice operations, supports of partial density
operators, the canonical basis and the abstraction / concretization pair
of the subspace domain.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qai.conf import override_tolerances
from qai.exceptions import DimensionMismatch, NotPSD, TraceTooLarge
from qai.gates import gate_matrix
from qai.linalg import QubitLayout, ket
from qai.subspace import (
    Subspace,
    alpha_s,
    canonical,
    cylinder,
    equal,
    gamma_s_contains,
    image,
    inclusion_residual,
    join,
    join_all,
    kraus_image,
    leq,
    meet,
    orthocomplement,
    projector,
    reduced_support,
    support,
)
from tests.strategies import random_state, random_state_in, random_subspace, random_vector

SEEDS = st.integers(0, 2**32 - 1)


def plus() -> Subspace:
    return Subspace.span([[1, 1]])


class TestLattice:
    """Join, meet and orthocomplement on small examples."""

    def test_join_of_basis_states(self) -> None:
        s = join(Subspace.from_kets("00"), Subspace.from_kets("11"))
        assert s.dim == 2
        assert equal(s, Subspace.from_kets("11", "00"))

    def test_meet_of_planes(self) -> None:
        a = Subspace.from_kets("000", "001")
        b = Subspace.from_kets("001", "010")
        assert equal(meet(a, b), Subspace.from_kets("001"))

    def test_meet_of_transversal_lines_is_zero(self) -> None:
        assert meet(plus(), Subspace.from_kets("0")).is_zero()

    def test_orthocomplement(self) -> None:
        assert equal(orthocomplement(plus()), Subspace.span([[1, -1]]))
        assert orthocomplement(Subspace.zero(4)).is_full()
        assert orthocomplement(Subspace.full(4)).is_zero()

    def test_bounds(self) -> None:
        s = Subspace.from_kets("01")
        assert leq(Subspace.zero(4), s)
        assert leq(s, Subspace.full(4))
        assert not leq(s, Subspace.from_kets("10"))

    def test_join_all_empty(self) -> None:
        assert join_all([], 8).is_zero()

    def test_mixed_dimensions(self) -> None:
        with pytest.raises(DimensionMismatch):
            join(Subspace.zero(2), Subspace.zero(4))

    def test_inclusion_residual(self) -> None:
        assert inclusion_residual(Subspace.from_kets("0"), plus()) == pytest.approx(0.5)

    def test_incl_tol_controls_inclusion(self) -> None:
        tilted = Subspace.span([[1, 1e-7]])
        assert not leq(tilted, Subspace.from_kets("0"))
        with override_tolerances(incl_tol=1e-6):
            assert leq(tilted, Subspace.from_kets("0"))

    @settings(max_examples=40, deadline=None)
    @given(seed=SEEDS)
    def test_lattice_laws(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        a, b = random_subspace(rng, 8), random_subspace(rng, 8)
        j, m = join(a, b), meet(a, b)
        assert leq(a, j) and leq(b, j)
        assert leq(m, a) and leq(m, b)
        assert equal(join(a, b), join(b, a))
        assert equal(orthocomplement(orthocomplement(a)), a)
        assert equal(orthocomplement(j), meet(orthocomplement(a), orthocomplement(b)))

    @settings(max_examples=40, deadline=None)
    @given(seed=SEEDS)
    def test_dimension_formula_for_generic_spaces(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        a = random_subspace(rng, 8, int(rng.integers(0, 9)))
        b = random_subspace(rng, 8, int(rng.integers(0, 9)))
        assert join(a, b).dim == min(8, a.dim + b.dim)
        assert meet(a, b).dim == max(0, a.dim + b.dim - 8)


class TestSupport:
    """support() keeps eigenvectors above the relative rank threshold."""

    def test_pure_state(self) -> None:
        psi = (ket("00") + ket("11")) / np.sqrt(2)
        s = support(psi @ psi.conj().T)
        assert s.dim == 1
        assert equal(s, Subspace.span([psi]))

    def test_zero_operator(self) -> None:
        assert support(np.zeros((4, 4))).is_zero()

    def test_rank_tol_drops_tiny_eigenvalues(self) -> None:
        assert support(np.diag([1.0, 1e-12])).dim == 1
        with override_tolerances(rank_tol=1e-15):
            assert support(np.diag([1.0, 1e-12])).dim == 2

    def test_negative_eigenvalue(self) -> None:
        with pytest.raises(NotPSD):
            support(np.diag([1.0, -0.5]))

    def test_partial_state(self) -> None:
        assert equal(support(np.diag([0.0, 0.25])), Subspace.from_kets("1"))

    @settings(max_examples=1000, deadline=None)
    @given(seed=SEEDS)
    def test_support_of_positive_combination_is_join(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        layout = QubitLayout.of("a", "b", "c")
        states = [random_state(rng, layout, rank=int(rng.integers(1, 3))).rho for _ in range(int(rng.integers(1, 4)))]
        weights = rng.uniform(0.1, 1.0, size=len(states))
        combined = sum(w * rho for w, rho in zip(weights, states))
        assert equal(support(combined), join_all([support(rho) for rho in states], 8))


class TestImages:
    def test_unitary_image(self) -> None:
        assert equal(image(gate_matrix("H"), Subspace.from_kets("0")), plus())

    def test_image_of_projection_can_drop_dimension(self) -> None:
        p0 = projector(Subspace.from_kets("0"))
        assert image(p0, Subspace.from_kets("1")).is_zero()
        assert equal(image(p0, plus()), Subspace.from_kets("0"))

    def test_kraus_image_of_measurement(self) -> None:
        kraus = [projector(Subspace.from_kets("0")), projector(Subspace.from_kets("1"))]
        assert kraus_image(kraus, plus()).is_full()

    def test_rectangular_operator(self) -> None:
        out = image(ket("01"), Subspace.full(1))
        assert out.ambient_dim == 4
        assert equal(out, Subspace.from_kets("01"))

    def test_shape_mismatch(self) -> None:
        with pytest.raises(DimensionMismatch):
            image(np.eye(2), Subspace.full(4))


class TestCanonical:
    """canonical() is a deterministic function of the subspace."""

    def test_basis_states_are_kept(self) -> None:
        s = canonical(Subspace.span([ket("11") + ket("00"), ket("00") - ket("11")]))
        assert np.allclose(np.abs(s.basis), np.abs(np.column_stack([ket("00"), ket("11")])))

    @settings(max_examples=30, deadline=None)
    @given(seed=SEEDS)
    def test_independent_of_stored_basis(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        s = random_subspace(rng, 8, int(rng.integers(1, 8)))
        mixed = Subspace(s.basis @ np.linalg.qr(rng.normal(size=(s.dim, s.dim)))[0])
        assert np.allclose(canonical(s).basis, canonical(mixed).basis, atol=1e-8)
        assert equal(canonical(s), s)

    def test_extremes(self) -> None:
        assert canonical(Subspace.zero(4)).is_zero()
        assert canonical(Subspace.full(4)).is_full()


class TestCylinders:
    layout = QubitLayout.of("a", "b", "c")

    def test_cylinder_dimension(self) -> None:
        s = cylinder(Subspace.from_kets("00", "11"), ["a", "c"], self.layout)
        assert s.dim == 4
        assert leq(Subspace.from_kets("010", "111"), s)
        assert not leq(Subspace.from_kets("001"), s)

    def test_reduced_support_of_ghz(self) -> None:
        ghz = Subspace.span([ket("000") + ket("111")])
        assert equal(reduced_support(ghz, ["a", "b"], self.layout), Subspace.from_kets("00", "11"))
        assert reduced_support(ghz, ["c"], self.layout).is_full()

    @settings(max_examples=30, deadline=None)
    @given(seed=SEEDS)
    def test_subspace_lies_in_cylinder_of_reduced_support(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        s = random_subspace(rng, 8, int(rng.integers(0, 4)))
        names = ["a", "c"]
        assert leq(s, cylinder(reduced_support(s, names, self.layout), names, self.layout))


class TestGaloisConnection:
    """alpha_s and gamma_s_contains on random states and subspaces."""

    layout = QubitLayout.of("a", "b")

    def test_empty_family(self) -> None:
        assert alpha_s([], 4).is_zero()

    def test_trace_too_large(self) -> None:
        with pytest.raises(TraceTooLarge):
            alpha_s([np.eye(4) / 2], 4)

    def test_zero_state_is_in_every_concretization(self) -> None:
        assert gamma_s_contains(Subspace.zero(4), np.zeros((4, 4)))

    @settings(max_examples=1000, deadline=None)
    @given(seed=SEEDS)
    def test_alpha_is_tight_on_single_states(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        rho = random_state(rng, self.layout).rho
        s = alpha_s([rho], 4)
        assert gamma_s_contains(s, rho)
        assert equal(s, support(rho))
        assert alpha_s([rho, rho / 2], 4).dim == s.dim

    @settings(max_examples=1000, deadline=None)
    @given(seed=SEEDS)
    def test_adjunction(self, seed: int) -> None:
        """alpha(S) <= P exactly when every member of S lies in gamma(P)."""
        rng = np.random.default_rng(seed)
        p = random_subspace(rng, 4, int(rng.integers(1, 4)))
        inside = [random_state_in(rng, p, self.layout).rho for _ in range(2)]
        assert leq(alpha_s(inside, 4), p)
        assert all(gamma_s_contains(p, rho) for rho in inside)

        v = random_vector(rng, 4)
        outside = np.outer(v, v.conj())
        assert not gamma_s_contains(p, outside)
        assert not leq(alpha_s([*inside, outside], 4), p)

    @settings(max_examples=1000, deadline=None)
    @given(seed=SEEDS)
    def test_concretization_is_convex_and_down_closed(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        p = random_subspace(rng, 4, int(rng.integers(1, 4)))
        rho1 = random_state_in(rng, p, self.layout).rho
        rho2 = random_state_in(rng, p, self.layout).rho
        t = float(rng.uniform(0.0, 1.0))
        assert gamma_s_contains(p, t * rho1 + (1 - t) * rho2)

        # below <= sum_i w_i |v_i><v_i| in the Loewner order
        vectors = p.basis @ np.linalg.qr(rng.normal(size=(p.dim, p.dim)) + 1j * rng.normal(size=(p.dim, p.dim)))[0]
        weights = rng.uniform(0.1, 1.0, size=p.dim)
        weights /= weights.sum()
        shrink = rng.uniform(0.0, 1.0, size=p.dim) * (rng.uniform(size=p.dim) < 0.5)
        below = (vectors * (weights * shrink)) @ vectors.conj().T
        assert gamma_s_contains(p, below)
        assert gamma_s_contains(p, 0.5 * rho1)

    @settings(max_examples=1000, deadline=None)
    @given(seed=SEEDS)
    def test_alpha_recovers_subspace_from_spanning_states(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        p = random_subspace(rng, 4, int(rng.integers(0, 5)))
        pure = [np.outer(v, v.conj()) for v in p.vectors()]
        assert equal(alpha_s(pure, 4), p)
        if p.dim:
            assert equal(alpha_s([random_state_in(rng, p, self.layout).rho], 4), p)
