"""
Tests for the qai.counterexample module.

Validates the GHZ program on which the local domain over ``q1,q2;q2,q3``
loses precision: the inputs ``Phi+`` and ``Phi-`` share one local
abstraction, so the analysis cannot drop ``|11>`` from either component.
"""

import numpy as np
import pytest

from qai import counterexample
from qai.analysis import analyze
from qai.concrete import State, evaluate
from qai.domains import DomainKind, alpha, dom_equal
from qai.linalg import ket
from qai.subspace import Subspace, equal


@pytest.fixture(scope="module")
def report() -> counterexample.CounterexampleReport:
    return counterexample.run(trials=4, seed=0)


class TestProgram:
    def test_unitary(self) -> None:
        u = counterexample.ghz_unitary()
        assert np.allclose(u @ u.conj().T, np.eye(8))
        assert np.allclose(u @ counterexample.ghz_vector(1), ket("000").ravel())
        assert np.allclose(u @ counterexample.ghz_vector(-1), ket("111").ravel())
        assert np.allclose(u @ ket("010").ravel(), ket("010").ravel())

    def test_evaluation(self) -> None:
        program = counterexample.build_program()
        phi = State.pure(counterexample.ghz_vector(1), counterexample.LAYOUT)
        out = evaluate(program, phi)
        assert np.allclose(out.rho, ket("000") @ ket("000").T)


class TestReport:
    """The local analysis keeps ``|11>`` where the semantics does not."""

    def test_alpha_input(self, report: counterexample.CounterexampleReport) -> None:
        for part in report.alpha_input.parts:
            assert equal(part, Subspace.from_kets("00", "11"))

    def test_alpha_output(self, report: counterexample.CounterexampleReport) -> None:
        for part in report.alpha_output.parts:
            assert equal(part, Subspace.from_kets("00"))

    def test_analysis_keeps_eleven(self, report: counterexample.CounterexampleReport) -> None:
        assert report.eleven_in_analysis == (True, True)

    def test_incomplete(self, report: counterexample.CounterexampleReport) -> None:
        assert report.incomplete
        assert report.completeness.verdict == "IncompleteWitness"
        assert report.completeness.witness is report.input_state
        assert report.completeness.witness_deviation > 0.1

    def test_inputs_share_abstraction(self, report: counterexample.CounterexampleReport) -> None:
        phi_minus = State.pure(counterexample.ghz_vector(-1), counterexample.LAYOUT)
        assert dom_equal(alpha(report.kind, [phi_minus]), report.alpha_input)
        out = evaluate(report.program, phi_minus)
        assert np.allclose(out.rho, ket("111") @ ket("111").T)

    def test_subspace_domain_is_exact(self, report: counterexample.CounterexampleReport) -> None:
        kind = DomainKind.subspace()
        pre = alpha(kind, [report.input_state])
        post = analyze(kind, report.program, pre)
        assert equal(post.subspace, Subspace.from_kets("000"))
