"""
Built-in example where the local domain loses precision.

Three qubits ``q1 q2 q3`` start in the GHZ state
``Phi+ = (|000> + |111>)/sqrt(2)`` and a single unitary ``U`` maps
``Phi+`` to ``|000>`` and ``Phi- = (|000> - |111>)/sqrt(2)`` to ``|111>``,
fixing the other basis states. With the signature ``q1,q2;q2,q3`` both
reduced states of ``Phi+`` and of ``Phi-`` have support
``span{|00>, |11>}``, so the local abstraction cannot tell the two inputs
apart and the analysis keeps ``|11>`` in both components, while the real
output abstracts to ``(span{|00>}, span{|00>})``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from qai.analysis import CompletenessReport, analyze, check_completeness
from qai.concrete import State, evaluate
from qai.domains import AbstractElement, DomainKind, Signature, alpha
from qai.lang import Program, Unitary, UnitaryDecl
from qai.linalg import ComplexMatrix, QubitLayout, ket
from qai.subspace import Subspace, leq

logger = logging.getLogger("qai")

LAYOUT = QubitLayout(("q1", "q2", "q3"))
SIGNATURE = Signature((("q1", "q2"), ("q2", "q3")))


def ghz_vector(sign: int = 1) -> ComplexMatrix:
    """``(|000> + sign * |111>)/sqrt(2)`` as a flat vector."""
    return ((ket("000") + sign * ket("111")) / np.sqrt(2)).ravel()


def ghz_unitary() -> ComplexMatrix:
    """``|000><Phi+| + |111><Phi-|`` plus the identity on the other basis states."""
    u = np.zeros((8, 8), dtype=np.complex128)
    u += np.outer(ket("000").ravel(), ghz_vector(1).conj())
    u += np.outer(ket("111").ravel(), ghz_vector(-1).conj())
    for x in range(1, 7):
        u[x, x] = 1.0
    return u


def build_program() -> Program:
    decl = UnitaryDecl.from_matrix("U", ghz_unitary())
    return Program(LAYOUT, (decl,), (), (Unitary(LAYOUT.order, "U"),))


@dataclass
class CounterexampleReport:
    kind: DomainKind
    program: Program
    input_state: State
    alpha_input: AbstractElement  # (span{00,11}, span{00,11})
    alpha_output: AbstractElement  # (span{00}, span{00})
    analyzed: AbstractElement
    completeness: CompletenessReport

    @property
    def eleven_in_analysis(self) -> tuple[bool, ...]:
        """Whether ``|11>`` lies in each component of the analysis result."""
        return tuple(leq(Subspace.from_kets("11"), part) for part in self.analyzed.parts)

    @property
    def incomplete(self) -> bool:
        return not self.completeness.complete


def run(trials: int = 4, seed: int | None = 0) -> CounterexampleReport:
    kind = DomainKind.local(SIGNATURE).bind(LAYOUT)
    program = build_program()
    phi = State.pure(ghz_vector(1), LAYOUT)
    alpha_input = alpha(kind, [phi])
    alpha_output = alpha(kind, [evaluate(program, phi)])
    analyzed = analyze(kind, program, alpha_input)
    completeness = check_completeness(kind, program, alpha_input, trials, seed=seed, witnesses=[phi])
    report = CounterexampleReport(kind, program, phi, alpha_input, alpha_output, analyzed, completeness)
    logger.info(
        "counterexample: |11> in analysis components %s, verdict %s",
        report.eleven_in_analysis,
        completeness.verdict,
    )
    return report
