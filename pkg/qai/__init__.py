"""
qai: abstract interpretation and program logics for quantum while-programs.

Programs over named qubits are parsed from text, run on partial density
operators, and analyzed over the subspace domain or a local domain of
per-subsystem subspaces. The analysis backs checkers for Hoare and
incorrectness triples that emit replayable derivations.

Public API
----------
- ``parse()`` -- Read and validate program text.
- ``evaluate()`` -- Run a program on a ``State``.
- ``analyze()`` -- Abstract post-state of a program.
- ``check_hoare()`` / ``check_incorrectness()`` -- Decide triples.
- ``replay()`` -- Re-check a derivation.
"""

from qai.analysis import analyze, check_completeness
from qai.concrete import LoopPolicy, State, evaluate
from qai.domains import AbstractElement, DomainKind, Signature, alpha
from qai.lang import Program
from qai.logic import (
    HoareTriple,
    IncorrectnessTriple,
    check_hoare,
    check_incorrectness,
    replay,
)
from qai.parser import parse
from qai.subspace import Subspace

__all__ = [
    "AbstractElement",
    "DomainKind",
    "HoareTriple",
    "IncorrectnessTriple",
    "LoopPolicy",
    "Program",
    "Signature",
    "State",
    "Subspace",
    "alpha",
    "analyze",
    "check_completeness",
    "check_hoare",
    "check_incorrectness",
    "evaluate",
    "parse",
    "replay",
]
