"""
Base class and registry for ``qai`` subcommands.

A command declares ``name``, ``help`` and optional ``aliases``, adds its
flags in ``add_arguments`` and does its work in ``handle``, returning the
exit code. Shared helpers load programs and JSON inputs and write either a
text or a JSON rendering of the result.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, TextIO

from qai.concrete import LoopPolicy, loop_policy_from_config
from qai.domains import AbstractElement, DomainKind, alpha_of_subspace
from qai.exceptions import DerivationRejected, SerializationError
from qai.lang import Program
from qai.logic import Derivation, replay
from qai.parser import parse
from qai.serialization import dumps, element_from_json, load_json
from qai.subspace import Subspace, canonical

logger = logging.getLogger("qai")

# Exit codes
EXIT_OK = 0
EXIT_NEGATIVE = 1  # invalid triple, incompleteness witness, failed replay
EXIT_USAGE = 2
EXIT_NUMERIC = 3

# The registry: command name -> command class
COMMANDS: dict[str, type[BaseCommand]] = {}
# alias -> command name
ALIASES: dict[str, str] = {}


def register_command(cls: type[BaseCommand]) -> type[BaseCommand]:
    COMMANDS[cls.name] = cls
    for alias in cls.aliases:
        ALIASES[alias] = cls.name
    return cls


def lookup_command(name: str) -> type[BaseCommand]:
    return COMMANDS[ALIASES.get(name, name)]


class BaseCommand:
    name: str = ""
    help: str = ""
    aliases: tuple[str, ...] = ()

    def __init__(self, config: dict[str, Any], stdout: TextIO | None = None) -> None:
        self.config = config
        self.stdout = stdout or sys.stdout

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        pass

    def handle(self, args: argparse.Namespace) -> int:
        raise NotImplementedError

    # -- inputs --------------------------------------------------------------

    def load_program(self, path: str) -> Program:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise SerializationError(f"Cannot read '{path}': {exc.strerror}") from exc
        return parse(text)

    def load_element(self, path: str, program: Program) -> AbstractElement:
        return element_from_json(load_json(path), program.layout)

    def domain(self, text: str, program: Program) -> DomainKind:
        return DomainKind.parse(text, program.layout)

    def as_kind(self, e: AbstractElement, kind: DomainKind) -> AbstractElement:
        """*e* itself, or a subspace element abstracted into the local *kind*."""
        if e.kind == kind:
            return e
        if not e.kind.is_local and kind.is_local:
            return alpha_of_subspace(kind, e.layout, e.subspace)
        # Let the library report the mismatch.
        return e

    def loop_policy(self, args: argparse.Namespace) -> LoopPolicy:
        config = dict(self.config)
        if getattr(args, "trace_eps", None) is not None:
            config["TRACE_EPS"] = args.trace_eps
        if getattr(args, "max_iters", None) is not None:
            config["MAX_ITERS"] = args.max_iters
        return loop_policy_from_config(config)

    def replayed(self, derivation: Derivation, program: Program) -> Derivation:
        report = replay(derivation, program)
        if not report.ok:
            raise DerivationRejected(
                f"Emitted derivation fails replay at {list(report.path)}: {report.reason}"
            )
        return derivation

    # -- outputs --------------------------------------------------------------

    def write_file(self, path: str, text: str) -> None:
        try:
            Path(path).write_text(text if text.endswith("\n") else text + "\n")
        except OSError as exc:
            raise SerializationError(f"Cannot write '{path}': {exc.strerror}") from exc

    def write(self, text: str) -> None:
        self.stdout.write(text if text.endswith("\n") else text + "\n")

    def emit(self, args: argparse.Namespace, payload: dict[str, Any], render: Callable[[], str]) -> None:
        """Write *payload* as JSON with ``--json``, otherwise the text from *render*."""
        self.write(dumps(payload) if args.json else render())


def describe_subspace(s: Subspace, layout_n: int | None = None) -> str:
    """``span{|00>, |11>}`` style text for a canonical basis; ``0`` for the zero subspace."""
    if s.dim == 0:
        return "0"
    if s.is_full():
        return "full"
    vectors = []
    for v in canonical(s).vectors():
        vectors.append(_describe_vector(v, layout_n or max(1, (s.ambient_dim - 1).bit_length())))
    return "span{" + ", ".join(vectors) + "}"


def _describe_vector(v: Any, n: int) -> str:
    terms = []
    for index, amp in enumerate(v):
        if abs(amp) <= 1e-9:
            continue
        ket = f"|{index:0{n}b}>"
        if abs(amp - 1) <= 1e-9:
            terms.append(ket)
        else:
            z = complex(amp)
            coeff = f"{z.real:.4g}" if abs(z.imag) <= 1e-9 else f"({z.real:.4g}{z.imag:+.4g}i)"
            terms.append(f"{coeff}*{ket}")
    return " + ".join(terms)


def describe_element(e: AbstractElement) -> str:
    if not e.kind.is_local:
        return describe_subspace(e.subspace, e.layout.n)
    assert e.kind.signature is not None
    parts = [
        f"[{','.join(subset)}] {describe_subspace(part, len(subset))}"
        for subset, part in zip(e.kind.signature.subsets, e.parts)
    ]
    return "; ".join(parts)
