"""
Re-check a derivation against a program.

Usage::

    qai replay proof.json prog.qw

Accepts a derivation document as written by ``--derivation-out`` or the
JSON output of ``qai hoare --json`` / ``qai incorrect --json``.
"""

from __future__ import annotations

import argparse

from qai.commands.base import EXIT_NEGATIVE, EXIT_OK, BaseCommand, register_command
from qai.exceptions import SerializationError
from qai.logic import replay
from qai.serialization import derivation_from_json, load_json


@register_command
class Command(BaseCommand):
    name = "replay"
    help = "Check every node of a derivation against its proof rule."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("derivation", help="Derivation JSON.")
        parser.add_argument("file", help="Program file the derivation refers to.")

    def handle(self, args: argparse.Namespace) -> int:
        program = self.load_program(args.file)
        data = load_json(args.derivation)
        if isinstance(data, dict) and "rule" not in data and "derivation" in data:
            data = data["derivation"]
        if data is None:
            raise SerializationError("The document holds no derivation")
        report = replay(derivation_from_json(data, program), program)
        payload = {"ok": report.ok, "path": list(report.path), "reason": report.reason}
        self.emit(
            args,
            payload,
            lambda: "ok" if report.ok else f"failed at {list(report.path)}: {report.reason}",
        )
        return EXIT_OK if report.ok else EXIT_NEGATIVE
