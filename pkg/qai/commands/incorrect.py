"""
Check an incorrectness triple on the subspace domain.

Usage::

    qai incorrect prog.qw --pre pre.json --post post.json [--derivation-out proof.json]

Exit 0 when the triple is valid, 1 when it is not.
"""

from __future__ import annotations

import argparse
from typing import Any

from qai.commands.base import (
    EXIT_NEGATIVE,
    EXIT_OK,
    BaseCommand,
    describe_element,
    describe_subspace,
    register_command,
)
from qai.domains import DomainKind
from qai.logic import IncorrectnessReport, IncorrectnessTriple, check_incorrectness
from qai.serialization import derivation_to_json, dumps, element_to_json, subspace_to_json


@register_command
class Command(BaseCommand):
    name = "incorrect"
    help = "Check [pre] program [post] and print a derivation or the uncovered part of post."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="Program file.")
        parser.add_argument("--pre", required=True, help="Precondition JSON.")
        parser.add_argument("--post", required=True, help="Postcondition JSON.")
        parser.add_argument("--derivation-out", default=None, help="Write the derivation here.")

    def handle(self, args: argparse.Namespace) -> int:
        program = self.load_program(args.file)
        kind = DomainKind.subspace()
        pre = self.as_kind(self.load_element(args.pre, program), kind)
        post = self.as_kind(self.load_element(args.post, program), kind)
        report = check_incorrectness(IncorrectnessTriple(pre, program, post))
        derivation = None
        if report.derivation is not None:
            derivation = derivation_to_json(self.replayed(report.derivation, program))
            if args.derivation_out:
                self.write_file(args.derivation_out, dumps(derivation))

        payload: dict[str, Any] = {
            "verdict": report.verdict,
            "residual": report.residual,
            "spc": element_to_json(report.spc),
            "derivation": derivation,
        }
        if report.gap is not None and report.outside is not None:
            payload["outside"] = subspace_to_json(report.outside)
            payload["gap"] = subspace_to_json(report.gap)
        self.emit(args, payload, lambda: self.render(report))
        return EXIT_OK if report.valid else EXIT_NEGATIVE

    def render(self, report: IncorrectnessReport) -> str:
        lines = [
            f"verdict: {report.verdict}",
            f"spc: {describe_element(report.spc)}",
            f"residual: {report.residual:.3e}",
        ]
        if report.derivation is not None:
            lines.append(f"derivation: {report.derivation.size()} node(s), replayed")
        if report.outside is not None and report.gap is not None:
            n = report.spc.layout.n
            lines.append(f"outside spc: {describe_subspace(report.outside, n)}")
            lines.append(f"post meet spc^perp: {describe_subspace(report.gap, n)}")
        return "\n".join(lines)
