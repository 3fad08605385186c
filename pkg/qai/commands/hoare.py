"""
Check a Hoare triple.

Usage::

    qai hoare prog.qw --pre pre.json --post post.json --domain subspace [--witness]
                      [--derivation-out proof.json]

Exit 0 when the triple is valid, 1 when it is invalid or undecided.
"""

from __future__ import annotations

import argparse
from typing import Any

from qai.commands.base import (
    EXIT_NEGATIVE,
    EXIT_OK,
    BaseCommand,
    describe_element,
    register_command,
)
from qai.logic import HoareReport, HoareTriple, check_hoare
from qai.serialization import derivation_to_json, dumps, element_to_json, state_to_json


@register_command
class Command(BaseCommand):
    name = "hoare"
    help = "Check {pre} program {post} and print a derivation or a witness."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="Program file.")
        parser.add_argument("--pre", required=True, help="Precondition JSON.")
        parser.add_argument("--post", required=True, help="Postcondition JSON.")
        parser.add_argument(
            "--domain", default="subspace", help='"subspace" or "local:q1,q2;q2,q3".'
        )
        parser.add_argument(
            "--witness", action="store_true", help="Include the witness state in the output."
        )
        parser.add_argument("--derivation-out", default=None, help="Write the derivation here.")

    def handle(self, args: argparse.Namespace) -> int:
        program = self.load_program(args.file)
        kind = self.domain(args.domain, program)
        pre = self.as_kind(self.load_element(args.pre, program), kind)
        post = self.as_kind(self.load_element(args.post, program), kind)
        report = check_hoare(
            HoareTriple(pre, program, post),
            policy=self.loop_policy(args),
            seed=self.config["SEED"],
        )
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
        if report.witness is not None:
            payload["witness_residual"] = report.witness_residual
            if args.witness:
                payload["witness"] = state_to_json(report.witness)
                payload["witness_output"] = state_to_json(report.witness_output)
        self.emit(args, payload, lambda: self.render(report, args.witness))
        return EXIT_OK if report.valid else EXIT_NEGATIVE

    def render(self, report: HoareReport, with_witness: bool) -> str:
        lines = [
            f"verdict: {report.verdict}",
            f"spc: {describe_element(report.spc)}",
            f"residual: {report.residual:.3e}",
        ]
        if report.derivation is not None:
            lines.append(f"derivation: {report.derivation.size()} node(s), replayed")
        if report.witness is not None:
            lines.append(f"witness residual: {report.witness_residual:.3e}")
            if with_witness:
                lines.append(f"witness:\n{report.witness.rho}")
        return "\n".join(lines)
