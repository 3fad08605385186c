"""
Compare the subspace and a local domain against concrete runs.

Usage::

    qai compare-domains prog.qw --pre ae.json --local "q1,q2;q2,q3" --trials 8 --seed 0

Exit 1 when either domain shows an incompleteness witness.
"""

from __future__ import annotations

import argparse
from typing import Any

from qai.analysis import CompletenessReport, check_completeness
from qai.commands.base import (
    EXIT_NEGATIVE,
    EXIT_OK,
    BaseCommand,
    describe_element,
    register_command,
)
from qai.domains import AbstractElement, DomainKind, gamma_as_subspace
from qai.serialization import element_to_json, state_to_json


def _report_json(report: CompletenessReport) -> dict[str, Any]:
    return {
        "domain": str(report.kind),
        "verdict": report.verdict,
        "deviation": report.deviation,
        "candidates": report.candidates,
        "abstract": element_to_json(report.abstract),
        "concrete": element_to_json(report.concrete),
        "witness": state_to_json(report.witness) if report.witness is not None else None,
        "witness_deviation": report.witness_deviation,
    }


def _report_text(report: CompletenessReport) -> str:
    return "\n".join(
        [
            f"[{report.kind}] {report.verdict} (deviation {report.deviation:.3e}, "
            f"{report.candidates} candidate(s))",
            f"  analysis: {describe_element(report.abstract)}",
            f"  concrete: {describe_element(report.concrete)}",
        ]
    )


@register_command
class Command(BaseCommand):
    name = "compare-domains"
    help = "Check both domains for completeness on sampled states of the precondition."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="Program file.")
        parser.add_argument("--pre", required=True, help="Precondition JSON (either domain).")
        parser.add_argument("--local", required=True, help='Signature such as "q1,q2;q2,q3".')
        parser.add_argument("--trials", type=int, default=8, help="Random states per domain.")

    def handle(self, args: argparse.Namespace) -> int:
        program = self.load_program(args.file)
        local = DomainKind.parse(f"local:{args.local}", program.layout)
        pre = self.load_element(args.pre, program)
        global_pre = AbstractElement.global_(program.layout, gamma_as_subspace(pre))
        local_pre = self.as_kind(pre if pre.kind.is_local else global_pre, local)
        policy = self.loop_policy(args)
        seed = self.config["SEED"]
        reports = [
            check_completeness(DomainKind.subspace(), program, global_pre, args.trials, seed=seed, policy=policy),
            check_completeness(local, program, local_pre, args.trials, seed=seed, policy=policy),
        ]
        self.emit(
            args,
            {"reports": [_report_json(r) for r in reports]},
            lambda: "\n".join(_report_text(r) for r in reports),
        )
        return EXIT_OK if all(r.complete for r in reports) else EXIT_NEGATIVE
