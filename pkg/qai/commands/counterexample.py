"""
Reproduce the built-in local-domain counterexample.

Usage::

    qai paper-5-3 [--trials N] [--json]

``counterexample`` is accepted as an alias.

Exit 1: the completeness check finds the GHZ input as a witness.
"""

from __future__ import annotations

import argparse

from qai import counterexample
from qai.commands.base import (
    EXIT_NEGATIVE,
    EXIT_OK,
    BaseCommand,
    describe_element,
    register_command,
)
from qai.printer import pretty
from qai.serialization import element_to_json


@register_command
class Command(BaseCommand):
    name = "paper-5-3"
    aliases = ("counterexample",)
    help = "Run the GHZ program on which the local domain is incomplete."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--trials", type=int, default=4, help="Random states checked.")

    def handle(self, args: argparse.Namespace) -> int:
        report = counterexample.run(args.trials, seed=self.config["SEED"])
        completeness = report.completeness
        payload = {
            "domain": str(report.kind),
            "alpha_input": element_to_json(report.alpha_input),
            "alpha_output": element_to_json(report.alpha_output),
            "analysis": element_to_json(report.analyzed),
            "eleven_in_analysis": list(report.eleven_in_analysis),
            "verdict": completeness.verdict,
            "deviation": completeness.deviation,
        }

        def render() -> str:
            return "\n".join(
                [
                    pretty(report.program).rstrip(),
                    f"domain: {report.kind}",
                    f"alpha(input):        {describe_element(report.alpha_input)}",
                    f"alpha(eval(input)):  {describe_element(report.alpha_output)}",
                    f"analysis(alpha(input)): {describe_element(report.analyzed)}",
                    f"|11> in analysis components: {report.eleven_in_analysis}",
                    f"verdict: {completeness.verdict} (deviation {completeness.deviation:.3e})",
                ]
            )

        self.emit(args, payload, render)
        return EXIT_NEGATIVE if report.incomplete else EXIT_OK
