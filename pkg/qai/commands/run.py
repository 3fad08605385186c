"""
Run a program on a state.

Usage::

    qai run prog.qw --state state.json [--trace-eps F] [--max-iters N]

A loop still carrying mass after ``--max-iters`` iterations is a numeric
failure (exit 3).
"""

from __future__ import annotations

import argparse

import numpy as np

from qai.commands.base import EXIT_OK, BaseCommand, describe_subspace, register_command
from qai.concrete import evaluate
from qai.serialization import load_json, state_from_json, state_to_json
from qai.subspace import support


@register_command
class Command(BaseCommand):
    name = "run"
    help = "Evaluate a program on a state given as JSON."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="Program file.")
        parser.add_argument("--state", required=True, help="Input state JSON.")
        parser.add_argument("--trace-eps", type=float, default=None, help="Loop truncation threshold.")
        parser.add_argument("--max-iters", type=int, default=None, help="Loop unrolling budget.")

    def handle(self, args: argparse.Namespace) -> int:
        program = self.load_program(args.file)
        state = state_from_json(load_json(args.state), program.layout)
        out = evaluate(program, state, self.loop_policy(args))

        def render() -> str:
            matrix = np.array2string(out.rho, precision=6, suppress_small=True, max_line_width=120)
            return (
                f"trace: {out.trace:.12g}\n"
                f"support: {describe_subspace(support(out.rho), program.layout.n)}\n"
                f"rho =\n{matrix}"
            )

        self.emit(args, {"trace": out.trace, "state": state_to_json(out)}, render)
        return EXIT_OK
