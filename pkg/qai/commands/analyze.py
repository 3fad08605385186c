"""
Abstract post-state of a program.

Usage::

    qai analyze prog.qw --pre ae.json --domain subspace
    qai analyze prog.qw --pre ae.json --domain "local:q1,q2;q2,q3" --json

A subspace-domain ``--pre`` is abstracted into a local domain when one is
requested.
"""

from __future__ import annotations

import argparse

from qai.analysis import analyze
from qai.commands.base import EXIT_OK, BaseCommand, describe_element, register_command
from qai.serialization import element_to_json


@register_command
class Command(BaseCommand):
    name = "analyze"
    help = "Run the forward analyzer from a precondition."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="Program file.")
        parser.add_argument("--pre", required=True, help="Abstract element JSON.")
        parser.add_argument(
            "--domain", default="subspace", help='"subspace" or "local:q1,q2;q2,q3".'
        )

    def handle(self, args: argparse.Namespace) -> int:
        program = self.load_program(args.file)
        kind = self.domain(args.domain, program)
        pre = self.as_kind(self.load_element(args.pre, program), kind)
        post = analyze(kind, program, pre)
        self.emit(args, element_to_json(post), lambda: describe_element(post))
        return EXIT_OK
