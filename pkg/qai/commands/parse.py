"""
Parse and validate a program.

Usage::

    qai parse prog.qw [--json]

Prints the program back in normal form, or its AST as JSON.
"""

from __future__ import annotations

import argparse

from qai.commands.base import EXIT_OK, BaseCommand, register_command
from qai.printer import pretty
from qai.serialization import program_to_json


@register_command
class Command(BaseCommand):
    name = "parse"
    help = "Parse and validate a program; print it in normal form."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="Program file.")

    def handle(self, args: argparse.Namespace) -> int:
        program = self.load_program(args.file)
        self.emit(args, program_to_json(program), lambda: pretty(program))
        return EXIT_OK
