"""
Command-line entry point.

Usage::

    qai [--rank-tol F] [--incl-tol F] [--seed K] [--json] [--log-level LEVEL]
        [--output PATH] <command> ...

Exit codes: 0 success or valid, 1 invalid triple / incompleteness witness /
failed replay, 2 usage, parse or input error, 3 numeric or budget failure.
"""

from __future__ import annotations

import argparse
import contextvars
import json
import logging
import sys
from collections.abc import Sequence
from contextlib import ExitStack
from typing import TextIO

from qai.commands import COMMANDS, lookup_command
from qai.commands.base import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE
from qai.conf import configure_logging, get_config, set_tolerances, tolerances_from_config
from qai.exceptions import (
    ConfigurationError,
    DerivationRejected,
    DimensionMismatch,
    EmptySet,
    FixpointBudgetExceeded,
    LoopBudgetExceeded,
    NotHermitian,
    NotPSD,
    ProgramSyntaxError,
    QaiError,
    SerializationError,
    ShapeMismatch,
    TraceNotOne,
    TraceTooLarge,
    UnknownVariable,
    UnsupportedDomain,
    ValidationError,
    ZeroState,
)

logger = logging.getLogger("qai")

USAGE_ERRORS: tuple[type[QaiError], ...] = (
    ProgramSyntaxError,
    ValidationError,
    SerializationError,
    ConfigurationError,
    UnknownVariable,
    ShapeMismatch,
    UnsupportedDomain,
)
NUMERIC_ERRORS: tuple[type[QaiError], ...] = (
    LoopBudgetExceeded,
    NotPSD,
    NotHermitian,
    TraceTooLarge,
    TraceNotOne,
    ZeroState,
    EmptySet,
    FixpointBudgetExceeded,
    DimensionMismatch,
    DerivationRejected,
)


def _add_global_flags(parser: argparse.ArgumentParser, default: object) -> None:
    parser.add_argument("--rank-tol", type=float, default=default, help="Relative rank threshold.")
    parser.add_argument("--incl-tol", type=float, default=default, help="Inclusion residual threshold.")
    parser.add_argument("--seed", type=int, default=default, help="Seed for sampling.")
    parser.add_argument(
        "--json", action="store_true", default=default, help="Machine-readable output."
    )
    parser.add_argument("--log-level", default=default, help="Log level for the qai logger.")
    parser.add_argument("--output", default=default, help="Write output to a file.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qai", description="Abstract interpretation of quantum programs.")
    _add_global_flags(parser, None)
    # Global flags may also follow the subcommand; SUPPRESS keeps the values given before it.
    shared = argparse.ArgumentParser(add_help=False)
    _add_global_flags(shared, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", metavar="<command>")
    sub.required = True
    for name, command_cls in COMMANDS.items():
        command_parser = sub.add_parser(
            name, aliases=list(command_cls.aliases), help=command_cls.help, parents=[shared]
        )
        command_cls({}).add_arguments(command_parser)
    return parser


def _attach_stderr_handler() -> None:
    if not any(getattr(h, "_qai_cli", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
        handler._qai_cli = True  # type: ignore[attr-defined]
        logger.addHandler(handler)


def _exit_code(exc: QaiError) -> int:
    if isinstance(exc, USAGE_ERRORS):
        return EXIT_USAGE
    if isinstance(exc, NUMERIC_ERRORS):
        return EXIT_NUMERIC
    return EXIT_USAGE


def _run(args: argparse.Namespace, stdout: TextIO | None) -> int:
    config = get_config(
        {
            "RANK_TOL": args.rank_tol,
            "INCL_TOL": args.incl_tol,
            "SEED": args.seed,
            "LOG_LEVEL": args.log_level,
        }
    )
    configure_logging(config["LOG_LEVEL"])
    set_tolerances(tolerances_from_config(config))
    with ExitStack() as stack:
        out = stdout or sys.stdout
        if args.output:
            try:
                out = stack.enter_context(open(args.output, "w"))
            except OSError as exc:
                raise SerializationError(f"Cannot write '{args.output}': {exc.strerror}") from exc
        command = lookup_command(args.command)(config, out)
        return command.handle(args)


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    args.json = bool(args.json)

    _attach_stderr_handler()
    try:
        # Tolerances set for this run stay inside a copied context.
        code = contextvars.copy_context().run(_run, args, stdout)
    except QaiError as exc:
        code = _exit_code(exc)
        logger.error("%s: %s", type(exc).__name__, exc)
        if args.json:
            error = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
            print(json.dumps(error), file=stdout or sys.stdout)
        return code
    logger.info("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
