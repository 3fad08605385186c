"""Subcommands of the ``qai`` command line; importing this package registers them."""

from qai.commands import (  # noqa: F401
    analyze,
    compare_domains,
    counterexample,
    hoare,
    incorrect,
    parse,
    replay,
    run,
)
from qai.commands.base import ALIASES, COMMANDS, BaseCommand, lookup_command, register_command

__all__ = ["ALIASES", "COMMANDS", "BaseCommand", "lookup_command", "register_command"]
