"""
Settings loading and the active tolerance set.

Provides ``get_config()`` which merges user-supplied settings with sensible
defaults. Any key of ``DEFAULTS`` can be overridden through an environment
variable ``QAI_<KEY>`` or through explicit overrides (the CLI passes its
flags this way).

Numerical routines in ``qai.linalg`` and ``qai.subspace`` read the active
``Tolerances`` from a context variable, so analyses running in different
contexts can use different tolerances without interfering.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, fields, replace
from typing import Any

from qai.exceptions import ConfigurationError

logger = logging.getLogger("qai")

ENV_PREFIX = "QAI_"

# Default configuration values
DEFAULTS: dict[str, Any] = {
    "RANK_TOL": 1e-9,  # eigen/singular values below RANK_TOL * largest are zero
    "INCL_TOL": 1e-8,  # max residual accepted by subspace inclusion
    "HERM_TOL": 1e-9,  # max |M - M^dagger| entry for Hermitian inputs
    "TRACE_TOL": 1e-9,  # slack on Tr(rho) <= 1
    "EIG_TOL": 1e-9,  # reconstruction slack of eigendecompositions
    "ZERO_TOL": 1e-14,  # operators with norm at or below this are zero
    "TRACE_EPS": 1e-10,  # loop mass below which a while sum is truncated
    "MAX_ITERS": 10000,  # loop unrolling budget for concrete evaluation
    "SEED": 0,  # seed for sampling in completeness checks and witness search
    "LOG_LEVEL": "WARNING",  # Logging level for the qai logger
}


def _coerce(key: str, raw: str) -> Any:
    default = DEFAULTS[key]
    try:
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"Invalid value for {ENV_PREFIX}{key}: {raw!r}") from exc
    return raw


def get_config(overrides: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """
    Build the effective configuration.

    Keys are resolved in order: ``DEFAULTS``, then ``QAI_<KEY>`` environment
    variables, then *overrides*. ``None`` values in *overrides* are ignored
    so that unset CLI flags fall through. Keys not present in ``DEFAULTS``
    are preserved as given.

    Returns:
        A dict containing the merged configuration.
    """
    env_config = {
        key: _coerce(key, os.environ[ENV_PREFIX + key])
        for key in DEFAULTS
        if ENV_PREFIX + key in os.environ
    }
    user_config = {k: v for k, v in (overrides or {}).items() if v is not None}
    config = {**DEFAULTS, **env_config, **user_config}
    return config


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by the linear-algebra layer."""

    rank_tol: float = DEFAULTS["RANK_TOL"]
    incl_tol: float = DEFAULTS["INCL_TOL"]
    herm_tol: float = DEFAULTS["HERM_TOL"]
    trace_tol: float = DEFAULTS["TRACE_TOL"]
    eig_tol: float = DEFAULTS["EIG_TOL"]
    zero_tol: float = DEFAULTS["ZERO_TOL"]

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ConfigurationError(f"Tolerance {f.name} must be positive, got {value!r}")


def tolerances_from_config(config: Mapping[str, Any]) -> Tolerances:
    """Read the tolerance keys of a merged configuration."""
    return Tolerances(
        rank_tol=float(config["RANK_TOL"]),
        incl_tol=float(config["INCL_TOL"]),
        herm_tol=float(config["HERM_TOL"]),
        trace_tol=float(config["TRACE_TOL"]),
        eig_tol=float(config["EIG_TOL"]),
        zero_tol=float(config["ZERO_TOL"]),
    )


_active: ContextVar[Tolerances] = ContextVar("qai_tolerances", default=Tolerances())


def get_tolerances() -> Tolerances:
    """Return the tolerances active in the current context."""
    return _active.get()


def set_tolerances(tolerances: Tolerances) -> None:
    """Replace the tolerances for the current context."""
    logger.debug("Active tolerances: %s", tolerances)
    _active.set(tolerances)


@contextmanager
def override_tolerances(**changes: float) -> Iterator[Tolerances]:
    """Temporarily replace individual tolerances, e.g. ``override_tolerances(incl_tol=1e-6)``."""
    tolerances = replace(_active.get(), **changes)
    token = _active.set(tolerances)
    try:
        yield tolerances
    finally:
        _active.reset(token)


def configure_logging(level: str | int) -> None:
    """Set the level of the ``qai`` logger."""
    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            raise ConfigurationError(f"Unknown log level: {level!r}")
        level = resolved
    logger.setLevel(level)
