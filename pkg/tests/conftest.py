"""
pytest configuration for the qai test suite.

Provides a seeded random generator and restores the default tolerances
around every test.
"""

import numpy as np
import pytest

from qai.conf import Tolerances, _active


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def default_tolerances():
    """Run every test with the default tolerance set."""
    token = _active.set(Tolerances())
    yield
    _active.reset(token)
