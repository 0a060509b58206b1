"""Shared test fixtures for the bound computations."""

import sys
from pathlib import Path

import pytest

# Ensure project root is in path
PROJECT_ROOT = Path(__file__).parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from scripts.boundscope.corpus import builtin, builtin_functions
from scripts.boundscope.moments import Box
from scripts.boundscope.parser import parse_polynomial


@pytest.fixture
def square():
    """K = [-1, 1]^2."""
    return Box.cube(2)


@pytest.fixture
def unit_interval():
    """K = [0, 1]."""
    return Box(((0.0, 1.0),))


@pytest.fixture
def linear_x():
    """f(x) = x in one variable."""
    return parse_polynomial("x1", 1)


@pytest.fixture
def motzkin():
    return builtin("motzkin")


@pytest.fixture
def booth():
    return builtin("booth")


@pytest.fixture
def matyas():
    return builtin("matyas")


@pytest.fixture
def camel3():
    return builtin("camel3")


@pytest.fixture
def corpus():
    return builtin_functions()


@pytest.fixture
def tmp_results_dir(tmp_path):
    """Create a temporary results directory."""
    results = tmp_path / "results"
    results.mkdir(parents=True)
    return results
