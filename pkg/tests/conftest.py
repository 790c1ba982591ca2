import os
import random
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from graded_core import truncated_polynomial_algebra  # noqa: E402

SAMPLES = os.path.join(ROOT, "samples")


@pytest.fixture
def sphere():
    """H*(S^2) = Q[x]/x^2 with |x| = 2."""
    return truncated_polynomial_algebra(2, 1)


@pytest.fixture
def cubic():
    """Q[x]/x^3 with |x| = 2."""
    return truncated_polynomial_algebra(2, 2)


@pytest.fixture
def rng():
    return random.Random(20240)


@pytest.fixture
def samples_dir():
    return SAMPLES
