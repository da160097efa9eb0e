import numpy as np
import pytest

from thinfilm import continuation
from thinfilm.model import K0, HamiltonianParams


@pytest.fixture(scope="session")
def branch():
    """g = 1, k0 = 1 branch traced until min h < 0.05."""
    return continuation.trace_branch(1.0, 1.0, rupture_threshold=0.05)


@pytest.fixture(scope="session")
def deep_branch():
    """The same branch continued to the default rupture threshold 1e-2."""
    return continuation.trace_branch(1.0, 1.0)


@pytest.fixture
def hp8():
    return HamiltonianParams(1.0, 8.0, K0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
