import numpy as np
import pytest


@pytest.fixture
def rng():
    """Seeded numpy generator for test-local randomness."""
    return np.random.default_rng(20250809)
