import numpy as np
import pytest

from spectriple import build_toy


@pytest.fixture(scope="session")
def toy():
    """The shipped model at unit couplings (immutable, safe to share)."""
    return build_toy()


@pytest.fixture
def rng():
    return np.random.default_rng(0)
