import pytest

from psidyn_capture import load_model

TEST_HIDDEN = 128  # full block/head structure, shrunk width for speed


@pytest.fixture(scope="session")
def tiny_model():
    """Pinned architecture at reduced width, seeded random weights."""
    return load_model(hidden_size=TEST_HIDDEN, weights_seed=0)
