import numpy as np
import pytest

from rdpgtest import sample_assignments, sbm_latent_positions

TWO_BLOCK_B = np.array([[0.5, 0.2], [0.2, 0.5]])
TWO_BLOCK_PI = (0.4, 0.6)


def two_block_latents(n, seed=0, epsilon=0.0, assignments=None):
    """Latent positions of the canonical two-block model used throughout."""
    if assignments is None:
        assignments = sample_assignments(TWO_BLOCK_PI, n, seed)
    b = TWO_BLOCK_B + epsilon * np.eye(2)
    return sbm_latent_positions(b, assignments)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
