import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wellround.lattice import normalize

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_lattice(rng, n, spread=1.0):
    """normalize of a random integer-ish matrix, kept away from singular."""
    while True:
        b = rng.normal(size=(n, n)) * spread + np.eye(n)
        if abs(np.linalg.det(b)) > 0.2:
            return normalize(b)


@pytest.fixture
def rng():
    return np.random.default_rng(20260)
