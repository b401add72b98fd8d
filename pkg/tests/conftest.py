import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel_close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(1.0, abs(b))


def interior(space, u):
    """Map u in (0, 1) to an interior abscissa of the chart."""
    lo, hi = space.domain
    if math.isinf(hi):
        return 0.05 + 4.0 * u
    return 0.05 + (hi - 0.1) * u
