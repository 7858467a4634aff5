import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "default", max_examples=40, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# Instances are drawn from a seeded stdlib RNG so that hypothesis shrinks over seeds.
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rng_of(seed):
    return random.Random(seed)


@pytest.fixture
def five_point():
    from tcspace import samples

    space = samples.five_point_space()
    return space, samples.five_point_basis(space)
