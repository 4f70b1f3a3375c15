import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from treecap import random_antichain, random_measure, random_tree

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

P_VALUES = (1.5, 2.0, 3.0)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
exponents = st.sampled_from(P_VALUES) | st.floats(min_value=1.1, max_value=5.0)


@st.composite
def trees(draw, max_depth=4, max_branching=3):
    rng = np.random.default_rng(draw(seeds))
    return random_tree(rng, max_depth, max_branching, (0.5, 2.0))


@st.composite
def tree_and_set(draw, max_depth=4, max_branching=3):
    rng = np.random.default_rng(draw(seeds))
    tree = random_tree(rng, max_depth, max_branching, (0.5, 2.0))
    return tree, random_antichain(rng, tree)


@st.composite
def tree_and_measure(draw, max_depth=4, max_branching=3):
    rng = np.random.default_rng(draw(seeds))
    tree = random_tree(rng, max_depth, max_branching, (0.5, 2.0))
    E = random_antichain(rng, tree)
    return tree, random_measure(rng, tree, E.nodes)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
