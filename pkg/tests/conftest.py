import numpy as np
import pytest

from permimp import (
    ForestParams,
    LinkModel,
    SeedSpec,
    TreeParams,
    beta_default,
    fit_forest,
    generate_dataset,
)


@pytest.fixture(scope="session")
def linear_model():
    return LinkModel("linear", beta_default(10))


@pytest.fixture(scope="session")
def small_data(linear_model):
    """Linear dataset small enough for exhaustive checks."""
    return generate_dataset(linear_model, 80, 3.0, SeedSpec(1201).child("data"))


@pytest.fixture(scope="session")
def small_forest(small_data):
    return fit_forest(small_data, ForestParams(m_trees=30), SeedSpec(1201).child("forest"))


@pytest.fixture(scope="session")
def leaf_forest(small_data):
    """Forest whose every tree is a single leaf (constant predictor)."""
    params = ForestParams(m_trees=12, tree=TreeParams(max_leaves=1))
    return fit_forest(small_data, params, SeedSpec(1202).child("forest"))


def assert_same_array(a, b):
    np.testing.assert_array_equal(np.asarray(a), np.asarray(b))
