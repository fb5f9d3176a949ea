import numpy as np
import pytest

from pacbayes import DataDistribution, LossTable, ProbMeasure


def random_instance(rng, n_h=5, n_z=4, binary=True):
    """Random (dist, table) pair with strictly positive probabilities."""
    probs = rng.dirichlet(np.ones(n_z))
    if binary:
        loss = rng.integers(0, 2, size=(n_h, n_z)).astype(float)
    else:
        loss = rng.choice([0.0, 0.25, 0.5, 0.75, 1.0], size=(n_h, n_z))
    return DataDistribution(probs), LossTable(loss)


def random_measure(rng, n):
    return ProbMeasure(rng.dirichlet(np.ones(n)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
