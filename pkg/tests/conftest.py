import numpy as np
import pytest

from otecon import CostMatrix, DiscreteMeasure


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_transport_instance(rng, m, n, rational=False):
    """Random strictly positive marginals (equal mass 1) and uniform costs.

    With rational=True the weights are small integers over a common
    denominator, which makes degenerate pivots reachable.
    """
    if rational:
        a = rng.integers(1, 10, size=m).astype(float)
        b = rng.integers(1, 10, size=n).astype(float)
        # equalize the totals by scaling each side by the other's total,
        # keeping every weight a ratio of small integers
        common = a.sum() * b.sum()
        mu = DiscreteMeasure(a * b.sum() / common)
        nu = DiscreteMeasure(b * a.sum() / common)
    else:
        a = rng.random(m) + 0.05
        b = rng.random(n) + 0.05
        mu = DiscreteMeasure(a / a.sum())
        nu = DiscreteMeasure(b / b.sum())
    cost = CostMatrix(rng.random((m, n)))
    return mu, nu, cost
