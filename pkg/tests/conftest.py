"""Shared fixtures and small dataset builders for the test suite."""

import numpy as np
import pytest

from margint import Sample


def random_sample(rng, n, d, lo=0.0, hi=1.0):
    """Uniform covariates on [lo, hi]^d with bounded random responses."""
    x = rng.uniform(lo, hi, size=(n, d))
    y = rng.uniform(-1.0, 1.0, size=n)
    return Sample(x=x, y=y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def tiny_sample():
    x = np.array([[0.30, 0.40], [0.50, 0.60], [0.45, 0.35],
                  [0.70, 0.55], [0.60, 0.70]])
    y = np.array([1.0, -0.5, 0.25, 2.0, -1.0])
    return Sample(x=x, y=y)
