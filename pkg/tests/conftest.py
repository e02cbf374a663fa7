# tests/conftest.py
"""
Shared fixtures for the hierstab test suite
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.analysis.product_space import CorrelatedPair, FiniteDistribution, ProductSpace


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo checks")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def cube3():
    return ProductSpace.uniform_cube(3)


@pytest.fixture
def mixed_space():
    """Three coordinates with supports of size 2, 3 and 2 and uneven laws"""
    dists = [
        FiniteDistribution(support=[0.0, 1.0], probs=[0.3, 0.7]),
        FiniteDistribution(support=[-1.0, 0.5, 2.0], probs=[0.2, 0.5, 0.3]),
        FiniteDistribution(support=[-2.0, 3.0], probs=[0.6, 0.4]),
    ]
    return ProductSpace.from_marginals(dists, 0.6)


def random_symmetric_pair(rng: np.random.Generator, size: int) -> CorrelatedPair:
    """Random exchangeable coupling: symmetric joint with equal marginals"""
    m = rng.random((size, size)) + 0.05
    joint = (m + m.T) / 2.0
    joint /= joint.sum()
    support = np.sort(rng.choice(np.arange(-5, 6), size=size, replace=False)).astype(float)
    return CorrelatedPair.from_joint(joint, support.tolist())


def random_symmetric_space(rng: np.random.Generator, n: int, max_support: int = 3) -> ProductSpace:
    sizes = rng.integers(2, max_support + 1, size=n)
    return ProductSpace(pairs=[random_symmetric_pair(rng, int(k)) for k in sizes])


@pytest.fixture
def symmetric_space_factory():
    return random_symmetric_space
