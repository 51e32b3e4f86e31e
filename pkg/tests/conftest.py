import numpy as np
import pytest

from npcontrast import DiscreteDistribution, ValueDomain


@pytest.fixture
def domain012():
    return ValueDomain(np.array([0.0, 1.0, 2.0]), 0.0, 255.0)


@pytest.fixture
def dist_pair(domain012):
    """The worked two-class instance: A=(0,0,1), B=(1,2,2) with NPC 2/3."""
    pa = DiscreteDistribution.from_counts(domain012, [2, 1, 0])
    pb = DiscreteDistribution.from_counts(domain012, [0, 1, 2])
    return pa, pb


def random_domain(rng, min_levels=2, max_levels=64, span=5000):
    size = int(rng.integers(min_levels, max_levels + 1))
    values = np.sort(rng.choice(np.arange(-span, span), size=size, replace=False)).astype(np.float64)
    return ValueDomain(values, float(values[0]), float(values[-1]))


def random_dist(rng, domain, max_count=60):
    size = domain.size
    support_size = int(rng.integers(1, size + 1))
    idx = rng.choice(size, size=support_size, replace=False)
    counts = np.zeros(size, dtype=np.int64)
    counts[idx] = rng.integers(1, max_count, size=support_size)
    return DiscreteDistribution.from_counts(domain, counts)


def random_dists(rng, domain, n, max_count=60):
    return [random_dist(rng, domain, max_count) for _ in range(n)]
