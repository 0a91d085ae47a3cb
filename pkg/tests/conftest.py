import numpy as np
import pytest

from tlbounds.domains import DiscreteDomain
from tlbounds.hypothesis import GroundSet, Hypothesis, HypothesisClass, make_threshold_class

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def random_ground(rng, n):
    return GroundSet(np.sort(rng.choice(np.arange(1000), size=n, replace=False)) / 1000.0)


def random_domain(rng, ground, binary_labels=True):
    p = rng.dirichlet(np.full(ground.size, 0.7))
    p = p / p.sum()
    labels = rng.integers(0, 2, ground.size).astype(float) if binary_labels else rng.uniform(0, 1, ground.size)
    return DiscreteDomain(ground, p, Hypothesis(ground, labels))


def random_class(rng, ground, max_members=64, binary=True):
    if binary and rng.random() < 0.4:
        return make_threshold_class(ground)
    k = int(rng.integers(1, max_members + 1))
    if binary:
        vecs = rng.integers(0, 2, size=(k, ground.size)).astype(float)
    else:
        vecs = rng.uniform(0, 1, size=(k, ground.size))
    return HypothesisClass(ground, vecs, vc_dim=int(rng.integers(1, 5)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ground2():
    return GroundSet([0.1, 0.9])
