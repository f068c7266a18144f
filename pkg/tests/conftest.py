import numpy as np
import pytest

from lqcharge.battery import RcParams, SocBounds, discretize


@pytest.fixture(scope="session")
def params():
    return RcParams()


@pytest.fixture(scope="session")
def bounds(params):
    return SocBounds.from_capacity(params)


@pytest.fixture(scope="session")
def sys1s(params):
    """The plant discretized at 1 s."""
    return discretize(params, 1.0)


def random_stabilizable_system(rng, n=2, m=1):
    """Random (A, B, Q, R) with A scaled stable-ish and Q, R positive definite."""
    a = rng.normal(size=(n, n))
    a *= 0.95 / max(np.abs(np.linalg.eigvals(a)).max(), 1e-6)
    b = rng.normal(size=(n, m))
    q_root = rng.normal(size=(n, n))
    q = q_root @ q_root.T + 0.1 * np.eye(n)
    r = np.atleast_2d(rng.uniform(0.5, 2.0, size=(m, m)))
    r = r @ r.T + 0.1 * np.eye(m)
    return a, b, q, r
