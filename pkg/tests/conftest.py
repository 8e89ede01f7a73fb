import numpy as np
import pytest

from geowalk.polytope import Polytope, make_point


def random_polytope(rng, n, m, slack_lo=0.5, slack_hi=2.0):
    """Random full-rank polytope whose interior contains the origin.

    Rows are Gaussian; b is chosen so the slacks of x = 0 land in
    [slack_lo, slack_hi], which keeps all test points comfortably interior.
    """
    while True:
        A = rng.standard_normal((m, n))
        if np.linalg.matrix_rank(A) == n:
            break
    b = -rng.uniform(slack_lo, slack_hi, size=m)
    return Polytope(A, b)


def random_interior_point(rng, P, scale=0.1, tries=100):
    """A point near the origin that is strictly interior."""
    for _ in range(tries):
        x = scale * rng.standard_normal(P.n)
        if P.contains(x):
            return x
        scale *= 0.7
    return np.zeros(P.n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def box3():
    A = np.vstack([np.eye(3), -np.eye(3)])
    b = np.full(6, -1.0)
    return Polytope(A, b, name="box3")


@pytest.fixture
def interval():
    return Polytope(np.array([[1.0], [-1.0]]), np.array([-1.0, -1.0]),
                    name="interval")


def center_point(P):
    return make_point(P, np.zeros(P.n))
