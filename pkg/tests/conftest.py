"""Shared instance builders for the test suite.

Everything here is deterministic: fixed seeds, fixed literals.  Expected
values frozen in the tests were produced by the independent oracles in
drccp.oracles (breakpoint scans, support enumeration) or by hand algebra on
tiny cases, never by the code under test.
"""
import numpy as np
import pytest

from drccp.model import DrccpInstance, Polyhedron, SafetyRow, SampleSet
from drccp import transport


def line_instance(values, epsilon, theta, lo=0.0, hi=10.0):
    """One decision x in [lo, hi], cost +1, single safety row x > xi.

    The sample margins are x - xi, so with x fixed the distance profile is
    max(0, x - xi) and everything is checkable by hand.
    """
    values = np.asarray(values, dtype=float).reshape(-1, 1)
    return DrccpInstance(
        cost=[1.0],
        domain=Polyhedron(G=np.zeros((0, 1)), g=[], lb=[lo], ub=[hi]),
        rows=(SafetyRow(a=[-1.0], b=[-1.0], d=0.0),),
        samples=SampleSet(values),
        epsilon=epsilon,
        theta=theta,
    )


def box_instance(seed, n=8, dim=2, rows=2, epsilon=0.25, theta=0.05):
    """Random small instance on a box domain with `rows` safety rows.

    Samples are drawn positive and the rows are xi_j > offset - x_j style,
    so the problem is feasible for large x and the chance constraint binds
    as x shrinks (cost minimizes the sum of coordinates).
    """
    rng = np.random.default_rng(seed)
    samples = rng.uniform(0.5, 2.0, size=(n, dim))
    safety = []
    for p in range(rows):
        b = np.zeros(dim)
        b[p % dim] = 1.0
        a = -rng.uniform(0.5, 1.5, size=dim)
        safety.append(SafetyRow(a=a, b=b, d=-rng.uniform(0.5, 1.0)))
    return DrccpInstance(
        cost=np.ones(dim),
        domain=Polyhedron(G=np.zeros((0, dim)), g=[], lb=np.zeros(dim), ub=np.full(dim, 5.0)),
        rows=tuple(safety),
        samples=SampleSet(samples),
        epsilon=epsilon,
        theta=theta,
    )


def small_transport(seed=7, factories=2, centers=3, n=10, epsilon=0.2, theta=0.05):
    tp = transport.generate(factories, centers, n, seed=seed, epsilon=epsilon)
    return tp, transport.to_drccp(tp, theta=theta)


@pytest.fixture
def tiny_line():
    return line_instance([0.1, 0.2, 0.3, 0.4, 0.5], epsilon=0.2, theta=0.01)
