"""Capacitated transportation benchmark instances.

A producer ships from F factories to D demand centers.  Shipping x[f, d]
units costs the Euclidean factory-center distance per unit, each factory f
can ship at most capacity[f] in total, and demand center d must be covered:
a demand draw xi is safe for a shipping plan when sum_f x[f, d] >= xi_d
fails for no d (equality counts as unsafe, matching the strict-inequality
safe-set convention).

Randomness comes from a counter-based Philox generator keyed by the seed, so
instances are reproducible across platforms and processes.  The draw order
is fixed: factory coordinates, center coordinates, demand location
parameters mu, raw capacities, then the demand samples row by row.
Capacities are rescaled so total capacity is 1.5 times the largest sampled
total demand, which keeps every instance feasible with slack.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DrccpInstance, Polyhedron, SafetyRow, SampleSet


@dataclass(frozen=True)
class TransportInstance:
    factories: np.ndarray  # (F, 2) coordinates
    centers: np.ndarray  # (D, 2) coordinates
    cost: np.ndarray  # (F, D) unit shipping costs
    capacity: np.ndarray  # (F,)
    mu: np.ndarray  # (D,) demand location parameters
    samples: np.ndarray  # (N, D) demand draws
    epsilon: float
    seed: int

    @property
    def n_factories(self) -> int:
        return self.capacity.size

    @property
    def n_centers(self) -> int:
        return self.mu.size


def generate(n_factories: int, n_centers: int, n_samples: int, seed: int,
             epsilon: float = 0.1) -> TransportInstance:
    if n_factories < 1 or n_centers < 1 or n_samples < 1:
        raise ValueError("dimensions must be positive")
    rng = np.random.Generator(np.random.Philox(key=seed))
    factories = rng.uniform(0.0, 10.0, size=(n_factories, 2))
    centers = rng.uniform(0.0, 10.0, size=(n_centers, 2))
    mu = rng.uniform(0.0, 10.0, size=n_centers)
    cap_raw = rng.uniform(0.0, 1.0, size=n_factories)
    samples = rng.uniform(0.8 * mu, 1.2 * mu, size=(n_samples, n_centers))
    cap = cap_raw * (1.5 * samples.sum(axis=1).max() / cap_raw.sum())
    diff = factories[:, None, :] - centers[None, :, :]
    cost = np.sqrt((diff * diff).sum(axis=2))
    return TransportInstance(
        factories=factories,
        centers=centers,
        cost=cost,
        capacity=cap,
        mu=mu,
        samples=samples,
        epsilon=epsilon,
        seed=seed,
    )


def to_drccp(tp: TransportInstance, theta: float, norm: str = "two") -> DrccpInstance:
    """Flatten the shipping plan to x[f * D + d] and emit one safety row per
    demand center: margin_d = sum_f x[f, d] - xi_d."""
    nf, nd = tp.n_factories, tp.n_centers
    dim = nf * nd
    G = np.zeros((nf, dim))
    for f in range(nf):
        G[f, f * nd:(f + 1) * nd] = 1.0
    domain = Polyhedron(
        G=G,
        g=tp.capacity.copy(),
        lb=np.zeros(dim),
        ub=np.full(dim, np.inf),
    )
    rows = []
    for d in range(nd):
        b = np.zeros(nd)
        b[d] = -1.0
        a = np.zeros(dim)
        a[d::nd] = -1.0
        rows.append(SafetyRow(a=a, b=b, d=0.0))
    return DrccpInstance(
        cost=tp.cost.reshape(-1),
        domain=domain,
        rows=tuple(rows),
        samples=SampleSet(tp.samples.copy()),
        epsilon=tp.epsilon,
        theta=theta,
        norm=norm,
    )


def transport_big_m(tp: TransportInstance) -> float:
    """Closed-form margin bound for transport instances.

    Column supply sum_f x[f, d] ranges over [0, total capacity] (all
    capacity can be routed to one center), so the margin lies between
    -max(xi) and total_capacity - min(xi); the bound is the larger absolute
    end.  Agrees with the LP-computed bound on every transport instance.
    """
    total = float(tp.capacity.sum())
    return max(total - float(tp.samples.min()), float(tp.samples.max()))
