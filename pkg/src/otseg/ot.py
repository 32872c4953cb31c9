"""Exact balanced transportation problems and squared 2-Wasserstein distances.

Distances between histograms use the quadratic cost ``||c_i - c_j||^2`` over
shared bin centers.  The solver is a dense transportation simplex (network
simplex on the complete bipartite graph) running on doubles with Bland-style
pivoting; correctness is pinned by enumeration oracles in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import TransportError

BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class TransportProblem:
    """Balanced supply/demand with a nonnegative cost matrix."""

    supply: np.ndarray
    demand: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        supply = np.asarray(self.supply, dtype=np.float64)
        demand = np.asarray(self.demand, dtype=np.float64)
        cost = np.ascontiguousarray(self.cost, dtype=np.float64)
        if supply.ndim != 1 or demand.ndim != 1:
            raise TransportError("supply and demand must be vectors")
        if cost.shape != (supply.size, demand.size):
            raise TransportError(
                f"cost shape {cost.shape} does not match ({supply.size}, {demand.size})"
            )
        if not (np.isfinite(supply).all() and np.isfinite(demand).all()):
            raise TransportError("non-finite supply or demand")
        if supply.min(initial=0.0) < 0.0 or demand.min(initial=0.0) < 0.0:
            raise TransportError("negative supply or demand")
        if not np.isfinite(cost).all():
            raise TransportError("non-finite cost entry")
        if cost.size and cost.min() < 0.0:
            raise TransportError("negative cost entry")
        total = max(supply.sum(), 1.0)
        if abs(supply.sum() - demand.sum()) > BALANCE_TOL * total:
            raise TransportError(
                f"unbalanced problem: supply {supply.sum()!r} vs demand {demand.sum()!r}"
            )
        object.__setattr__(self, "supply", supply)
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "cost", cost)


@dataclass(frozen=True)
class TransportPlan:
    """Sparse optimal plan: (i, j, mass) entries with positive mass."""

    entries: tuple
    objective: float

    def as_matrix(self, shape) -> np.ndarray:
        out = np.zeros(shape)
        for i, j, p in self.entries:
            out[i, j] += p
        return out


@dataclass(frozen=True)
class Histogram:
    """Nonnegative weights summing to one, plus the region pixel count."""

    weights: np.ndarray
    count: int = 1

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 1:
            raise ValueError("weights must be a vector")
        if weights.min(initial=0.0) < 0.0:
            raise ValueError("negative histogram weight")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {weights.sum()!r}, expected 1")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        object.__setattr__(self, "weights", weights)


def solve_transportation(problem: TransportProblem) -> TransportPlan:
    """Solve the balanced Kantorovich LP exactly (up to double rounding).

    Zero supplies/demands are dropped before the simplex runs and restored in
    the returned plan's indexing; demands are rescaled so the reduced problem
    balances exactly.
    """
    supply, demand, cost = problem.supply, problem.demand, problem.cost
    ridx = np.flatnonzero(supply > 0.0)
    cidx = np.flatnonzero(demand > 0.0)
    if ridx.size == 0 or cidx.size == 0:
        return TransportPlan(entries=(), objective=0.0)
    v = supply[ridx]
    w = demand[cidx]
    w = w * (v.sum() / w.sum())
    sub = np.ascontiguousarray(cost[np.ix_(ridx, cidx)])
    status, objective, br, bc, flows, _, _ = _kernels.solve_transport(sub, v, w)
    if status != 0:
        raise TransportError("transportation simplex did not converge")
    entries = tuple(
        (int(ridx[br[t]]), int(cidx[bc[t]]), float(flows[t]))
        for t in range(len(flows))
        if flows[t] > 0.0
    )
    return TransportPlan(entries=entries, objective=float(objective))


def pairwise_sq_dists(centers: np.ndarray) -> np.ndarray:
    """Quadratic cost matrix ||c_i - c_j||^2 for shared bin centers."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim == 1:
        centers = centers[:, None]
    diff = centers[:, None, :] - centers[None, :, :]
    return (diff * diff).sum(axis=2)


def wasserstein2_sq_weights(wu: np.ndarray, wv: np.ndarray, cost: np.ndarray) -> float:
    """Squared 2-Wasserstein distance between weight vectors over a shared,
    symmetric cost matrix.

    Weights are renormalized (divided by their sum) so the balance condition
    holds exactly.  The argument order is canonicalized before solving, which
    makes the result exactly symmetric; equal weight vectors short-circuit
    to 0.
    """
    wu = np.asarray(wu, dtype=np.float64)
    wv = np.asarray(wv, dtype=np.float64)
    if wu.shape != wv.shape:
        raise TransportError("histograms must share bin centers")
    if wu.size != cost.shape[0] or wu.size != cost.shape[1]:
        raise TransportError("cost matrix does not match histogram length")
    neq = wu != wv
    if not neq.any():
        return 0.0
    # canonical order: lexicographically smaller weight vector as supply
    first = int(np.argmax(neq))
    if wu[first] > wv[first]:
        wu, wv = wv, wu
    si = np.flatnonzero(wu > 0.0)
    sj = np.flatnonzero(wv > 0.0)
    v = wu[si]
    w = wv[sj]
    v = v / v.sum()
    w = w / w.sum()
    w = w * (v.sum() / w.sum())
    sub = np.ascontiguousarray(cost[si[:, None], sj])
    status, objective, _, _, _, _, _ = _kernels.solve_transport(sub, v, w)
    if status != 0:
        raise TransportError("transportation simplex did not converge")
    return float(objective)


def wasserstein2_sq(u: Histogram, v: Histogram, centers) -> float:
    """Squared 2-Wasserstein distance between histograms over shared centers."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim == 1:
        centers = centers[:, None]
    if centers.shape[0] != u.weights.size or centers.shape[0] != v.weights.size:
        raise TransportError("centers length does not match histograms")
    return wasserstein2_sq_weights(u.weights, v.weights, pairwise_sq_dists(centers))


def fractional_assignment(costs: np.ndarray, capacities: np.ndarray):
    """Assignment LP with unit supplies: each of the N rows ships one unit.

    Returns (mu, plan) where mu holds the optimal dual values on the demand
    nodes (anchored by u[0] = 0 on the first supply node) and plan is the
    optimal TransportPlan.
    """
    costs = np.ascontiguousarray(costs, dtype=np.float64)
    capacities = np.asarray(capacities, dtype=np.float64)
    n, m = costs.shape
    if capacities.shape != (m,):
        raise TransportError("capacities must have one entry per demand node")
    if abs(capacities.sum() - n) > BALANCE_TOL * max(n, 1.0):
        raise TransportError(
            f"capacities sum to {capacities.sum()!r}, expected {n}"
        )
    if not np.isfinite(costs).all():
        raise TransportError("non-finite cost entry")
    supply = np.ones(n)
    cidx = np.flatnonzero(capacities > 0.0)
    w = capacities[cidx]
    w = w * (n / w.sum())
    sub = np.ascontiguousarray(costs[:, cidx])
    status, objective, br, bc, flows, _, vdual = _kernels.solve_transport(
        sub, supply, w
    )
    if status != 0:
        raise TransportError("transportation simplex did not converge")
    mu = np.zeros(m)
    mu[cidx] = vdual
    entries = tuple(
        (int(br[t]), int(cidx[bc[t]]), float(flows[t]))
        for t in range(len(flows))
        if flows[t] > 0.0
    )
    return mu, TransportPlan(entries=entries, objective=float(objective))
