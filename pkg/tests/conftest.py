"""Shared test utilities: independent oracles kept deliberately simple."""

import itertools

import numpy as np
import pytest

from wassbound import DiscreteMeasure, EUCLIDEAN


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_measure(rng, max_points=8, d=1, uniform_weights=False):
    m = int(rng.integers(1, max_points + 1))
    pts = rng.normal(size=(m, d)) * rng.uniform(0.5, 2.0)
    if uniform_weights:
        w = np.full(m, 1.0 / m)
    else:
        w = rng.random(m) + 1e-3
        w = w / w.sum()
    return DiscreteMeasure(pts, w)


def _solve_tree_flows(edges, supply, demand):
    """Flows on a candidate transportation basis (leaf elimination).

    Returns None when the edge set is not a spanning tree of the bipartite
    node set; otherwise the (possibly negative) basic solution.
    """
    m, n = len(supply), len(demand)
    n_nodes = m + n
    incident = {v: [] for v in range(n_nodes)}
    for e_idx, (i, j) in enumerate(edges):
        incident[i].append(e_idx)
        incident[m + j].append(e_idx)
    if any(not lst for lst in incident.values()):
        return None
    remaining = list(supply) + list(demand)
    deg = {v: len(lst) for v, lst in incident.items()}
    alive = [True] * len(edges)
    flows = [0.0] * len(edges)
    for _ in range(len(edges)):
        leaf = next((v for v in range(n_nodes) if deg[v] == 1), None)
        if leaf is None:
            return None  # cycle: not a tree
        e_idx = next(e for e in incident[leaf] if alive[e])
        i, j = edges[e_idx]
        other = m + j if leaf == i else i
        flows[e_idx] = remaining[leaf]
        remaining[other] -= remaining[leaf]
        remaining[leaf] = 0.0
        alive[e_idx] = False
        deg[leaf] -= 1
        deg[other] -= 1
    return flows


def brute_force_w1_vertex_enumeration(mu, nu, metric=EUCLIDEAN):
    """Exhaustive LP-vertex brute force for the transportation problem.

    Every vertex of the transportation polytope is the basic solution of
    some spanning-tree cell subset of size m + n - 1; enumerate them all,
    keep the feasible ones, and return the minimal cost.
    """
    m, n = mu.size, nu.size
    cmat = metric.pairwise(mu.points, nu.points)
    cells = list(itertools.product(range(m), range(n)))
    best = np.inf
    for combo in itertools.combinations(cells, m + n - 1):
        flows = _solve_tree_flows(combo, mu.weights, nu.weights)
        if flows is None or any(f < -1e-12 for f in flows):
            continue
        cost = sum(f * cmat[i, j] for f, (i, j) in zip(flows, combo))
        best = min(best, cost)
    return best
