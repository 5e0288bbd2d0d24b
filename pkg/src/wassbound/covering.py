"""Covering-number formulas and constructive covers: Euclidean and Holder
balls, Lipschitz function classes (crude and tree-refined), and the
tree-net enumeration used as a brute-force oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedGraph, DomainError
from .metric_measure import EUCLIDEAN, Metric

TREE_NET_RADIUS_FACTOR = 16.0  # constructive net radius, in units of eps


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Finite point set with a ground metric and a distinguished base point."""

    points: np.ndarray
    metric: Metric = EUCLIDEAN
    base_index: int = 0

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if pts.shape[0] == 0:
            raise ValueError("space must contain at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if not 0 <= self.base_index < pts.shape[0]:
            raise ValueError("base_index out of range")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def distance_matrix(self) -> np.ndarray:
        return self.metric.pairwise(self.points, self.points)

    def base_radius(self) -> float:
        """max_x d(x, x0)."""
        return float(np.max(self.distance_matrix()[self.base_index]))


@dataclass(frozen=True)
class CoverResult:
    """A delta-cover: every covered element is within ``radius`` of a center."""

    centers: object
    radius: float
    count: int


def greedy_cover(space: FiniteMetricSpace, delta: float) -> CoverResult:
    """Farthest-point greedy cover of the space at radius delta.

    Starts at the base point, so the first center is x0.  The count is an
    upper bound on the exact covering number (within a factor related to
    packing, see the tests); centers are returned as point indices.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    dmat = space.distance_matrix()
    centers = [space.base_index]
    mind = dmat[space.base_index].copy()
    while True:
        far = int(np.argmax(mind))
        if mind[far] <= delta:
            break
        centers.append(far)
        np.minimum(mind, dmat[far], out=mind)
    return CoverResult(centers=np.asarray(centers, dtype=np.int64), radius=delta, count=len(centers))


def n_euclidean_ball(R: float, delta: float, d: int) -> float:
    """Volume-argument covering bound (1 + 2R/delta)^d for the ball B_R."""
    if R <= 0 or delta <= 0:
        raise ValueError("R and delta must be positive")
    if d < 1:
        raise ValueError("d must be >= 1")
    return (1.0 + 2.0 * R / delta) ** d


def n_holder_ball(R: float, delta: float, alpha: float) -> float:
    """Log of the Holder-ball covering bound 10 (R/d) exp[log 3 * 5^(1/a) (R/d)^(1/a)].

    Returned in log-domain: the count itself is astronomically large for
    small delta.
    """
    if R <= 0 or delta <= 0:
        raise ValueError("R and delta must be positive")
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must be in (0, 1]")
    ratio = R / delta
    return math.log(10.0 * ratio) + math.log(3.0) * (5.0 * ratio) ** (1.0 / alpha)


def n_lipschitz_crude(n_K: float, R: float, eps: float) -> float:
    """Log of the crude Lipschitz-class bound (2 + 2 floor(3R/eps))^(N(K, eps/3))."""
    if n_K < 1:
        raise ValueError("n_K must be >= 1")
    if R <= 0 or eps <= 0:
        raise ValueError("R and eps must be positive")
    return n_K * math.log(2.0 + 2.0 * math.floor(3.0 * R / eps))


def n_lipschitz_tree(n_K: float, R: float, eps: float) -> float:
    """Log of the tree-refined bound (2 + 2 floor(4R/eps)) 2^(N(K, eps/16)).

    Requires K connected (caller-asserted).
    """
    if n_K < 1:
        raise ValueError("n_K must be >= 1")
    if R <= 0 or eps <= 0:
        raise ValueError("R and eps must be positive")
    return math.log(2.0 + 2.0 * math.floor(4.0 * R / eps)) + n_K * math.log(2.0)


def theta(x: float) -> float:
    """theta(x) = 32 x log[2 (32 x log(32 x) - 32 x + 1)]."""
    if x <= 0:
        raise DomainError("theta requires x > 0")
    y = 32.0 * x
    inner = 2.0 * (y * math.log(y) - y + 1.0)
    if inner <= 1.0:
        raise DomainError(f"theta undefined: inner log argument {inner!r} <= 1")
    return y * math.log(inner)


# ---------------------------------------------------------------------------
# constructive tree net
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeNet:
    """Enumerated net of candidate functions on a finite metric space.

    ``values`` is (count, n_points): each row is one net function evaluated
    at every point of the space (constant on each partition cell, offset by
    one element of the shift grid).
    """

    space: FiniteMetricSpace
    eps: float
    centers: np.ndarray
    cell_of_point: np.ndarray
    patterns: np.ndarray
    shifts: np.ndarray
    values: np.ndarray = field(repr=False)
    radius: float = 0.0

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def distance_to_net(self, f_values: np.ndarray) -> float:
        """Sup-distance from a function (values on the space's points) to the net."""
        f = np.asarray(f_values, dtype=np.float64).ravel()
        return float(np.min(np.max(np.abs(self.values - f), axis=1)))


def _spanning_tree(adj: np.ndarray):
    """BFS order and parents from vertex 0; raises if the graph is disconnected."""
    n = adj.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    order = [0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v in range(n):
            if adj[u, v] and not seen[v]:
                seen[v] = True
                parent[v] = u
                order.append(v)
    if not np.all(seen):
        raise DisconnectedGraph("ball intersection graph on the cover centers is disconnected")
    return np.asarray(order, dtype=np.int64), parent


def _sweep_cover(space: FiniteMetricSpace, eps: float) -> np.ndarray:
    """Cover centers chosen nearest-uncovered-first from the base point.

    Unlike farthest-point greedy this keeps consecutive centers close
    (within 2 eps on chain-connected point sets), which is what the ball
    intersection graph of the tree construction needs.
    """
    dmat = space.distance_matrix()
    order = np.argsort(dmat[space.base_index], kind="stable")
    covered = np.zeros(space.size, dtype=bool)
    centers = []
    for idx in order:
        if not covered[idx]:
            centers.append(int(idx))
            covered |= dmat[idx] <= eps
    return np.asarray(centers, dtype=np.int64)


def enumerate_tree_net(space: FiniteMetricSpace, eps: float, verify: bool = True) -> TreeNet:
    """Constructive candidate net behind the tree-refined covering bound.

    Builds an eps-cover (nearest-uncovered-first sweep from the base, so
    that chain-connected spaces yield connected graphs), the partition
    C_1..C_n, the ball intersection graph (edges where center distance
    <= 2 eps), a BFS spanning tree, and all candidate functions with
    f(a_1) = 0 and +-4 eps increments along tree edges, extended to the
    space by the cell-representative rule and offset by the shift grid
    4 k eps.

    For small spaces (<= 6 points) the net is verified exhaustively against
    a mesh discretization of all 1-Lipschitz functions vanishing at the
    base point; verification failures raise AssertionError.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    centers = _sweep_cover(space, eps)
    n = len(centers)
    dmat = space.distance_matrix()

    # first-center partition cells
    d_to_centers = dmat[:, centers]
    within = d_to_centers <= eps + 1e-12
    cell = np.argmax(within, axis=1)

    adj = dmat[np.ix_(centers, centers)] <= 2.0 * eps + 1e-12
    np.fill_diagonal(adj, False)
    order, parent = _spanning_tree(adj)

    n_patterns = 1 << max(n - 1, 0)
    masks = np.arange(n_patterns, dtype=np.int64)
    patterns = np.zeros((n_patterns, n), dtype=np.float64)
    for bit, v in enumerate(order[1:]):
        signs = (((masks >> bit) & 1) * 2 - 1).astype(np.float64)
        patterns[:, v] = patterns[:, parent[v]] + 4.0 * eps * signs

    R = space.base_radius()
    kmax = math.floor(R / (4.0 * eps))
    ks = np.arange(-kmax - 1, kmax + 1)
    shifts = 4.0 * eps * ks

    cell_values = patterns[:, cell]  # (n_patterns, n_points)
    values = (cell_values[:, None, :] + shifts[None, :, None]).reshape(-1, space.size)
    net = TreeNet(
        space=space,
        eps=eps,
        centers=centers,
        cell_of_point=cell,
        patterns=patterns,
        shifts=shifts,
        values=values,
        radius=TREE_NET_RADIUS_FACTOR * eps,
    )
    if verify and space.size <= 6:
        worst = max(
            net.distance_to_net(f) for f in lipschitz_mesh_functions(space, mesh=eps / 2.0)
        )
        assert worst <= net.radius + 1e-9, f"net radius check failed: {worst} > {net.radius}"
    return net


def lipschitz_mesh_functions(space: FiniteMetricSpace, mesh: float) -> np.ndarray:
    """All 1-Lipschitz functions vanishing at x0 with values on a mesh grid.

    Exhaustive: intended for spaces with <= 6 points.
    """
    n = space.size
    if n > 6:
        raise ValueError("exhaustive mesh enumeration is limited to 6 points")
    dmat = space.distance_matrix()
    R = space.base_radius()
    levels = np.arange(-math.floor(R / mesh), math.floor(R / mesh) + 1) * mesh
    others = [i for i in range(n) if i != space.base_index]
    grids = np.meshgrid(*([levels] * len(others)), indexing="ij")
    vals = np.zeros((grids[0].size if others else 1, n))
    for col, i in enumerate(others):
        vals[:, i] = grids[col].ravel()
    ok = np.ones(vals.shape[0], dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            ok &= np.abs(vals[:, i] - vals[:, j]) <= dmat[i, j] + 1e-12
    return vals[ok]


def sample_lipschitz_functions(
    space: FiniteMetricSpace, n_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Random 1-Lipschitz functions vanishing at x0 (McShane envelopes of
    random anchor values)."""
    n = space.size
    dmat = space.distance_matrix()
    R = max(space.base_radius(), 1e-12)
    out = np.empty((n_samples, n))
    for k in range(n_samples):
        n_anchor = int(rng.integers(1, n + 1))
        anchors = rng.choice(n, size=n_anchor, replace=False)
        v = rng.uniform(-R, R, size=n_anchor)
        f = np.min(v[None, :] + dmat[:, anchors], axis=1)
        out[k] = f - f[space.base_index]
    return out
