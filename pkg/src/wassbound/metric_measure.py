"""Metric-space points, discrete measures, reference-law samplers and
moment / exponential-moment utilities.

Points are plain 1-D float arrays: a vector in R^d, or a path sampled on
the uniform grid ``t_j = j/(m-1)`` of [0, 1] when used as path space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels
from .errors import DimensionMismatch, GridTooSmall, NoFiniteExponentialMoment

MERGE_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-12


def as_point(x) -> np.ndarray:
    """Coerce to a finite, nonempty 1-D float array."""
    p = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if p.ndim != 1 or p.size == 0:
        raise DimensionMismatch("point must be a nonempty 1-D coordinate array")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


def holder_norm(path, alpha: float) -> float:
    """Discrete alpha-Holder seminorm: sup over grid pairs |x_t - x_s| / |t-s|^alpha.

    The path is read on the uniform grid of [0, 1]; exact sup over all pairs.
    """
    p = as_point(path)
    if p.size < 2:
        raise GridTooSmall("holder_norm needs at least 2 grid points")
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    dt = 1.0 / (p.size - 1)
    return float(_kernels.holder_sup(p, float(alpha), dt))


@dataclass(frozen=True)
class Metric:
    """Ground metric: ``euclidean``, ``sup_norm_path`` or ``holder_seminorm``.

    ``holder_seminorm`` compares two paths on the same uniform grid through
    the Holder seminorm of their difference (a pseudometric).
    """

    kind: str = "euclidean"
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "sup_norm_path", "holder_seminorm"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "holder_seminorm":
            if self.alpha is None or not (0.0 < self.alpha <= 1.0):
                raise ValueError("holder_seminorm requires 0 < alpha <= 1")

    def dist(self, x, y) -> float:
        x = as_point(x)
        y = as_point(y)
        if x.size != y.size:
            raise DimensionMismatch(f"point dims differ: {x.size} vs {y.size}")
        if self.kind == "euclidean":
            return float(np.linalg.norm(x - y))
        if self.kind == "sup_norm_path":
            return float(np.max(np.abs(x - y)))
        diff = x - y
        if np.all(diff == 0.0):
            return 0.0
        return holder_norm(diff, self.alpha)

    def pairwise(self, pts_a: np.ndarray, pts_b: np.ndarray) -> np.ndarray:
        """Distance matrix between the rows of two (k, d) point arrays."""
        a = np.atleast_2d(np.asarray(pts_a, dtype=np.float64))
        b = np.atleast_2d(np.asarray(pts_b, dtype=np.float64))
        if a.shape[1] != b.shape[1]:
            raise DimensionMismatch("point arrays have different dimension")
        if self.kind == "euclidean":
            return cdist(a, b)
        if self.kind == "sup_norm_path":
            return cdist(a, b, metric="chebyshev")
        out = np.empty((a.shape[0], b.shape[0]))
        for i in range(a.shape[0]):
            for j in range(b.shape[0]):
                out[i, j] = self.dist(a[i], b[j])
        return out


EUCLIDEAN = Metric("euclidean")
SUP_NORM = Metric("sup_norm_path")


def _merge_close_rows(points: np.ndarray, weights: np.ndarray, tol: float):
    """Sort rows lexicographically and merge runs of near-identical rows."""
    order = np.lexsort(points.T[::-1])
    pts = points[order]
    w = weights[order]
    if pts.shape[0] > 1:
        diffs = np.max(np.abs(np.diff(pts, axis=0)), axis=1)
        starts = np.concatenate(([True], diffs > tol))
        gidx = np.cumsum(starts) - 1
        pts = pts[starts]
        w = np.bincount(gidx, weights=w)
    return pts, w


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure.

    ``points`` is (k, d); ``weights`` is (k,), nonnegative, summing to 1.
    Construction sorts the support, merges duplicates within 1e-12, drops
    zero-weight atoms and renormalizes the (validated) weight sum exactly.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("support must be a nonempty (k, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("support coordinates must be finite")
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        if w.shape[0] != pts.shape[0]:
            raise ValueError("support and weights lengths differ")
        if np.any(w < -1e-15):
            raise ValueError("weights must be nonnegative")
        w = np.clip(w, 0.0, None)
        s = w.sum()
        if abs(s - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {s!r}, expected 1 within {WEIGHT_SUM_TOL}")
        keep = w > 0.0
        if not np.any(keep):
            raise ValueError("measure has no positive-weight atom")
        pts, w = _merge_close_rows(pts[keep], w[keep], MERGE_TOL)
        w = w / w.sum()
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def diameter(self, metric: Metric = EUCLIDEAN) -> float:
        if self.size == 1:
            return 0.0
        return float(np.max(metric.pairwise(self.points, self.points)))

    @staticmethod
    def point_mass(x) -> "DiscreteMeasure":
        return DiscreteMeasure(as_point(x)[None, :], np.ones(1))

    @staticmethod
    def from_raw(points, weights) -> "DiscreteMeasure":
        """Build from nonnegative weights of any positive total (renormalized)."""
        w = np.asarray(weights, dtype=np.float64).ravel()
        total = w.sum()
        if total <= 0:
            raise ValueError("total weight must be positive")
        return DiscreteMeasure(points, w / total)


@dataclass(frozen=True)
class MomentReport:
    """First and exponential moments of d(x, x0) under a sampled law."""

    m1: float
    E_a1: float
    E_a2: float
    a: float


_LAWS = ("gaussian", "uniform_cube", "exponential_tail", "brownian_path", "finite", "mixture")


@dataclass(frozen=True, eq=False)
class Sampler:
    """Seeded generator of i.i.d. points from a named reference law.

    The same (law, seed) always reproduces the same stream: ``draw(n, stream)``
    is a pure function of (law, seed, n, stream), so concurrent tasks may
    share a sampler as long as each owns its stream index.
    """

    law: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.law not in _LAWS:
            raise ValueError(f"unknown law {self.law!r}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def gaussian(mean=0.0, cov_diag=1.0, seed: int = 0) -> "Sampler":
        mean = as_point(mean)
        cov = np.broadcast_to(np.asarray(cov_diag, dtype=np.float64), mean.shape).copy()
        if np.any(cov < 0):
            raise ValueError("cov_diag must be nonnegative")
        return Sampler("gaussian", {"mean": mean, "cov_diag": cov}, seed)

    @staticmethod
    def uniform_cube(d: int = 1, seed: int = 0) -> "Sampler":
        if d < 1:
            raise ValueError("d must be >= 1")
        return Sampler("uniform_cube", {"d": int(d)}, seed)

    @staticmethod
    def exponential_tail(rate: float = 1.0, seed: int = 0) -> "Sampler":
        if rate <= 0:
            raise ValueError("rate must be positive")
        return Sampler("exponential_tail", {"rate": float(rate)}, seed)

    @staticmethod
    def brownian_path(grid_size: int = 1024, seed: int = 0) -> "Sampler":
        if grid_size < 2:
            raise GridTooSmall("brownian_path needs grid_size >= 2")
        return Sampler("brownian_path", {"grid_size": int(grid_size)}, seed)

    @staticmethod
    def finite(measure: DiscreteMeasure, seed: int = 0) -> "Sampler":
        return Sampler("finite", {"measure": measure}, seed)

    @staticmethod
    def mixture(weights, components, seed: int = 0) -> "Sampler":
        """Mixture of samplers; component seeds are derived from this sampler's."""
        w = np.asarray(weights, dtype=np.float64)
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("mixture weights must be nonnegative with positive sum")
        comps = tuple(components)
        dims = {c.dim for c in comps}
        if len(comps) != w.size or not comps:
            raise ValueError("weights and components lengths differ")
        if len(dims) != 1:
            raise DimensionMismatch("mixture components have different dimensions")
        return Sampler("mixture", {"weights": w / w.sum(), "components": comps}, seed)

    # -- behaviour ---------------------------------------------------------

    @property
    def dim(self) -> int:
        p = self.params
        if self.law == "gaussian":
            return p["mean"].size
        if self.law == "uniform_cube":
            return p["d"]
        if self.law == "exponential_tail":
            return 1
        if self.law == "brownian_path":
            return p["grid_size"]
        if self.law == "finite":
            return p["measure"].dim
        return p["components"][0].dim

    def default_metric(self) -> Metric:
        return SUP_NORM if self.law == "brownian_path" else EUCLIDEAN

    def origin(self) -> np.ndarray:
        """Base point x0: the zero vector / zero path."""
        return np.zeros(self.dim)

    def _rng(self, stream) -> np.random.Generator:
        mask = 0xFFFFFFFFFFFFFFFF
        parts = stream if isinstance(stream, (tuple, list)) else (stream,)
        key = [int(self.seed) & mask] + [int(s) & mask for s in parts]
        return np.random.default_rng(key)

    def draw(self, n: int, stream=0) -> np.ndarray:
        """Return an (n, dim) array of i.i.d. draws."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = self._rng(stream)
        p = self.params
        if self.law == "gaussian":
            z = rng.standard_normal((n, p["mean"].size))
            return p["mean"] + np.sqrt(p["cov_diag"]) * z
        if self.law == "uniform_cube":
            return rng.random((n, p["d"]))
        if self.law == "exponential_tail":
            return rng.exponential(1.0 / p["rate"], (n, 1))
        if self.law == "brownian_path":
            m = p["grid_size"]
            dt = 1.0 / (m - 1)
            inc = rng.standard_normal((n, m - 1)) * math.sqrt(dt)
            out = np.zeros((n, m))
            np.cumsum(inc, axis=1, out=out[:, 1:])
            return out
        if self.law == "finite":
            meas = p["measure"]
            idx = rng.choice(meas.size, size=n, p=meas.weights)
            return meas.points[idx]
        # mixture
        counts = rng.multinomial(n, p["weights"])
        parts = []
        for i, (c, comp) in enumerate(zip(counts, p["components"])):
            if c == 0:
                continue
            sub = Sampler(comp.law, comp.params, seed=int(rng.integers(2**63)))
            parts.append(sub.draw(int(c), stream=0))
        out = np.concatenate(parts, axis=0)
        rng.shuffle(out, axis=0)
        return out


def sample_empirical(s: Sampler, n: int, stream: int = 0) -> DiscreteMeasure:
    """Empirical measure of n i.i.d. draws; duplicate draws merge weights."""
    draws = s.draw(n, stream=stream)
    return DiscreteMeasure(draws, np.full(n, 1.0 / n))


def _distances_to(s: Sampler, x0, n_mc: int, metric: Metric | None, stream: int) -> np.ndarray:
    metric = metric or s.default_metric()
    x0 = s.origin() if x0 is None else as_point(x0)
    draws = s.draw(n_mc, stream=stream)
    if metric.kind == "euclidean":
        # overflow to inf is fine: callers treat inf distances as heavy tails
        with np.errstate(over="ignore"):
            return np.linalg.norm(draws - x0, axis=1)
    if metric.kind == "sup_norm_path":
        return np.max(np.abs(draws - x0), axis=1)
    return np.array([metric.dist(row, x0) for row in draws])


def estimate_m1(
    s: Sampler, x0=None, n_mc: int = 10_000, metric: Metric | None = None, stream: int = 0
) -> tuple[float, float]:
    """Monte-Carlo mean of d(X, x0) with its standard error."""
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    d = _distances_to(s, x0, n_mc, metric, stream)
    m1 = float(d.mean())
    se = float(d.std(ddof=1) / math.sqrt(n_mc)) if n_mc > 1 else 0.0
    return m1, se


def find_exp_rate(
    s: Sampler,
    x0=None,
    target: float = 2.0,
    n_mc: int = 4096,
    metric: Metric | None = None,
    a_cap: float = 1e6,
    iters: int = 60,
    stream: int = 0,
) -> float:
    """Largest rate a (by bisection) with Monte-Carlo E exp(a d(x0, X)) <= target.

    Deterministic given the sampler seed: one set of draws is shared by all
    bisection evaluations (the estimate is then continuous and increasing in
    a).  If even the cap rate keeps the estimate below target, the cap is
    returned (e.g. point masses at x0, where the moment is identically 1).
    """
    if target <= 1.0:
        raise ValueError("target must exceed 1")
    d = _distances_to(s, x0, n_mc, metric, stream)

    def estimate(a: float) -> float:
        with np.errstate(over="ignore"):
            return float(np.mean(np.exp(a * d)))

    tiny = 1e-12
    if not np.isfinite(estimate(tiny)) or estimate(tiny) > target:
        raise NoFiniteExponentialMoment(
            "exponential moment estimate exceeds target for every tested rate"
        )
    hi = 1.0
    while estimate(hi) <= target:
        hi *= 2.0
        if hi >= a_cap:
            return float(a_cap)
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if estimate(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def moment_report(
    s: Sampler, x0=None, a: float = 1.0, n_mc: int = 10_000,
    metric: Metric | None = None, stream: int = 0,
) -> MomentReport:
    """Monte-Carlo moment summary at rate a: m1, E_{a,1}, E_{a,2}."""
    d = _distances_to(s, x0, n_mc, metric, stream)
    with np.errstate(over="ignore"):
        e1 = float(np.mean(np.exp(a * d)))
        e2 = float(np.mean(np.exp(a * d * d)))
    return MomentReport(m1=float(d.mean()), E_a1=e1, E_a2=e2, a=a)
