"""Deviation-rate functions, monotone conjugates, the Gamma infimum,
transport-inequality constants from moment criteria, and the dual
Laplace-transform check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractionOutOfRange, Unbounded
from .metric_measure import Sampler

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class RateFunction:
    """Convex nondecreasing rate with alpha(0) = 0.

    Subclasses implement ``__call__``; closed-form monotone conjugates are
    exposed through ``conjugate_closed`` when the kind permits and override
    the numeric optimizer by default.
    """

    def __call__(self, t: float) -> float:
        raise NotImplementedError

    def conjugate_closed(self, s: float):
        return None

    def quadratic_coefficient(self):
        """C such that alpha(t) = t^2 / C, when the rate is exactly quadratic."""
        return None


@dataclass(frozen=True)
class Quadratic(RateFunction):
    """alpha(t) = t^2 / C, the T1(C) rate."""

    C: float

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")

    def __call__(self, t):
        return t * t / self.C

    def conjugate_closed(self, s):
        # sup_t st - t^2/C at t = Cs/2
        return self.C * s * s / 4.0

    def quadratic_coefficient(self):
        return self.C


@dataclass(frozen=True)
class ModifiedBV(RateFunction):
    """Rate of the modified inequality W1 <= C (H + sqrt(H)).

    Inverting x = C (t + sqrt(t)) gives sqrt(t) = (sqrt(1 + 4x/C) - 1)/2,
    i.e. alpha(x) = ((sqrt(1 + 4x/C) - 1)^2) / 4.
    """

    C: float

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")

    def __call__(self, t):
        return 0.25 * (math.sqrt(1.0 + 4.0 * t / self.C) - 1.0) ** 2

    def conjugate_closed(self, s):
        # stationarity of st - alpha(t) gives t = C ((1-Cs)^-2 - 1)/4 for s < 1/C
        if s >= 1.0 / self.C:
            return math.inf
        return (self.C * s) ** 2 / (4.0 * (1.0 - self.C * s))


@dataclass(frozen=True)
class GozlanLeonard(RateFunction):
    """Two-branch rate from the integral criterion; see gozlan_leonard_rate."""

    a: float
    gamma: object
    B: float

    def __call__(self, t):
        first = (math.sqrt(self.a * t + 1.0) - 1.0) ** 2
        arg = t / 2.0 - 2.0 * math.log(self.B)
        second = 2.0 * self.gamma(arg) if arg > 0.0 else 0.0
        return max(first, second)


@dataclass(frozen=True)
class TableRate(RateFunction):
    """Piecewise-linear rate from a table, extended by its last slope."""

    ts: tuple
    vals: tuple

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=np.float64)
        vals = np.asarray(self.vals, dtype=np.float64)
        if ts.size < 2 or ts.size != vals.size:
            raise ValueError("table needs matching ts/vals with >= 2 entries")
        if ts[0] != 0.0 or vals[0] != 0.0:
            raise ValueError("table must start at alpha(0) = 0")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("table abscissae must increase")
        slopes = np.diff(vals) / np.diff(ts)
        if np.any(np.diff(slopes) < -1e-9) or np.any(slopes < -1e-12):
            raise ValueError("table must be convex and nondecreasing")
        object.__setattr__(self, "ts", tuple(ts))
        object.__setattr__(self, "vals", tuple(vals))

    def __call__(self, t):
        ts = np.asarray(self.ts)
        vals = np.asarray(self.vals)
        if t >= ts[-1]:
            slope = (vals[-1] - vals[-2]) / (ts[-1] - ts[-2])
            return float(vals[-1] + slope * (t - ts[-1]))
        return float(np.interp(t, ts, vals))


@dataclass(frozen=True)
class ScaledRate(RateFunction):
    """alpha(t) = outer * base(inner * t)."""

    base: RateFunction
    outer: float
    inner: float

    def __call__(self, t):
        return self.outer * self.base(self.inner * t)

    def conjugate_closed(self, s):
        inner = self.base.conjugate_closed(s / (self.outer * self.inner))
        if inner is None:
            return None
        return self.outer * inner

    def quadratic_coefficient(self):
        c = self.base.quadratic_coefficient()
        if c is None:
            return None
        return c / (self.outer * self.inner * self.inner)


@dataclass(frozen=True)
class ConjugateValue:
    s: float
    value: float
    argmax_t: float


def _golden_max(g, lo: float, hi: float, iters: int = 200):
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(iters):
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - GOLDEN * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + GOLDEN * (b - a)
            gd = g(d)
        if b - a <= 1e-15 * max(1.0, abs(a)):
            break
    t = 0.5 * (a + b)
    return t, g(t)


def conjugate(alpha: RateFunction, s: float, method: str = "auto") -> ConjugateValue:
    """Monotone conjugate sup_{t >= 0} (s t - alpha(t)).

    ``method='auto'`` uses the closed form when the kind has one,
    ``'numeric'`` forces bracket growth + golden-section maximization.
    Raises Unbounded when the objective keeps increasing past the bracket
    cap (the rate grows sublinearly).
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if method not in ("auto", "numeric"):
        raise ValueError("method must be 'auto' or 'numeric'")
    if method == "auto":
        closed = alpha.conjugate_closed(s)
        if closed is not None:
            if math.isinf(closed):
                return ConjugateValue(s, math.inf, math.inf)
            c = alpha.quadratic_coefficient()
            argmax = c * s / 2.0 if c is not None else math.nan
            return ConjugateValue(s, closed, argmax)

    def g(t):
        return s * t - alpha(t)

    if s == 0.0:
        return ConjugateValue(0.0, 0.0, 0.0)
    hi = 1.0
    cap = 1e12
    while g(2.0 * hi) > g(hi):
        hi *= 2.0
        if hi >= cap:
            raise Unbounded("s t - alpha(t) still increasing at the bracket cap")
    t_star, val = _golden_max(g, 0.0, 2.0 * hi)
    val = max(val, 0.0)  # alpha(0) = 0 guarantees the sup is >= 0
    return ConjugateValue(s, val, t_star)


def gamma(alpha: RateFunction, logN: float, n: int, method: str = "auto") -> float:
    """Gamma(N, n) = inf_{lambda > 0} (log N + n conj(alpha)(lambda/n)) / lambda.

    The quadratic case has the closed form sqrt(C log N / n), used when
    ``method='auto'``; otherwise a log-spaced scan plus golden refinement.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if logN < 0:
        raise ValueError("logN must be nonnegative")
    if method == "auto":
        c = alpha.quadratic_coefficient()
        if c is not None:
            return math.sqrt(c * logN / n)

    def h(lam):
        val = conjugate(alpha, lam / n).value
        if math.isinf(val):
            return math.inf
        return (logN + n * val) / lam

    grid = np.logspace(-8, 12, 201)
    vals = np.array([h(l) for l in grid])
    k = int(np.nanargmin(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    _, neg = _golden_max(lambda u: -h(math.exp(u)), math.log(lo), math.log(hi), iters=120)
    best = min(float(vals[k]), -neg)
    return max(best, 0.0)


def rate_markov_transform(
    alpha: RateFunction, r: float, n: int
) -> tuple[RateFunction, RateFunction]:
    """Path-level and marginal rates under an r-contracting kernel.

    Returns (path_level, marginal) where path_level(t) = n alpha((1-r) t / n)
    and marginal(t) = alpha((1-r) t) / (1-r).
    """
    if not 0.0 <= r < 1.0:
        raise ContractionOutOfRange(f"contraction coefficient must be in [0, 1), got {r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    path_level = ScaledRate(alpha, outer=float(n), inner=(1.0 - r) / n)
    marginal = ScaledRate(alpha, outer=1.0 / (1.0 - r), inner=1.0 - r)
    return path_level, marginal


def t1_from_gaussian_moment(a: float, E_a2: float) -> float:
    """T1 constant C = (2/a)(1 + log E_{a,2}) from a square-exponential moment."""
    if a <= 0:
        raise ValueError("a must be positive")
    if E_a2 < 1.0:
        raise ValueError("E_a2 must be >= 1")
    return 2.0 / a * (1.0 + math.log(E_a2))


def modified_t1_from_exp_moment(a: float, E_a1: float) -> float:
    """Constant C = (2/a)(3/2 + log E_{a,1}) of the modified inequality."""
    if a <= 0:
        raise ValueError("a must be positive")
    if E_a1 < 1.0:
        raise ValueError("E_a1 must be >= 1")
    return 2.0 / a * (1.5 + math.log(E_a1))


def gozlan_leonard_rate(a: float, gamma_fn, B: float) -> GozlanLeonard:
    """Rate alpha(x) = max((sqrt(ax+1)-1)^2, 2 gamma(x/2 - 2 log B)).

    The second branch is clipped to zero when its argument is negative
    (gamma is only defined on [0, inf)).
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if B < 1.0:
        raise ValueError("B must be >= 1")
    return GozlanLeonard(a=a, gamma=gamma_fn, B=B)


def bobkov_gotze_check(
    s: Sampler,
    f,
    lam: float,
    alpha: RateFunction,
    n_mc: int = 20_000,
    stream: int = 0,
) -> tuple[float, float, bool]:
    """Monte-Carlo falsification of E exp(lam (f - E f)) <= exp(conj(lam)).

    ``f`` must be 1-Lipschitz (caller-asserted).  Returns (lhs, rhs, pass)
    where pass allows 3 relative standard errors of slack; a False result
    falsifies the candidate rate, a True one proves nothing.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    draws = s.draw(n_mc, stream=stream)
    fx = np.asarray([f(row) for row in draws], dtype=np.float64)
    fx -= fx.mean()
    ex = np.exp(lam * fx)
    lhs = float(ex.mean())
    stderr = float(ex.std(ddof=1) / math.sqrt(n_mc))
    rhs = float(math.exp(conjugate(alpha, lam).value))
    passed = lhs <= rhs * (1.0 + 3.0 * stderr / lhs)
    return lhs, rhs, passed


def sigma_forward(x: float) -> float:
    """x ln x - x + 1 on [1, inf), the Young function of the Orlicz pairing."""
    if x < 1.0:
        raise ValueError("forward map is used on [1, inf)")
    return x * math.log(x) - x + 1.0


def sigma_inverse(y: float) -> float:
    """Inverse of x ln x - x + 1 on [1, inf), by Newton from 1 + sqrt(2y)."""
    if y < 0:
        raise ValueError("y must be nonnegative")
    if y == 0.0:
        return 1.0
    x = 1.0 + math.sqrt(2.0 * y)
    for _ in range(200):
        resid = x * math.log(x) - x + 1.0 - y
        if abs(resid) <= 1e-12 * max(1.0, y):
            break
        step = resid / math.log(x)
        x -= step
        if x < 1.0:
            x = 1.0 + 1e-16
    return x
