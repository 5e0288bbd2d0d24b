"""End-to-end deviation-bound formulas, producing BoundReport values with
every intermediate constant exposed.

All bound values are carried in log-domain: the covering-number factors
routinely overflow doubles.  The unnamed universal constants of the source
formulas are explicit configuration parameters with documented defaults
(``c = 4`` for the Gaussian-Banach factor, ``C1 = 2``, ``C2 = 2`` and
``C_d = 65^d``, the volume instantiation (1 + 2*32)^d, for the R^d case);
reports print the values used.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .covering import n_euclidean_ball, n_holder_ball, n_lipschitz_tree, theta
from .errors import DomainError, RegimeViolation, WitnessTooFar
from .rate_functions import RateFunction, gamma, sigma_inverse

SQRT2M1_SQ = (math.sqrt(2.0) - 1.0) ** 2


def default_cd(d: int) -> float:
    """Volume instantiation (1 + 2*32)^d of the dimension constant."""
    return 65.0**d


@dataclass(frozen=True)
class BoundReport:
    """Evaluated bound at (n, t): log-domain value plus intermediates."""

    name: str
    n: int
    t: float
    log_value: float
    intermediates: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_value))

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "n": self.n,
            "t": self.t,
            "log_value": self.log_value,
            "intermediates": self.intermediates,
        }
        return json.dumps(payload, sort_keys=True, default=float)


@dataclass(frozen=True)
class CompactChoice:
    """A compact-set family K_R with an upper bound on mu(K_R^c)."""

    kind: str
    tail_bound: object  # callable R -> upper bound on mu(K_R^c), nonincreasing
    params: dict = field(default_factory=dict)


def euclidean_ball_compact(a: float) -> CompactChoice:
    """Balls B_R with the Chebyshev tail 2 e^(-aR) from E_{a,1} <= 2."""
    return CompactChoice("euclidean_ball", lambda R: 2.0 * math.exp(-a * R), {"a": a})


def holder_ball_compact(m_alpha: float, s2_alpha: float, alpha: float) -> CompactChoice:
    """Holder balls with the Gaussian tail 2 e^(-(R-m)^2 / (2 s^2)) for R >= m."""

    def tail(R: float) -> float:
        if R <= m_alpha:
            return 1.0
        return 2.0 * math.exp(-((R - m_alpha) ** 2) / (2.0 * s2_alpha))

    return CompactChoice(
        "holder_ball", tail, {"m_alpha": m_alpha, "s2_alpha": s2_alpha, "alpha": alpha}
    )


def required_tail(a: float, t: float) -> float:
    """Admissible mu(K^c): [32/(at) log(32/(at)) - 32/(at) + 1]^(-1)."""
    if a <= 0 or t <= 0:
        raise ValueError("a and t must be positive")
    y = 32.0 / (a * t)
    if y <= 1.0:
        raise DomainError(f"required_tail needs 32/(a t) > 1, got {y!r}")
    return 1.0 / (y * math.log(y) - y + 1.0)


def solve_compact_radius(compact: CompactChoice, threshold: float) -> float:
    """Smallest radius (by bisection) with tail_bound(R) <= threshold."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    lo = 0.0
    hi = 1.0
    grow = 0
    while compact.tail_bound(hi) > threshold:
        lo = hi
        hi *= 2.0
        grow += 1
        if grow > 2000:
            raise DomainError("tail bound never reaches the required threshold")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if compact.tail_bound(mid) <= threshold:
            hi = mid
        else:
            lo = mid
    return hi


def euclidean_cover_rule(d: int, C_d: float | None = None):
    """(R, delta) -> log N(F_{B_R}, delta), constructed via the tree bound.

    ``C_d`` defaults to the volume bound; set it to override the ball
    covering count N(B_R, delta/16) = C_d-free (1 + 32 R/delta)^d with
    C_d (R/(delta/16))^d.
    """

    def rule(R: float, delta: float) -> float:
        if C_d is None:
            n_K = n_euclidean_ball(R, delta / 16.0, d)
        else:
            n_K = C_d * (16.0 * R / delta) ** d
        return n_lipschitz_tree(n_K, R, delta)

    return rule


def holder_cover_rule(alpha: float):
    """(R, delta) -> log N for the Holder-ball compact; +inf on overflow.

    The ball covering count is itself exponentially large, so the Lipschitz
    class entropy is double-exponential; when it cannot be represented in a
    float the rule returns inf and downstream bounds become vacuous.
    """

    def rule(R: float, delta: float) -> float:
        log_n_K = n_holder_ball(R, delta / 16.0, alpha)
        if log_n_K > 700.0:
            return math.inf
        return n_lipschitz_tree(math.exp(log_n_K), R, delta)

    return rule


def bound_main(
    alpha: RateFunction,
    a: float,
    compact: CompactChoice,
    cover_rule,
    t: float,
    n: int,
) -> BoundReport:
    """General bound exp(-n alpha(t/2 - Gamma(C_t, n))), alpha(x<0) = 0.

    The compact radius is the smallest one whose tail bound meets
    required_tail(a, t); C_t is the cover_rule value at (R, t/8).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    thr = required_tail(a, t)
    R = solve_compact_radius(compact, thr)
    log_ct = cover_rule(R, t / 8.0)
    g = gamma(alpha, log_ct, n) if math.isfinite(log_ct) else math.inf
    x = t / 2.0 - g
    log_value = -n * alpha(x) if x > 0.0 else 0.0
    return BoundReport(
        "main",
        n,
        t,
        log_value,
        {
            "a": a,
            "R_t": R,
            "required_tail": thr,
            "log_Ct": log_ct,
            "Gamma": g,
            "compact": compact.kind,
        },
    )


def bound_t1(C: float, log_Ct: float, t: float, n: int) -> BoundReport:
    """T1(C) corollary: C_t exp(-n t^2 / (8C)), in log-domain."""
    if C <= 0 or t < 0 or n < 1:
        raise ValueError("need C > 0, t >= 0, n >= 1")
    log_value = log_Ct - n * t * t / (8.0 * C)
    return BoundReport("t1", n, t, log_value, {"C": C, "log_Ct": log_Ct})


def bound_modified(C: float, log_Ct: float, t: float, n: int) -> BoundReport:
    """Modified-inequality bound A(n,t) exp(-(sqrt2-1)^2 n t^2 / (2 C^2)).

    Outside the stated regime t <= C/2 the report is still computed but
    flagged through intermediates["regime_violation"].
    """
    if C <= 0 or n < 1:
        raise ValueError("need C > 0 and n >= 1")
    if log_Ct <= 0:
        raise ValueError("log_Ct must be positive")
    log_A = 4.0 * SQRT2M1_SQ * n / (math.sqrt(1.0 + n / log_Ct) - 1.0) ** 2
    log_value = log_A - SQRT2M1_SQ / (2.0 * C * C) * n * t * t
    return BoundReport(
        "modified",
        n,
        t,
        log_value,
        {
            "C": C,
            "log_Ct": log_Ct,
            "log_A": log_A,
            "regime_violation": bool(t > C / 2.0),
        },
    )


def bound_rd(
    a: float,
    C: float,
    d: int,
    t: float,
    n: int,
    C_d: float | None = None,
    C1: float = 2.0,
    C2: float = 2.0,
) -> BoundReport:
    """R^d instantiation: log C_t via theta fed into the T1 bound.

    Both the theta-form and, in its regime t <= 1/(2a), the small-t form of
    log C_t are reported; the theta-form drives the bound value.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if C_d is None:
        C_d = default_cd(d)
    th = theta(1.0 / (a * t))
    log_ct = math.log(2.0) + math.log1p(th) + C_d * th**d * math.log(2.0)
    report = bound_t1(C, log_ct, t, n)
    inter = dict(report.intermediates)
    inter.update({"a": a, "d": d, "C_d": C_d, "theta": th})
    if t <= 1.0 / (2.0 * a):
        u = 1.0 / (a * t)
        ul = u * math.log(u)
        inter["log_Ct_small_t"] = math.log(C1) + math.log1p(ul) + C_d * C2**d * ul**d
        inter["C1"] = C1
        inter["C2"] = C2
    return BoundReport("rd", n, t, report.log_value, inter)


def bound_variant(
    C: float, k: int, D: float, t: float, n: int, achieved_w1: float | None = None
) -> BoundReport:
    """Quantization-witness bound K_t exp(-n t^2/(8C)), K_t = exp(k D^2 / C).

    The caller supplies the witness statistics (support size k, diameter D)
    of a finitely supported nu with W1(mu, nu) <= t/4; if the achieved W1 is
    passed and exceeds t/4 the witness is rejected.
    """
    if C <= 0 or k < 1 or D < 0 or t < 0 or n < 1:
        raise ValueError("invalid bound_variant parameters")
    if achieved_w1 is not None and achieved_w1 > t / 4.0 + 1e-12:
        raise WitnessTooFar(
            f"witness has W1 = {achieved_w1!r} > t/4 = {t / 4.0!r}"
        )
    log_Kt = k * D * D / C
    log_value = log_Kt - n * t * t / (8.0 * C)
    return BoundReport(
        "variant", n, t, log_value,
        {"C": C, "k": k, "D": D, "log_Kt": log_Kt, "achieved_w1": achieved_w1},
    )


def bound_gaussian_banach(
    psi, sigma: float, t: float, n: int, c: float = 4.0
) -> BoundReport:
    """Gaussian Banach-space bound K_t exp(-n t^2 / (16 sigma^2)).

    ``psi`` is the small-ball function; K_t = exp exp[c (psi(t/32) +
    log(sigma/t))].  Also reports the quantization intermediates: the
    Cameron-Martin dilation lambda <= sqrt(psi(t/16)) + c sqrt(log sigma/t),
    the net size exponent psi(t/16) + psi(t/32) + c log(sigma/t), and the
    support diameter 2 sigma lambda.
    """
    if sigma <= 0 or t <= 0 or n < 1:
        raise ValueError("need sigma > 0, t > 0, n >= 1")
    psi16 = float(psi(t / 16.0))
    psi32 = float(psi(t / 32.0))
    if psi16 < math.log(2.0):
        raise RegimeViolation(f"psi(t/16) = {psi16!r} < log 2")
    if t / sigma > 8.0 * math.sqrt(2.0 * math.log(2.0)):
        raise RegimeViolation("t/sigma exceeds 8 sqrt(2 log 2)")
    log_ratio = math.log(sigma / t)
    lam = math.sqrt(psi16) + c * math.sqrt(max(log_ratio, 0.0))
    log_k = psi16 + psi32 + c * max(log_ratio, 0.0)
    log_log_Kt = c * (psi32 + log_ratio)
    with np.errstate(over="ignore"):
        log_Kt = float(np.exp(log_log_Kt))
    log_value = log_Kt - n * t * t / (16.0 * sigma * sigma)
    return BoundReport(
        "gaussian_banach",
        n,
        t,
        log_value,
        {
            "sigma": sigma,
            "c": c,
            "psi_t16": psi16,
            "psi_t32": psi32,
            "lambda": lam,
            "log_k": log_k,
            "diameter": 2.0 * sigma * lam,
            "log_log_Kt": log_log_Kt,
            "log_Kt": log_Kt,
        },
    )


def mean_bound(
    alpha: RateFunction,
    a: float,
    tail: float,
    log_Ndelta: float,
    delta: float,
    n: int,
) -> float:
    """Mean bound 2 delta + (8/a) / sigma_inv(1/tail) + Gamma(N_delta, n)."""
    if not 0.0 < tail <= 1.0:
        raise ValueError("tail must lie in (0, 1]")
    if delta <= 0 or a <= 0:
        raise ValueError("delta and a must be positive")
    orlicz = (8.0 / a) / sigma_inverse(1.0 / tail)
    return 2.0 * delta + orlicz + gamma(alpha, log_Ndelta, n)


def mean_bound_quantized(w1_mu_muk: float, k: int, D: float, n: int) -> float:
    """Quantized mean bound 2 W1(mu, mu^k) + D sqrt(k/n)."""
    if w1_mu_muk < 0 or D < 0 or k < 1 or n < 1:
        raise ValueError("invalid mean_bound_quantized parameters")
    return 2.0 * w1_mu_muk + D * math.sqrt(k / n)


def concentration_around_mean(
    alpha: RateFunction, mean_bound_value: float, t: float, n: int
) -> float:
    """P(W1 >= t) <= exp(-n alpha(t - mean_bound)), alpha(x<0) = 0."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = t - mean_bound_value
    if x <= 0.0:
        return 1.0
    return math.exp(-n * alpha(x))


def gaussian_abs_norm(p: float) -> float:
    """L_p norm of |Z| for standard Gaussian Z: (2^(p/2) Gamma((p+1)/2) / sqrt(pi))^(1/p)."""
    if p <= 0:
        raise ValueError("p must be positive")
    log_moment = (p / 2.0) * math.log(2.0) + gammaln((p + 1.0) / 2.0) - 0.5 * math.log(math.pi)
    return math.exp(log_moment / p)


def holder_moment_constant(alpha: float) -> float:
    """Holder-moment constant C_alpha bounding E ||B||_alpha for Brownian paths.

    C_alpha = 2^(1+alpha) 2^((1-2 alpha)/4) / (1 - 2^((2 alpha - 1)/4))
    * ||Z||_{4/(1-2 alpha)}; diverges as alpha -> 1/2.
    """
    if not 0.0 < alpha < 0.5:
        raise DomainError("holder_moment_constant requires 0 < alpha < 1/2")
    p = 4.0 / (1.0 - 2.0 * alpha)
    denom = 1.0 - 2.0 ** ((2.0 * alpha - 1.0) / 4.0)
    return 2.0 ** (1.0 + alpha) * 2.0 ** ((1.0 - 2.0 * alpha) / 4.0) / denom * gaussian_abs_norm(p)


def gaussian_tail(m: float, sigma2: float, R: float) -> float:
    """Gaussian-norm tail bound exp(-R^2 / (2 sigma^2)) for ||x|| >= m + R."""
    if R < 0:
        raise ValueError("R must be nonnegative")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return math.exp(-R * R / (2.0 * sigma2))
