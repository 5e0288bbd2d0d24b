"""Markov kernels, chain simulation, occupation measures,
contraction-coefficient estimation and the contracting-chain bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bounds import BoundReport
from .errors import ContractionOutOfRange, RegimeViolation
from .metric_measure import EUCLIDEAN, DiscreteMeasure, Metric, as_point
from .wasserstein import quantize, w1_cost


@dataclass(frozen=True, eq=False)
class MarkovKernel:
    """One-step transition sampler with optional declared constants.

    ``step(x, rng)`` draws one transition from P(x, .); it must be
    re-entrant (a fresh Generator is supplied per trajectory).
    ``declared_r`` is the W1 contraction coefficient, ``declared_C`` the T1
    constant of the transition laws, when known.
    """

    name: str
    step: object
    dim: int = 1
    declared_r: float | None = None
    declared_C: float | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.declared_r is not None and not (0.0 <= self.declared_r < 1.0):
            raise ContractionOutOfRange(f"declared_r must be in [0, 1), got {self.declared_r}")


def ar1_kernel(r: float, noise_sigma: float = 1.0) -> MarkovKernel:
    """AR(1) chain X+ = r X + sigma xi, xi ~ N(0,1).

    The Gaussian transition law satisfies T1(2 sigma^2) and contracts at
    rate |r| (translation coupling).
    """
    if noise_sigma <= 0:
        raise ValueError("noise_sigma must be positive")

    def step(x, rng):
        return r * x + noise_sigma * rng.standard_normal(1)

    return MarkovKernel(
        "ar1",
        step,
        dim=1,
        declared_r=abs(r) if abs(r) < 1 else None,
        declared_C=2.0 * noise_sigma**2,
        params={"r": float(r), "noise_sigma": float(noise_sigma)},
    )


def reflected_rw_kernel(step_size: float) -> MarkovKernel:
    """Reflected random walk X+ = |X + step_size xi|, xi ~ N(0,1)."""
    if step_size <= 0:
        raise ValueError("step_size must be positive")

    def step(x, rng):
        return np.abs(x + step_size * rng.standard_normal(1))

    return MarkovKernel("reflected_rw", step, dim=1, params={"step_size": float(step_size)})


def finite_chain_kernel(matrix, states=None) -> MarkovKernel:
    """Finite-state chain from a row-stochastic matrix.

    ``states`` are the point embeddings of the states (default: 0..k-1 on
    the line).
    """
    P = np.asarray(matrix, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(P < 0) or np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-9:
        raise ValueError("matrix must be row-stochastic")
    if states is None:
        states = np.arange(P.shape[0], dtype=np.float64)[:, None]
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    if states.shape[0] != P.shape[0]:
        raise ValueError("states and matrix sizes differ")
    cum = np.cumsum(P, axis=1)

    def state_index(x):
        return int(np.argmin(np.max(np.abs(states - np.atleast_1d(x)), axis=1)))

    def step(x, rng):
        i = state_index(x)
        j = int(np.searchsorted(cum[i], rng.random()))
        return states[min(j, states.shape[0] - 1)]

    return MarkovKernel(
        "finite_chain", step, dim=states.shape[1],
        params={"matrix": P, "states": states, "cum": cum},
    )


KERNEL_BUILDERS = {
    "ar1": ar1_kernel,
    "reflected_rw": reflected_rw_kernel,
    "finite_chain": finite_chain_kernel,
}


@dataclass(frozen=True)
class ChainRun:
    """A simulated trajectory and the occupation measure of its tail."""

    path: np.ndarray
    occupation: DiscreteMeasure
    burn_in: int


def _chain_rng(seed, stream) -> np.random.Generator:
    mask = 0xFFFFFFFFFFFFFFFF
    parts = stream if isinstance(stream, (tuple, list)) else (stream,)
    return np.random.default_rng([int(seed) & mask] + [int(s) & mask for s in parts])


def simulate_chain(
    kernel: MarkovKernel,
    x0=None,
    n: int = 1000,
    burn_in: int = 0,
    seed: int = 0,
    stream=0,
) -> ChainRun:
    """Simulate burn_in + n steps from X0 = x0 (default: the origin).

    Deterministic given (seed, stream); the occupation measure is built
    from steps burn_in + 1 .. burn_in + n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    x0 = np.zeros(kernel.dim) if x0 is None else as_point(x0)
    total = burn_in + n
    rng = _chain_rng(seed, stream)
    name = kernel.name
    if name == "ar1":
        noise = kernel.params["noise_sigma"] * rng.standard_normal(total)
        path = _kernels.ar1_path(float(x0[0]), kernel.params["r"], noise)[:, None]
    elif name == "reflected_rw":
        noise = rng.standard_normal(total)
        path = _kernels.reflected_rw_path(float(x0[0]), kernel.params["step_size"], noise)[:, None]
    elif name == "finite_chain":
        states = kernel.params["states"]
        cum = np.ascontiguousarray(kernel.params["cum"])
        i0 = int(np.argmin(np.max(np.abs(states - x0), axis=1)))
        idx = _kernels.finite_chain_path(i0, cum, rng.random(total))
        path = states[idx]
    else:
        path = np.empty((total + 1, kernel.dim))
        path[0] = x0
        x = x0
        for i in range(total):
            x = as_point(kernel.step(x, rng))
            path[i + 1] = x
    tail = path[burn_in + 1:]
    occupation = DiscreteMeasure(tail, np.full(tail.shape[0], 1.0 / n))
    return ChainRun(path=path, occupation=occupation, burn_in=burn_in)


def draw_transition(kernel: MarkovKernel, x, n_mc: int, rng: np.random.Generator) -> np.ndarray:
    """n_mc i.i.d. draws from P(x, .)."""
    x = as_point(x)
    if kernel.name == "ar1":
        p = kernel.params
        return (p["r"] * x[0] + p["noise_sigma"] * rng.standard_normal(n_mc))[:, None]
    if kernel.name == "reflected_rw":
        return np.abs(x[0] + kernel.params["step_size"] * rng.standard_normal(n_mc))[:, None]
    if kernel.name == "finite_chain":
        states = kernel.params["states"]
        cum = kernel.params["cum"]
        i = int(np.argmin(np.max(np.abs(states - x), axis=1)))
        idx = np.searchsorted(cum[i], rng.random(n_mc))
        return states[np.minimum(idx, states.shape[0] - 1)]
    return np.vstack([as_point(kernel.step(x, rng)) for _ in range(n_mc)])


def estimate_contraction(
    kernel: MarkovKernel,
    pairs,
    n_mc: int = 10_000,
    metric: Metric = EUCLIDEAN,
    seed: int = 0,
) -> tuple[float, float]:
    """Empirical contraction coefficient max_pairs W1(P(x,.), P(y,.)) / d(x, y).

    The empirical W1 between equal-size samples of the same law is positive,
    so a same-law baseline (two independent samples of P(x1, .)) is
    subtracted from each pair's distance before dividing.  Returns
    (corrected estimate, baseline).
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("pairs must be nonempty")
    rng = np.random.default_rng([int(seed), 0])
    x_base = as_point(pairs[0][0])
    base_a = DiscreteMeasure.from_raw(
        draw_transition(kernel, x_base, n_mc, rng), np.ones(n_mc)
    )
    base_b = DiscreteMeasure.from_raw(
        draw_transition(kernel, x_base, n_mc, rng), np.ones(n_mc)
    )
    baseline = w1_cost(base_a, base_b, metric)
    best = -math.inf
    for idx, (x, y) in enumerate(pairs):
        x = as_point(x)
        y = as_point(y)
        dxy = metric.dist(x, y)
        if dxy <= 0:
            raise ValueError("pairs must have d(x, y) > 0")
        prng = np.random.default_rng([int(seed), idx + 1])
        emp_x = DiscreteMeasure.from_raw(draw_transition(kernel, x, n_mc, prng), np.ones(n_mc))
        emp_y = DiscreteMeasure.from_raw(draw_transition(kernel, y, n_mc, prng), np.ones(n_mc))
        est = (w1_cost(emp_x, emp_y, metric) - baseline) / dxy
        best = max(best, est)
    return max(best, 0.0), baseline


def invariant_distance_bound(m1: float, r: float, n: int) -> float:
    """W1(pi_n, pi) <= m1 / (n (1 - r))."""
    if not 0.0 <= r < 1.0:
        raise ContractionOutOfRange(f"r must be in [0, 1), got {r}")
    if m1 < 0 or n < 1:
        raise ValueError("need m1 >= 0 and n >= 1")
    return m1 / (n * (1.0 - r))


def markov_rate_a(C: float, m1: float) -> float:
    """Exponential-moment rate a = (2/C)(sqrt(4 m1^2 + C log 2) - 2 m1).

    Closed-form root of 2 m1 a + C a^2 / 4 = log 2, which makes every
    marginal's exponential moment at rate a at most 2.
    """
    if C <= 0 or m1 < 0:
        raise ValueError("need C > 0 and m1 >= 0")
    return 2.0 / C * (math.sqrt(4.0 * m1 * m1 + C * math.log(2.0)) - 2.0 * m1)


def bound_markov(
    C: float,
    r: float,
    m1: float,
    d: int,
    t: float,
    n: int,
    C_d: float | None = None,
) -> BoundReport:
    """Occupation-measure bound K(n,t) exp(-n (1-r)^2 t^2 / (8C)).

    K(n,t) = exp[(m1/sqrt(nC) + C_d ((1/(at)) log(1/(at)))^(d/2))^2] with
    a = markov_rate_a(C, m1); the inner entropy term is clamped at 0 when
    at >= 1 (log nonpositive).  ``C_d`` defaults to 65^(d/2), the square
    root of the R^d covering constant (it multiplies a square root of the
    metric entropy).
    """
    if not 0.0 <= r < 1.0:
        raise ContractionOutOfRange(f"r must be in [0, 1), got {r}")
    if d < 1 or n < 1 or t <= 0:
        raise ValueError("need d >= 1, n >= 1, t > 0")
    a = markov_rate_a(C, m1)
    if t > 2.0 / a:
        raise RegimeViolation(f"t = {t!r} exceeds the regime bound 2/a = {2.0 / a!r}")
    if C_d is None:
        C_d = 65.0 ** (d / 2.0)
    u = 1.0 / (a * t)
    entropy_term = max(u * math.log(u), 0.0)
    bracket = m1 / math.sqrt(n * C) + C_d * entropy_term ** (d / 2.0)
    log_K = bracket * bracket
    exponent = n * (1.0 - r) ** 2 * t * t / (8.0 * C)
    return BoundReport(
        "markov",
        n,
        t,
        log_K - exponent,
        {
            "C": C,
            "r": r,
            "m1": m1,
            "a": a,
            "C_d": C_d,
            "log_K": log_K,
            "exponent": exponent,
        },
    )


def build_reference(
    kernel: MarkovKernel,
    x0=None,
    run_length: int = 1_000_000,
    support: int = 10_000,
    seed: int = 0,
    metric: Metric = EUCLIDEAN,
) -> tuple[DiscreteMeasure, float]:
    """Long-run occupation measure quantized to ``support`` points.

    Returns (reference, split_half_error): the W1 distance between the
    quantized occupation measures of the two run halves, an estimate of the
    reference's own error to be added to deviation thresholds.
    """
    run = simulate_chain(kernel, x0=x0, n=run_length, seed=seed, stream=0)
    tail = run.path[1:]
    half = tail.shape[0] // 2
    full = DiscreteMeasure.from_raw(tail, np.ones(tail.shape[0]))
    ref, _ = quantize(full, support, metric)
    first = DiscreteMeasure.from_raw(tail[:half], np.ones(half))
    second = DiscreteMeasure.from_raw(tail[half:], np.ones(tail.shape[0] - half))
    q1, _ = quantize(first, support, metric)
    q2, _ = quantize(second, support, metric)
    return ref, w1_cost(q1, q2, metric)


def occupation_deviation_mc(
    kernel: MarkovKernel,
    reference: DiscreteMeasure,
    n: int,
    t: float,
    trials: int,
    seed: int = 0,
    x0=None,
    burn_in: int = 0,
    metric: Metric = EUCLIDEAN,
) -> tuple[float, float]:
    """Frequency of W1(occupation, reference) >= t with binomial stderr."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = 0
    for trial in range(trials):
        run = simulate_chain(kernel, x0=x0, n=n, burn_in=burn_in, seed=seed, stream=(n, trial))
        if w1_cost(run.occupation, reference, metric) >= t:
            hits += 1
    freq = hits / trials
    stderr = math.sqrt(freq * (1.0 - freq) / trials)
    return freq, stderr
