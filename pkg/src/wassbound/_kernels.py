"""Hot numeric kernels with numba and pure-numpy twins.

Each kernel exists in two functionally identical versions: a loop-style
implementation compiled with ``numba.njit`` and a vectorized (or plain
Python) numpy fallback.  The active version is chosen at import time by
:mod:`wassbound._accel`; ``KERNEL_IMPLS`` keeps both for benchmarking and
twin testing.
"""

import numpy as np

from ._accel import USE_NUMBA, compile_kernel

_INF64 = np.int64(2**62)

# status codes for the flow solver
MCF_OK = 0
MCF_INFEASIBLE = 1
MCF_STALLED = 2


# ---------------------------------------------------------------------------
# minimum-cost transportation: successive shortest paths with potentials
# ---------------------------------------------------------------------------

def _mcf_transport_py(supply, demand, cost):
    """Solve min-cost transport of ``supply`` (m,) onto ``demand`` (n,).

    ``cost`` is an int64 (m, n) matrix (pre-scaled distances).  Returns
    ``(flow, pot, status)`` where ``flow`` is the (m, n) optimal plan,
    ``pot`` the final node potentials (sources then sinks, int64) and
    ``status`` one of the MCF_* codes.  Dense Dijkstra with Johnson
    potentials; each augmentation saturates a source, a sink or a
    backward arc.
    """
    m = supply.shape[0]
    n = demand.shape[0]
    nn = m + n
    flow = np.zeros((m, n), dtype=np.float64)
    rem_a = supply.copy()
    rem_b = demand.copy()
    pot = np.zeros(nn, dtype=np.int64)
    dist = np.empty(nn, dtype=np.int64)
    prev = np.empty(nn, dtype=np.int64)
    done = np.empty(nn, dtype=np.bool_)

    max_rounds = 4 * nn * nn + 16
    rounds = 0
    while True:
        total_remaining = 0.0
        for j in range(n):
            total_remaining += rem_b[j]
        if total_remaining <= 1e-14:
            return flow, pot, MCF_OK
        rounds += 1
        if rounds > max_rounds:
            return flow, pot, MCF_STALLED

        for x in range(nn):
            dist[x] = _INF64
            prev[x] = -1
            done[x] = False
        for i in range(m):
            if rem_a[i] > 0.0:
                dist[i] = 0
        while True:
            best = -1
            bd = _INF64
            for x in range(nn):
                if not done[x] and dist[x] < bd:
                    bd = dist[x]
                    best = x
            if best < 0:
                break
            done[best] = True
            if best < m:
                i = best
                base = dist[i] + pot[i]
                for j in range(n):
                    nd = base + cost[i, j] - pot[m + j]
                    if nd < dist[m + j]:
                        dist[m + j] = nd
                        prev[m + j] = i
            else:
                j = best - m
                base = dist[best] + pot[best]
                for i in range(m):
                    if flow[i, j] > 0.0:
                        nd = base - cost[i, j] - pot[i]
                        if nd < dist[i]:
                            dist[i] = nd
                            prev[i] = m + j

        t = -1
        td = _INF64
        for j in range(n):
            if rem_b[j] > 0.0 and dist[m + j] < td:
                td = dist[m + j]
                t = m + j
        if t < 0:
            return flow, pot, MCF_INFEASIBLE

        for x in range(nn):
            d = dist[x] if dist[x] < td else td
            pot[x] += d

        delta = rem_b[t - m]
        x = t
        while prev[x] >= 0:
            p = prev[x]
            if p >= m and x < m:
                f = flow[x, p - m]
                if f < delta:
                    delta = f
            x = p
        if rem_a[x] < delta:
            delta = rem_a[x]

        y = t
        while prev[y] >= 0:
            p = prev[y]
            if p < m:
                flow[p, y - m] += delta
            else:
                flow[y, p - m] -= delta
            y = p
        rem_a[y] -= delta
        rem_b[t - m] -= delta


# ---------------------------------------------------------------------------
# 1-D Wasserstein between sorted weighted atoms: |F_mu - F_nu| integral
# ---------------------------------------------------------------------------

def _w1_1d_sorted_py(xu, wu, xv, wv):
    """Exact integral of |F_u - F_v| for sorted atom arrays."""
    nu = xu.shape[0]
    nv = xv.shape[0]
    iu = 0
    iv = 0
    fu = 0.0
    fv = 0.0
    total = 0.0
    prev = 0.0
    first = True
    while iu < nu or iv < nv:
        if iv >= nv or (iu < nu and xu[iu] <= xv[iv]):
            x = xu[iu]
        else:
            x = xv[iv]
        if not first:
            total += abs(fu - fv) * (x - prev)
        while iu < nu and xu[iu] == x:
            fu += wu[iu]
            iu += 1
        while iv < nv and xv[iv] == x:
            fv += wv[iv]
            iv += 1
        prev = x
        first = False
    return total


def _w1_1d_sorted_numpy(xu, wu, xv, wv):
    events = np.concatenate((xu, xv))
    events.sort(kind="mergesort")
    deltas = np.diff(events)
    cu = np.concatenate((np.zeros(1), np.cumsum(wu)))
    cv = np.concatenate((np.zeros(1), np.cumsum(wv)))
    fu = cu[np.searchsorted(xu, events[:-1], side="right")]
    fv = cv[np.searchsorted(xv, events[:-1], side="right")]
    return float(np.sum(np.abs(fu - fv) * deltas))


# ---------------------------------------------------------------------------
# discrete Holder seminorm: sup over grid pairs
# ---------------------------------------------------------------------------

def _holder_sup_py(vals, alpha, dt):
    m = vals.shape[0]
    best = 0.0
    for gap in range(1, m):
        denom = (gap * dt) ** alpha
        for i in range(m - gap):
            r = abs(vals[i + gap] - vals[i]) / denom
            if r > best:
                best = r
    return best


def _holder_sup_numpy(vals, alpha, dt):
    m = vals.shape[0]
    best = 0.0
    for gap in range(1, m):
        d = float(np.max(np.abs(vals[gap:] - vals[:-gap])))
        r = d / (gap * dt) ** alpha
        if r > best:
            best = r
    return best


# ---------------------------------------------------------------------------
# Markov chain trajectories
# ---------------------------------------------------------------------------

def _ar1_path_py(x0, r, noise):
    out = np.empty(noise.shape[0] + 1, dtype=np.float64)
    out[0] = x0
    x = x0
    for i in range(noise.shape[0]):
        x = r * x + noise[i]
        out[i + 1] = x
    return out


def _ar1_path_numpy(x0, r, noise):
    from scipy.signal import lfilter, lfiltic

    zi = lfiltic([1.0], [1.0, -r], y=[x0])
    y, _ = lfilter([1.0], [1.0, -r], noise, zi=zi)
    return np.concatenate(([x0], y))


def _reflected_rw_path_py(x0, step, noise):
    out = np.empty(noise.shape[0] + 1, dtype=np.float64)
    out[0] = x0
    x = x0
    for i in range(noise.shape[0]):
        x = abs(x + step * noise[i])
        out[i + 1] = x
    return out


def _finite_chain_path_py(idx0, cum_rows, uniforms):
    out = np.empty(uniforms.shape[0] + 1, dtype=np.int64)
    out[0] = idx0
    s = idx0
    for i in range(uniforms.shape[0]):
        j = np.searchsorted(cum_rows[s], uniforms[i])
        if j >= cum_rows.shape[1]:
            j = cum_rows.shape[1] - 1
        s = j
        out[i + 1] = s
    return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_NUMBA_VERSIONS = {}
if USE_NUMBA:
    _NUMBA_VERSIONS = {
        "mcf_transport": compile_kernel(_mcf_transport_py),
        "w1_1d_sorted": compile_kernel(_w1_1d_sorted_py),
        "holder_sup": compile_kernel(_holder_sup_py),
        "ar1_path": compile_kernel(_ar1_path_py),
        "reflected_rw_path": compile_kernel(_reflected_rw_path_py),
        "finite_chain_path": compile_kernel(_finite_chain_path_py),
    }

_NUMPY_VERSIONS = {
    "mcf_transport": _mcf_transport_py,
    "w1_1d_sorted": _w1_1d_sorted_numpy,
    "holder_sup": _holder_sup_numpy,
    "ar1_path": _ar1_path_numpy,
    "reflected_rw_path": _reflected_rw_path_py,
    "finite_chain_path": _finite_chain_path_py,
}

#: both implementation families, keyed by kernel name then {"numba", "numpy"}
KERNEL_IMPLS = {
    name: {"numpy": fn, "numba": _NUMBA_VERSIONS.get(name)}
    for name, fn in _NUMPY_VERSIONS.items()
}

if USE_NUMBA:
    mcf_transport = _NUMBA_VERSIONS["mcf_transport"]
    w1_1d_sorted = _NUMBA_VERSIONS["w1_1d_sorted"]
    holder_sup = _NUMBA_VERSIONS["holder_sup"]
    ar1_path = _NUMBA_VERSIONS["ar1_path"]
    reflected_rw_path = _NUMBA_VERSIONS["reflected_rw_path"]
    finite_chain_path = _NUMBA_VERSIONS["finite_chain_path"]
else:
    mcf_transport = _mcf_transport_py
    w1_1d_sorted = _w1_1d_sorted_numpy
    holder_sup = _holder_sup_numpy
    ar1_path = _ar1_path_numpy
    reflected_rw_path = _reflected_rw_path_py
    finite_chain_path = _finite_chain_path_py
