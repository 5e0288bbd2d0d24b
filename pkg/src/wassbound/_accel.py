"""Numba on/off switch.

Hot kernels in :mod:`wassbound._kernels` are compiled with ``numba.njit``
when available.  Setting the environment variable ``WASSBOUND_NO_NUMBA=1``
(before import) selects the pure-numpy fallback path instead; the two paths
are compared by ``benchmarks/bench_kernels.py`` and by the kernel twin tests.
"""

import os

_flag = os.environ.get("WASSBOUND_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in {"1", "true", "yes", "numpy"}

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def compile_kernel(py_func):
    """Return the njit-compiled version of ``py_func`` (or None if disabled)."""
    if not USE_NUMBA:
        return None
    return njit(cache=True)(py_func)
