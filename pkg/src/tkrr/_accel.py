"""Elementwise kernel-matrix loops, compiled with numba when available.

Set ``TKRR_DISABLE_NUMBA=1`` in the environment to force the pure-numpy
path. Both paths are always importable so they can be compared directly
(see ``benchmarks/bench_backends.py``).
"""

import math
import os

import numpy as np

# |x - y| below which the Sinc kernel returns its diagonal value exactly
SINC_DIAG_EPS = 1e-12
# |c (x - y)| below which the Sinc kernel switches to its Taylor expansion
SINC_TAYLOR_EPS = 1e-4

_disabled = os.environ.get("TKRR_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    import numba as nb
except ImportError:  # pragma: no cover - exercised only without numba
    nb = None

HAVE_NUMBA = nb is not None
if HAVE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # omp tolerates concurrent callers (the harness runs realizations on threads)
    nb.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]
BACKEND = "numba" if HAVE_NUMBA and not _disabled else "numpy"


def sinc_matrix_numpy(x, y, c):
    h = x[:, None] - y[None, :]
    ch = c * h
    diag = c / math.pi
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sin(ch) / (math.pi * h)
    small = np.abs(ch) < SINC_TAYLOR_EPS
    out = np.where(small, diag * (1.0 - ch * ch / 6.0), out)
    return np.where(np.abs(h) < SINC_DIAG_EPS, diag, out)


def gaussian_matrix_numpy(x, y, xi):
    h = x[:, None] - y[None, :]
    return np.exp(-xi * h * h)


if HAVE_NUMBA:

    @nb.njit(parallel=True, cache=False)
    def _sinc_matrix_jit(x, y, c):
        nx, ny = x.shape[0], y.shape[0]
        out = np.empty((nx, ny))
        diag = c / math.pi
        for i in nb.prange(nx):
            for j in range(ny):
                h = x[i] - y[j]
                ch = c * h
                if abs(h) < SINC_DIAG_EPS:
                    out[i, j] = diag
                elif abs(ch) < SINC_TAYLOR_EPS:
                    out[i, j] = diag * (1.0 - ch * ch / 6.0)
                else:
                    out[i, j] = math.sin(ch) / (math.pi * h)
        return out

    @nb.njit(parallel=True, cache=False)
    def _gaussian_matrix_jit(x, y, xi):
        nx, ny = x.shape[0], y.shape[0]
        out = np.empty((nx, ny))
        for i in nb.prange(nx):
            for j in range(ny):
                h = x[i] - y[j]
                out[i, j] = math.exp(-xi * h * h)
        return out

    def sinc_matrix_numba(x, y, c):
        return _sinc_matrix_jit(np.ascontiguousarray(x, dtype=np.float64),
                                np.ascontiguousarray(y, dtype=np.float64), float(c))

    def gaussian_matrix_numba(x, y, xi):
        return _gaussian_matrix_jit(np.ascontiguousarray(x, dtype=np.float64),
                                    np.ascontiguousarray(y, dtype=np.float64), float(xi))

else:  # pragma: no cover
    sinc_matrix_numba = None
    gaussian_matrix_numba = None


if BACKEND == "numba":
    sinc_matrix = sinc_matrix_numba
    gaussian_matrix = gaussian_matrix_numba
else:
    sinc_matrix = sinc_matrix_numpy
    gaussian_matrix = gaussian_matrix_numpy
