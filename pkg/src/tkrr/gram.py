"""Random Gram matrices ``B_n = (1/n) [K(X_i, X_j)]`` and their truncations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh, svdvals

from .errors import InvariantViolation, NumericalError
from .kernels import KernelSpec, as_points, kappa1, kernel_matrix
from .spectral import EigenvalueTable

# relative (to kappa_1) size of negative eigenvalues treated as roundoff
CLAMP_RTOL = 1e-10


@dataclass(frozen=True)
class GramFull:
    entries: np.ndarray
    samples: np.ndarray
    kappa1: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))


@dataclass(frozen=True)
class GramTruncated:
    entries: np.ndarray
    samples: np.ndarray
    kappa1: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def n_trunc(self) -> int:
        return self.entries.shape[1]


def build_full(kernel: KernelSpec, samples) -> GramFull:
    x = as_points(samples, kernel.dim)
    n = x.shape[0]
    if n == 0:
        raise ValueError("need at least one sample")
    k = kernel_matrix(kernel, x, x)
    # exact symmetry: keep the upper triangle and mirror it
    k = np.triu(k) + np.triu(k, 1).T
    return GramFull(entries=k / n, samples=x, kappa1=kappa1(kernel))


def build_truncated(kernel: KernelSpec, samples, n_trunc: int) -> GramTruncated:
    """First ``n_trunc`` columns of the full Gram matrix (sampling order)."""
    x = as_points(samples, kernel.dim)
    n = x.shape[0]
    if not 1 <= n_trunc <= n:
        raise ValueError(f"truncation order must lie in [1, {n}], got {n_trunc}")
    k = kernel_matrix(kernel, x, x[:n_trunc])
    # match build_full bit for bit on the leading block
    head = k[:n_trunc]
    k[:n_trunc] = np.triu(head) + np.triu(head, 1).T
    return GramTruncated(entries=k / n, samples=x, kappa1=kappa1(kernel))


def _clamp(vals, scale, what):
    tol = CLAMP_RTOL * scale
    if vals.size and vals.min() < -tol:
        raise InvariantViolation(f"{what} has eigenvalue {vals.min():.3e} below -{tol:.1e}")
    return np.clip(vals, 0.0, None)


def eigvals_desc(g: GramFull) -> EigenvalueTable:
    if not np.all(np.isfinite(g.entries)):
        raise NumericalError("Gram matrix has non-finite entries")
    vals = eigvalsh(g.entries)[::-1]
    return EigenvalueTable(_clamp(vals, g.kappa1, "Gram matrix"), source="gram")


def singvals_desc(a: GramTruncated) -> EigenvalueTable:
    """Singular values of the truncated Gram matrix, descending.

    Computed by a direct SVD rather than through ``A^T A``: squaring loses
    half the digits of the small singular values, which would swamp the
    interlacing tolerance.
    """
    if not np.all(np.isfinite(a.entries)):
        raise NumericalError("Gram matrix has non-finite entries")
    vals = svdvals(a.entries)
    return EigenvalueTable(np.minimum.accumulate(vals), source="gram-sv")


def trace_tail(table: EigenvalueTable, k: int) -> float:
    """``sum_{j >= k} lambda_j`` with 1-based ``k``; zero when ``k = len + 1``."""
    v = table.values
    if not 1 <= k <= v.size + 1:
        raise ValueError(f"tail index must lie in [1, {v.size + 1}], got {k}")
    return float(np.sum(v[k - 1:]))


def trace_tails(table: EigenvalueTable) -> np.ndarray:
    """All tails at once: entry ``j - 1`` is ``trace_tail(table, j)``."""
    return np.cumsum(table.values[::-1])[::-1]


def statistical_dimension(table: EigenvalueTable, lam: float) -> float:
    if lam <= 0:
        raise ValueError("lam must be positive")
    v = table.values
    return float(np.sum(v / (v + lam)))


def interlacing_holds(mu: EigenvalueTable, lam_full: EigenvalueTable, tol: float = 0.0) -> bool:
    if len(mu) > len(lam_full):
        raise ValueError("sub-matrix has more singular values than the full matrix")
    return bool(np.all(mu.values <= lam_full.values[: len(mu)] + tol))
