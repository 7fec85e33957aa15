"""Truncated and full kernel ridge regression.

TKRR works with the ``1/n``-scaled truncated Gram matrix ``A_N`` and solves
``(A_N^T A_N + lam I_N) w = A_N^T Y``; predictions are
``sum_j w_j K(X_j, x) / n``. Full KRR uses the unscaled kernel matrix and
solves ``(K + n lam I_n) C = Y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import NumericalError
from .gram import build_truncated
from .kernels import KernelSpec, as_points, kernel_matrix

# relative inflation of the ridge used for the single retry on a failed factorisation
RETRY_JITTER = 1e-12


@dataclass(frozen=True)
class TkrrModel:
    kernel: KernelSpec
    basis_points: np.ndarray
    weights: np.ndarray
    lam: float
    n: int

    @property
    def n_trunc(self) -> int:
        return self.weights.size

    def predict(self, x) -> np.ndarray:
        return predict_tkrr(self, x)


@dataclass(frozen=True)
class KrrModel:
    kernel: KernelSpec
    points: np.ndarray
    coeffs: np.ndarray
    lam: float

    def predict(self, x) -> np.ndarray:
        return predict_krr(self, x)


def _check_response(y, n):
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.size != n:
        raise ValueError(f"response has length {y.size}, expected {n}")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite values")
    return y


def _spd_solve(m, rhs, shift):
    """Cholesky solve of ``(m + shift I) z = rhs`` with one jittered retry."""
    eye = np.eye(m.shape[0])
    try:
        return cho_solve(cho_factor(m + shift * eye), rhs)
    except LinAlgError:
        pass
    bumped = shift + RETRY_JITTER * np.trace(m)
    try:
        return cho_solve(cho_factor(m + bumped * eye), rhs)
    except LinAlgError as exc:
        raise NumericalError(f"system is not positive definite even after ridge {bumped:.3e}") from exc


def tkrr_weights(a: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Weights ``(A^T A + lam I)^{-1} A^T y`` for a given truncated Gram matrix."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    gram = a.T @ a
    rhs = a.T @ y
    w = _spd_solve(gram, rhs, lam)
    resid = np.linalg.norm(gram @ w + lam * w - rhs)
    if not np.isfinite(resid) or resid > 1e-10 * max(np.linalg.norm(rhs), np.finfo(float).tiny):
        # one step of iterative refinement before giving up
        w = w + _spd_solve(gram, rhs - gram @ w - lam * w, lam)
        resid = np.linalg.norm(gram @ w + lam * w - rhs)
        if resid > 1e-10 * np.linalg.norm(rhs):
            raise NumericalError(f"TKRR normal equations solved only to residual {resid:.3e}")
    return w


def fit_tkrr(kernel: KernelSpec, samples, y, n_trunc: int, lam: float) -> TkrrModel:
    x = as_points(samples, kernel.dim)
    n = x.shape[0]
    y = _check_response(y, n)
    a = build_truncated(kernel, x, n_trunc).entries
    w = tkrr_weights(a, y, lam)
    return TkrrModel(kernel=kernel, basis_points=x[:n_trunc].copy(), weights=w, lam=float(lam), n=n)


def predict_tkrr(model: TkrrModel, x) -> np.ndarray:
    pts = as_points(x, model.kernel.dim)
    return kernel_matrix(model.kernel, pts, model.basis_points) @ model.weights / model.n


def fit_krr(kernel: KernelSpec, samples, y, lam: float) -> KrrModel:
    x = as_points(samples, kernel.dim)
    n = x.shape[0]
    y = _check_response(y, n)
    if lam <= 0:
        raise ValueError("lam must be positive")
    k = kernel_matrix(kernel, x, x)
    k = np.triu(k) + np.triu(k, 1).T
    coeffs = _spd_solve(k, y, n * lam)
    return KrrModel(kernel=kernel, points=x.copy(), coeffs=coeffs, lam=float(lam))


def predict_krr(model: KrrModel, x) -> np.ndarray:
    pts = as_points(x, model.kernel.dim)
    return kernel_matrix(model.kernel, pts, model.points) @ model.coeffs


def fit_generalized_ridge(k1, k2, y, lam: float, n: int) -> np.ndarray:
    """Minimiser of ``||K1 w - Y||_n^2 + lam w^T K2 w``: ``(K1^T K1 + n lam K2)^{-1} K1^T Y``."""
    k1 = np.asarray(k1, dtype=np.float64)
    k2 = np.asarray(k2, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if k1.ndim != 2 or k2.shape != (k1.shape[1], k1.shape[1]) or y.size != k1.shape[0]:
        raise ValueError("inconsistent dimensions for generalized ridge")
    if lam <= 0:
        raise ValueError("lam must be positive")
    system = k1.T @ k1 + n * lam * k2
    system = 0.5 * (system + system.T)
    try:
        return cho_solve(cho_factor(system), k1.T @ y)
    except LinAlgError as exc:
        raise NumericalError("generalized ridge system is singular") from exc


def hat_matrix(a: np.ndarray, lam: float) -> np.ndarray:
    """``A (A^T A + lam I)^{-1} A^T``: maps observations to fitted values."""
    return a @ cho_solve(cho_factor(a.T @ a + lam * np.eye(a.shape[1])), a.T)
