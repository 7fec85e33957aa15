"""Mercer kernels: Sinc, Gaussian and their d-fold tensor products.

Points are numpy arrays. A batch of ``n`` points in dimension ``d`` has
shape ``(n, d)``; univariate batches may also be passed as 1-D arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _accel


@dataclass(frozen=True)
class Sinc:
    """``sin(c (x - y)) / (pi (x - y))`` with bandwidth ``c``."""

    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"Sinc bandwidth must be positive, got {self.c}")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class Gaussian:
    """``exp(-xi (x - y)^2)`` with shape ``xi``."""

    xi: float

    def __post_init__(self):
        if not (math.isfinite(self.xi) and self.xi > 0):
            raise ValueError(f"Gaussian shape must be positive, got {self.xi}")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class TensorProduct:
    """Product of a univariate kernel over ``d`` coordinates."""

    base: Union[Sinc, Gaussian]
    d: int

    def __post_init__(self):
        if not isinstance(self.base, (Sinc, Gaussian)):
            raise ValueError("TensorProduct base must be a univariate Sinc or Gaussian kernel")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"TensorProduct dimension must be a positive integer, got {self.d}")

    @property
    def dim(self) -> int:
        return int(self.d)


KernelSpec = Union[Sinc, Gaussian, TensorProduct]


def as_points(x, d: int) -> np.ndarray:
    """Coerce ``x`` to a float array of shape ``(n, d)``, checking dimension."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1) if d == 1 else a.reshape(1, -1)
    if a.ndim != 2 or a.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got array of shape {np.shape(x)}")
    if not np.all(np.isfinite(a)):
        raise ValueError("point coordinates must be finite")
    return a


def _univariate_matrix(kernel, x, y):
    if isinstance(kernel, Sinc):
        return _accel.sinc_matrix(x, y, kernel.c)
    return _accel.gaussian_matrix(x, y, kernel.xi)


def kernel_matrix(kernel: KernelSpec, x, y) -> np.ndarray:
    """Dense matrix ``[K(x_i, y_j)]`` for two point batches."""
    d = kernel.dim
    xp, yp = as_points(x, d), as_points(y, d)
    base = kernel.base if isinstance(kernel, TensorProduct) else kernel
    out = _univariate_matrix(base, xp[:, 0], yp[:, 0])
    for k in range(1, d):
        out = out * _univariate_matrix(base, xp[:, k], yp[:, k])
    return out


def eval_kernel(kernel: KernelSpec, x, y) -> float:
    """Evaluate the kernel at a single pair of points."""
    d = kernel.dim
    xp, yp = as_points(x, d), as_points(y, d)
    if xp.shape[0] != 1 or yp.shape[0] != 1:
        raise ValueError("eval_kernel takes single points; use kernel_matrix for batches")
    return float(kernel_matrix(kernel, xp, yp)[0, 0])


def kernel_diag(kernel: KernelSpec, x) -> np.ndarray:
    """``K(x_i, x_i)`` for each point of a batch."""
    xp = as_points(x, kernel.dim)
    return np.full(xp.shape[0], kappa1(kernel))


def kappa1(kernel: KernelSpec) -> float:
    """Supremum of the kernel diagonal."""
    if isinstance(kernel, Sinc):
        return kernel.c / math.pi
    if isinstance(kernel, Gaussian):
        return 1.0
    return kappa1(kernel.base) ** kernel.d
