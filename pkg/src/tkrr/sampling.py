"""Seeded sampling from the covariate and noise laws, plus densities.

Every draw is keyed by an :class:`RngSeed` ``(master, stream)`` pair mapped
onto numpy's ``SeedSequence`` spawn tree, so streams with distinct keys are
independent and equal keys reproduce bit-identical samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .kernels import as_points

# noise streams live above every realization index
NOISE_STREAM_OFFSET = 2 ** 32

_TRUNC_MASS = math.erf(1.0 / math.sqrt(2.0))  # Phi(1) - Phi(-1)


@dataclass(frozen=True)
class RngSeed:
    master: int
    stream: int = 0

    def __post_init__(self):
        for name in ("master", "stream"):
            v = getattr(self, name)
            if int(v) != v or v < 0 or v >= 2 ** 64:
                raise ValueError(f"seed {name} must be an unsigned 64-bit integer, got {v}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.master), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class UniformCube:
    """Uniform probability on ``[-1, 1]^d``."""

    d: int = 1

    @property
    def dim(self) -> int:
        return int(self.d)

    @property
    def support(self):
        return (-1.0, 1.0)


@dataclass(frozen=True)
class TruncatedStdNormal:
    """Standard normal conditioned on ``[-1, 1]``."""

    @property
    def dim(self) -> int:
        return 1

    @property
    def support(self):
        return (-1.0, 1.0)


@dataclass(frozen=True)
class GaussianMeasure:
    """Probability density ``sqrt(2c/pi) exp(-2 c x^2)`` on the real line."""

    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"GaussianMeasure scale must be positive, got {self.c}")

    @property
    def dim(self) -> int:
        return 1

    @property
    def support(self):
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class Normal:
    """Centred normal with standard deviation ``scale``; used for noise."""

    scale: float = 1.0

    @property
    def dim(self) -> int:
        return 1

    @property
    def support(self):
        return (-math.inf, math.inf)


MeasureSpec = Union[UniformCube, TruncatedStdNormal, GaussianMeasure, Normal]


def _truncated_normal(rng, n):
    out = np.empty(n)
    filled = 0
    while filled < n:
        # oversample by the inverse acceptance rate to keep the loop short
        z = rng.standard_normal(int((n - filled) / _TRUNC_MASS) + 16)
        z = z[np.abs(z) <= 1.0]
        take = min(z.size, n - filled)
        out[filled:filled + take] = z[:take]
        filled += take
    return out


def draw(measure: MeasureSpec, n: int, seed: RngSeed) -> np.ndarray:
    """Draw ``n`` i.i.d. points, returned with shape ``(n, d)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = seed.generator()
    if isinstance(measure, UniformCube):
        return rng.uniform(-1.0, 1.0, size=(n, measure.dim))
    if isinstance(measure, TruncatedStdNormal):
        x = _truncated_normal(rng, n)
    elif isinstance(measure, GaussianMeasure):
        x = rng.normal(0.0, 1.0 / (2.0 * math.sqrt(measure.c)), size=n)
    elif isinstance(measure, Normal):
        x = measure.scale * rng.standard_normal(n)
    else:
        raise TypeError(f"unsupported measure {measure!r}")
    return x.reshape(n, 1)


def _phi(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def density(measure: MeasureSpec, x) -> np.ndarray | float:
    """Density at one point (returns float) or at a batch (returns array)."""
    arr = np.asarray(x, dtype=np.float64)
    if measure.dim == 1:
        scalar = arr.ndim == 0
        pts = as_points(arr.reshape(-1), 1)
    else:
        scalar = arr.ndim == 1
        pts = as_points(arr, measure.dim)
    if isinstance(measure, UniformCube):
        inside = np.all(np.abs(pts) <= 1.0, axis=1)
        out = np.where(inside, 2.0 ** (-measure.dim), 0.0)
    else:
        t = pts[:, 0]
        if isinstance(measure, TruncatedStdNormal):
            out = np.where(np.abs(t) <= 1.0, _phi(t) / _TRUNC_MASS, 0.0)
        elif isinstance(measure, GaussianMeasure):
            out = math.sqrt(2.0 * measure.c / math.pi) * np.exp(-2.0 * measure.c * t * t)
        elif isinstance(measure, Normal):
            out = _phi(t / measure.scale) / measure.scale
        else:
            raise TypeError(f"unsupported measure {measure!r}")
    return float(out[0]) if scalar else out


def density_ratio_bound(rho: MeasureSpec, p: MeasureSpec, grid_size: int = 1001) -> float:
    """Max of ``rho(x) / p(x)`` over a uniform grid on the support of ``rho``.

    A finite value is numerical evidence that ``rho`` has a bounded
    Radon-Nikodym derivative with respect to ``p``. Unbounded supports are
    scanned over eight standard deviations.
    """
    if rho.dim != 1 or p.dim != 1:
        raise ValueError("density_ratio_bound needs univariate measures")
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    lo, hi = rho.support
    if not math.isfinite(lo):
        sd = 1.0 / (2.0 * math.sqrt(rho.c)) if isinstance(rho, GaussianMeasure) else rho.scale
        lo, hi = -8.0 * sd, 8.0 * sd
    grid = np.linspace(lo, hi, grid_size)
    num = density(rho, grid)
    den = density(p, grid)
    bad = (den <= 0.0) & (num > 0.0)
    if np.any(bad):
        raise ValueError(
            f"reference density vanishes at x={grid[bad][0]:.6g} where the sampling density does not"
        )
    ok = num > 0.0
    return float(np.max(num[ok] / den[ok])) if np.any(ok) else 0.0
