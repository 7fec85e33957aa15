"""Spectrum-driven choice of the truncation order N and ridge parameter lam.

All big-O constants in the selection rules and rate bounds are set to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericalError
from .spectral import (
    EigenvalueTable,
    ExponentialDecay,
    PolynomialDecay,
    SpectralModel,
    degrees_of_freedom,
    gaussian_eigenvalue,
)

MAX_FIXED_POINT_STEPS = 100


@dataclass(frozen=True)
class SelectionResult:
    n_trunc: int
    lam: float
    rule: str
    inputs: dict = field(default_factory=dict)
    fixed_point_eps: Optional[float] = None

    def __post_init__(self):
        if self.n_trunc < 1 or not self.lam > 0:
            raise ValueError(f"invalid selection N={self.n_trunc}, lam={self.lam}")


@dataclass(frozen=True)
class RiskReport:
    per_realization: np.ndarray
    theoretical: float
    config: dict = field(default_factory=dict)

    @property
    def empirical(self) -> float:
        return float(np.mean(self.per_realization))

    @property
    def empirical_std(self) -> float:
        r = self.per_realization
        return float(np.std(r, ddof=1)) if r.size > 1 else 0.0


def _check_snr(n, sigma2):
    if n < 1 or sigma2 <= 0:
        raise ValueError("need n >= 1 and sigma2 > 0")
    if n / sigma2 <= 1:
        raise ValueError("rules need n / sigma2 > 1")


def _exponential_lam(b, n_b, n, sigma2):
    return sigma2 * min(n_b / n, math.log(n / sigma2) / (b * n))


def select_exponential(b: float, n_b: int, n: int, sigma2: float) -> SelectionResult:
    """Exponential-decay rule: ``N = max(N_b, ceil(log(n/s2)/b))``,
    ``lam = s2 min(N_b/n, log(n/s2)/(b n))``."""
    _check_snr(n, sigma2)
    if b <= 0 or n_b < 1:
        raise ValueError("need b > 0 and n_b >= 1")
    n_trunc = max(int(n_b), math.ceil(math.log(n / sigma2) / b))
    return SelectionResult(
        n_trunc=n_trunc,
        lam=_exponential_lam(b, n_b, n, sigma2),
        rule="exponential",
        inputs={"n": n, "sigma2": sigma2, "b": b, "n_b": n_b},
    )


def select_polynomial(s: float, n_s: int, a: float, n: int, sigma2: float) -> SelectionResult:
    """Polynomial-decay rule with ``gamma = min(1, 2 - a)``."""
    _check_snr(n, sigma2)
    if a < 0 or s <= a / 2:
        raise ValueError("need s > a/2 >= 0")
    gamma = min(1.0, 2.0 - a)
    p = 2.0 * s + gamma
    if p <= 0:
        raise ValueError(f"invalid exponents: 2s + gamma = {p} <= 0")
    n_trunc = max(int(n_s), math.ceil((n / sigma2) ** (1.0 / p)))
    lam = min(n_s / n, (sigma2 / n) ** (1.0 - 1.0 / p))
    return SelectionResult(
        n_trunc=n_trunc,
        lam=lam,
        rule="polynomial",
        inputs={"n": n, "sigma2": sigma2, "s": s, "n_s": n_s, "a": a, "gamma": gamma},
    )


def _sinc_order(c, eps):
    w = 2.0 * c / math.pi
    return w + (math.log(1.0 / eps) / math.pi ** 2 + 1.0) * math.log(w)


def refined_truncation_sinc(c: float, n: int, sigma2: float) -> SelectionResult:
    """Refined Sinc truncation order from the Landau degrees-of-freedom count.

    Solves ``eps = (s2/n) * order(eps)`` by fixed-point iteration starting
    at ``(s2/n) 2c/pi``, then takes ``N = ceil(order(eps))``. The ridge
    parameter follows the exponential rule (``b = 2``) with ``N`` in place
    of ``N_b``.
    """
    if c < 1:
        raise ValueError("refined Sinc rule needs c >= 1")
    _check_snr(n, sigma2)
    scale = sigma2 / n
    eps = scale * 2.0 * c / math.pi
    for _ in range(MAX_FIXED_POINT_STEPS):
        nxt = scale * _sinc_order(c, eps)
        if not 0.0 < nxt < 1.0:
            # possible when 2c/pi < 1 makes the log factor negative
            raise NumericalError(f"Sinc truncation iterate left (0, 1): eps = {nxt:.3e}")
        if abs(nxt - eps) <= 1e-12 * abs(nxt):
            eps = nxt
            break
        eps = nxt
    else:
        raise NumericalError("Sinc truncation fixed point did not converge in 100 steps")
    n_trunc = math.ceil(_sinc_order(c, eps))
    return SelectionResult(
        n_trunc=n_trunc,
        lam=_exponential_lam(2.0, n_trunc, n, sigma2),
        rule="refined_fixed_point",
        inputs={"n": n, "sigma2": sigma2, "c": c},
        fixed_point_eps=eps,
    )


def refined_truncation_general(table: EigenvalueTable, a: float, n: int,
                               sigma2: float) -> SelectionResult:
    """Refined order ``N = d_inf(eps)`` with ``eps = (s2/n) d_inf(eps)^(1 - eta)``.

    ``eta = max(0, a - 1)``. Iterates on ``eps`` and stops once ``N`` is
    unchanged for two consecutive steps.
    """
    _check_snr(n, sigma2)
    if a < 0:
        raise ValueError("a must be nonnegative")
    power = 1.0 - max(0.0, a - 1.0)
    scale = sigma2 / n
    eps = scale
    history = [degrees_of_freedom(table, eps)]
    for _ in range(MAX_FIXED_POINT_STEPS):
        eps = scale * history[-1] ** power
        history.append(degrees_of_freedom(table, eps))
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            break
    else:
        raise NumericalError(
            f"refined truncation oscillates between N={history[-1]} and N={history[-2]}"
        )
    n_trunc = history[-1]
    return SelectionResult(
        n_trunc=n_trunc,
        lam=scale * n_trunc ** power,
        rule="refined_fixed_point",
        inputs={"n": n, "sigma2": sigma2, "a": a},
        fixed_point_eps=eps,
    )


def empirical_risk(predictions, truth) -> float:
    """``(1/n) sum (pred_i - truth_i)^2``."""
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    t = np.asarray(truth, dtype=np.float64).reshape(-1)
    if p.size != t.size or p.size == 0:
        raise ValueError("predictions and truth must have the same nonzero length")
    return float(np.mean((p - t) ** 2))


def _weighted_tail(spectrum: SpectralModel, start: int, max_terms: int = 100_000) -> float:
    decay = spectrum.decay
    if isinstance(decay, PolynomialDecay) and 2.0 * decay.s - spectrum.a <= 1.0:
        raise ValueError("tail sum diverges: polynomial decay needs 2s - a > 1")
    total = 0.0
    for k in range(start, start + max_terms):
        term = spectrum.eigenvalue(k) * k ** spectrum.a
        total += term
        if term <= 1e-16 * total or (term == 0.0 and k > start):
            return total
    if isinstance(decay, ExponentialDecay):
        return total
    raise NumericalError("eigenvalue tail did not converge")


def risk_bound_tkrr(lam: float, n: int, sigma2: float, singvals: EigenvalueTable,
                    spectrum: SpectralModel, rkhs_norm2: float, n_trunc: int,
                    c1: float = 1.0) -> float:
    """Upper bound on the expected empirical risk of the TKRR estimator.

    ``lam/2 + (2 s2/n) sum_j (mu_j^2/(mu_j^2+lam))^2
    + c1 (lambda_{N+1} ||f||_H^2 + (1/N) sum_{k>N} lambda_k k^a)``.
    """
    mu = singvals.values
    if mu.size != n_trunc:
        raise ValueError(f"expected {n_trunc} singular values, got {mu.size}")
    filt = mu * mu / (mu * mu + lam)
    noise = 2.0 * sigma2 / n * float(np.sum(filt * filt))
    tail = _weighted_tail(spectrum, n_trunc + 1)
    bias = c1 * (spectrum.eigenvalue(n_trunc + 1) * rkhs_norm2 + tail / n_trunc)
    return lam / 2.0 + noise + bias


_RATE_PARAMS = {
    "sinc": ("sigma2", "n", "c"),
    "exponential": ("sigma2", "n", "b", "n_b"),
    "polynomial": ("sigma2", "n", "s", "gamma", "n_s"),
    "gaussian_table": ("sigma2", "n", "lam", "n_b", "lam_n"),
}


def rate_bound(kind: str, **params) -> float:
    """Convergence-rate value for a decay family, constants set to 1.

    ``gaussian_table`` is ``lam/2 + 2 s2 N_b/n + lambda_N``; if ``lam_n`` is
    omitted but ``xi`` and ``c`` are given, ``lambda_{N_b}`` comes from the
    Gaussian closed form.
    """
    if kind not in _RATE_PARAMS:
        raise ValueError(f"unknown rate kind {kind!r}")
    if kind == "gaussian_table" and "lam_n" not in params and {"xi", "c"} <= params.keys():
        params["lam_n"] = gaussian_eigenvalue(params["xi"], params["c"], int(params["n_b"]))
    missing = [p for p in _RATE_PARAMS[kind] if p not in params]
    if missing:
        raise ValueError(f"rate_bound({kind!r}) missing parameters: {', '.join(missing)}")
    s2, n = params["sigma2"], params["n"]
    if kind == "sinc":
        return s2 * max(math.e * params["c"] / (2 * n), math.log(n / s2) / (2 * n))
    if kind == "exponential":
        return s2 * max(params["n_b"] / n, math.log(n / s2) / (params["b"] * n))
    if kind == "polynomial":
        p = 2 * params["s"] + params["gamma"]
        return max(s2 * params["n_s"] / n, (n / s2) ** (-(p - 1) / p))
    return params["lam"] / 2 + 2 * s2 * params["n_b"] / n + params["lam_n"]
