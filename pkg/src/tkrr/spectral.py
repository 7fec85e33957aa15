"""Spectra of kernel integral operators.

Closed forms for the Gaussian kernel, bounds and two numerical routes for
the Sinc kernel (a quadrature discretisation and a Legendre-basis
prolate solver accurate far below machine epsilon), degrees of freedom,
and top eigenvalues of tensor-product operators.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh
from scipy.special import eval_legendre, roots_hermite

from .errors import NumericalError
from .kernels import Gaussian, KernelSpec, Sinc, TensorProduct, kernel_matrix
from .sampling import GaussianMeasure, MeasureSpec, TruncatedStdNormal, UniformCube, density

MAX_HERMITE_INDEX = 200


@dataclass(frozen=True)
class EigenvalueTable:
    """Finite descending list of nonnegative eigenvalues.

    ``resolution`` is the magnitude below which the producing method
    cannot distinguish an eigenvalue from zero; such entries are stored as 0.
    """

    values: np.ndarray
    source: str = "closed-form"
    resolution: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if v.size and (np.any(v < 0) or np.any(np.diff(v) > 0) or not np.all(np.isfinite(v))):
            raise ValueError("eigenvalue table must be finite, nonnegative and nonincreasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class ExponentialDecay:
    """``lambda_k <= C exp(-b k)`` for ``k >= n_b``."""

    b: float
    n_b: int
    C: float = 1.0


@dataclass(frozen=True)
class PolynomialDecay:
    """``lambda_k <= C k^(-2s)`` for ``k >= n_s``."""

    s: float
    n_s: int
    C: float = 1.0


Decay = Union[ExponentialDecay, PolynomialDecay]


@dataclass(frozen=True)
class SpectralModel:
    """Eigenvalue generator (1-based) with sup-norm growth exponent ``a``.

    ``||phi_k||_inf`` is assumed to grow like ``k^(a/2)``.
    """

    eigenvalue: Callable[[int], float]
    a: float
    decay: Decay
    name: str = field(default="", compare=False)

    def eigenvalues(self, start: int, stop: int) -> np.ndarray:
        """``lambda_k`` for ``k`` in ``[start, stop)``."""
        return np.array([self.eigenvalue(k) for k in range(start, stop)], dtype=np.float64)

    def table(self, count: int) -> EigenvalueTable:
        return EigenvalueTable(self.eigenvalues(1, count + 1), source=self.name or "closed-form")


# ---------------------------------------------------------------- Gaussian


def _gaussian_parts(xi, c):
    if xi <= 0 or c <= 0:
        raise ValueError("xi and c must be positive")
    gamma = math.sqrt(c * c + 2.0 * c * xi)
    denom = c + xi + gamma
    return gamma, denom, xi / denom


def gaussian_ratio(xi: float, c: float) -> float:
    """Constant ratio ``lambda_{k+1} / lambda_k`` of the Gaussian spectrum."""
    return _gaussian_parts(xi, c)[2]


def gaussian_eigenvalue(xi: float, c: float, k: int, paper_literal: bool = True) -> float:
    """k-th eigenvalue (1-based) of the Gaussian kernel operator under ``dP_c``.

    ``paper_literal=True`` uses the leading constant ``sqrt(pi / (xi + c + gamma))``;
    ``False`` uses ``sqrt(2c / (c + xi + gamma))``, which is what the operator
    has on the normalised measure ``sqrt(2c/pi) exp(-2 c x^2)``. The ratio
    between successive eigenvalues is the same either way.
    """
    if k < 1:
        raise ValueError("eigenvalue index is 1-based")
    _, denom, r = _gaussian_parts(xi, c)
    lead = math.sqrt(math.pi / denom) if paper_literal else math.sqrt(2.0 * c / denom)
    return lead * r ** (k - 1)


def gaussian_decay_b(xi: float, c: float, convention: str = "ratio") -> float:
    """Decay parameter ``b`` for the Gaussian spectrum.

    ``"ratio"`` returns ``(c + xi + gamma) / xi`` (about 4/3 for xi=25, c=1);
    ``"log"`` returns its logarithm, the exponent in ``exp(-b k)``.
    """
    inv = 1.0 / gaussian_ratio(xi, c)
    if convention == "ratio":
        return inv
    if convention == "log":
        return math.log(inv)
    raise ValueError(f"unknown convention {convention!r}")


def hermite_functions(kmax: int, u) -> np.ndarray:
    """Normalised Hermite functions ``psi_0 .. psi_kmax`` at points ``u``.

    Row ``k`` holds ``psi_k(u)``; built by the three-term recurrence, which
    never forms ``H_k`` or ``k!``.
    """
    u = np.asarray(u, dtype=np.float64)
    out = np.empty((kmax + 1,) + u.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * u * u)
    if kmax >= 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for k in range(2, kmax + 1):
        out[k] = u * math.sqrt(2.0 / k) * out[k - 1] - math.sqrt((k - 1) / k) * out[k - 2]
    return out


def gaussian_eigenfunction(xi: float, c: float, k: int, x):
    """k-th (1-based) dilated Hermite eigenfunction at ``x`` (scalar or array)."""
    if k < 1 or k > MAX_HERMITE_INDEX:
        raise ValueError(f"eigenfunction index must lie in [1, {MAX_HERMITE_INDEX}], got {k}")
    gamma = _gaussian_parts(xi, c)[0]
    s = math.sqrt(2.0 * gamma)
    x = np.asarray(x, dtype=np.float64)
    vals = hermite_functions(k - 1, s * x)[k - 1] / s
    return float(vals) if vals.ndim == 0 else vals


def gaussian_model(xi: float, c: float, n_b: int = 1, paper_literal: bool = True,
                   b_convention: str = "ratio") -> SpectralModel:
    """Spectral model of the Gaussian kernel (``a = 0``: Hermite functions are bounded)."""
    decay = ExponentialDecay(b=gaussian_decay_b(xi, c, b_convention), n_b=int(n_b),
                             C=gaussian_eigenvalue(xi, c, 1, paper_literal))
    return SpectralModel(lambda k: gaussian_eigenvalue(xi, c, k, paper_literal), a=0.0,
                         decay=decay, name="gaussian")


# -------------------------------------------------------------------- Sinc


def sinc_bound_threshold(c: float) -> float:
    return math.e * c / 2.0


def sinc_eigenvalue_upper_bound(c: float, m: int) -> float:
    """Non-asymptotic bound ``exp(-(2m+1) log(2(m+1)/(e c)))``, valid for ``m >= e c / 2``."""
    if c <= 0:
        raise ValueError("bandwidth must be positive")
    if m < sinc_bound_threshold(c):
        raise ValueError(f"bound requires m >= e*c/2 = {sinc_bound_threshold(c):.4f}, got m={m}")
    return math.exp(-(2 * m + 1) * math.log(2.0 * (m + 1) / (math.e * c)))


def sinc_dof_estimate(c: float, eps: float) -> float:
    """Landau's asymptotic count ``2c/pi + log((1-eps)/eps) log(2c/pi) / pi^2``."""
    if c < 1:
        raise ValueError("asymptotic estimate needs c >= 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    w = 2.0 * c / math.pi
    return w + math.log((1.0 - eps) / eps) * math.log(w) / math.pi ** 2


def _legendre_tridiagonal(c, parity, size):
    k = np.arange(parity, size, 2, dtype=np.float64)
    diag = k * (k + 1) + c * c * (2 * k * (k + 1) - 1) / ((2 * k + 3) * (2 * k - 1))
    kk = k[:-1]
    off = c * c * (kk + 2) * (kk + 1) / ((2 * kk + 3) * np.sqrt((2 * kk + 1) * (2 * kk + 5)))
    return k, diag, off


def _smallest_coefficient(beta, diag, off, chi):
    # The leading Legendre coefficient of a high-order prolate function is
    # far below the eigenvector's roundoff; rebuild it from the peak entry
    # with the ratio recurrence, which is stable in the decaying direction.
    j = int(np.argmax(np.abs(beta)))
    if j == 0:
        return beta[0]
    ratios = np.empty(j)
    prev = 0.0
    for t in range(j):
        den = (diag[t] - chi) + (off[t - 1] * prev if t > 0 else 0.0)
        prev = -off[t] / den
        ratios[t] = prev
    return beta[j] * np.prod(ratios)


def sinc_eigenvalues(c: float, count: int) -> EigenvalueTable:
    """Eigenvalues of ``f -> int_{-1}^{1} sin(c(x-y))/(pi(x-y)) f(y) dy``.

    Computed from the prolate differential operator in the normalised
    Legendre basis, so every eigenvalue carries full relative accuracy,
    including those far below double-precision epsilon. Uses Lebesgue
    measure on ``[-1, 1]`` (the classical normalisation, eigenvalues in (0, 1)).
    """
    if c <= 0 or count < 1:
        raise ValueError("need c > 0 and count >= 1")
    size = 2 * count + int(2 * c) + 80
    out = np.empty(count)
    for parity in (0, 1):
        k, diag, off = _legendre_tridiagonal(c, parity, size)
        wanted = list(range(parity, count, 2))
        if not wanted:
            continue
        chi, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, len(wanted) - 1))
        ki = k.astype(int)
        norm = np.sqrt(k + 0.5)
        if parity == 0:
            at0 = norm * eval_legendre(ki, 0.0)
        else:
            at0 = norm * k * eval_legendre(ki - 1, 0.0)  # P_k'(0) = k P_{k-1}(0)
        for i, n in enumerate(wanted):
            beta = vecs[:, i]
            lead = _smallest_coefficient(beta, diag, off, chi[i])
            val = float(np.dot(beta, at0))
            if parity == 0:
                mu = math.sqrt(2.0) * lead / val
            else:
                mu = c * math.sqrt(2.0 / 3.0) * lead / val
            out[n] = c / (2.0 * math.pi) * mu * mu
    # pairs of eigenvalues equal to 1 within roundoff may swap order
    return EigenvalueTable(np.minimum.accumulate(out), source="prolate")


def sinc_model(c: float, count: int = 200) -> SpectralModel:
    """Spectral model of the Sinc kernel: ``a = 1``, ``b = 2``, ``N_b = ceil(e c / 2)``."""
    table = sinc_eigenvalues(c, count).values

    def eig(k):
        if k < 1:
            raise ValueError("eigenvalue index is 1-based")
        return float(table[k - 1]) if k <= table.size else sinc_eigenvalue_upper_bound(c, k)

    decay = ExponentialDecay(b=2.0, n_b=math.ceil(sinc_bound_threshold(c)))
    return SpectralModel(eig, a=1.0, decay=decay, name="sinc")


# ---------------------------------------------------------------- Nyström


def quadrature_rule(measure: MeasureSpec, order: int, lebesgue: bool = False):
    """Nodes and weights integrating against ``measure``.

    Compact measures use Gauss-Legendre on ``[-1, 1]`` weighted by the
    density; with ``lebesgue=True`` the raw Legendre weights are returned
    (plain ``dx`` on ``[-1, 1]``). The Gaussian measure uses Gauss-Hermite
    nodes mapped by ``u = x sqrt(2c)``.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    if measure.dim != 1:
        raise ValueError("quadrature is only available for univariate measures")
    if isinstance(measure, (UniformCube, TruncatedStdNormal)):
        t, w = np.polynomial.legendre.leggauss(order)
        if lebesgue:
            if not isinstance(measure, UniformCube):
                raise ValueError("the Lebesgue convention only applies to the uniform measure")
            return t, w
        return t, w * density(measure, t)
    if isinstance(measure, GaussianMeasure):
        if lebesgue:
            raise ValueError("the Lebesgue convention only applies to the uniform measure")
        u, w = roots_hermite(order)
        return u / math.sqrt(2.0 * measure.c), w / math.sqrt(math.pi)
    raise ValueError(f"no quadrature rule for {measure!r}")


def nystrom_eigenvalues(kernel: KernelSpec, measure: MeasureSpec, quad_order: int,
                        count: int, lebesgue: bool = False) -> EigenvalueTable:
    """Top ``count`` eigenvalues of the quadrature-discretised integral operator.

    Eigenvalues smaller than ``quad_order * eps * lambda_max`` are below
    what a dense symmetric eigensolver can resolve and are reported as 0;
    the floor is stored in ``EigenvalueTable.resolution``.
    """
    if isinstance(kernel, TensorProduct) or kernel.dim != 1:
        raise ValueError("Nyström discretisation is only implemented for univariate kernels")
    if not 1 <= count <= quad_order:
        raise ValueError("need 1 <= count <= quad_order")
    t, w = quadrature_rule(measure, quad_order, lebesgue)
    sw = np.sqrt(w)
    m = sw[:, None] * kernel_matrix(kernel, t, t) * sw[None, :]
    m = 0.5 * (m + m.T)
    vals = eigvalsh(m)[::-1]
    if not np.all(np.isfinite(vals)):
        raise NumericalError("non-finite eigenvalues in Nyström matrix")
    floor = quad_order * np.finfo(float).eps * max(abs(vals[0]), abs(vals[-1]))
    if vals[-1] < -floor:
        raise NumericalError(f"Nyström matrix has a negative eigenvalue {vals[-1]:.3e} beyond roundoff")
    vals = np.where(vals < floor, 0.0, vals)[:count]
    return EigenvalueTable(vals, source="nystrom", resolution=float(floor))


# ------------------------------------------------------ derived quantities


def degrees_of_freedom(table: EigenvalueTable, eps: float) -> int:
    """``min{k : lambda_k <= eps}`` (1-based)."""
    v = table.values
    if v.size == 0:
        raise ValueError("empty eigenvalue table")
    above = int(np.count_nonzero(v > eps))
    if above == v.size:
        raise ValueError(f"every tabulated eigenvalue exceeds eps={eps:g}; table too short")
    return above + 1


def tensor_top_eigenvalues(base: EigenvalueTable, d: int, m: int,
                           certify: bool = False) -> EigenvalueTable:
    """``m`` largest ``d``-fold products of ``base`` entries, by best-first search.

    With ``certify=True`` the table is treated as a prefix of an infinite
    spectrum: untabulated eigenvalues are at most ``base[-1]``, and the call
    fails unless no product involving them can exceed the m-th result.
    """
    v = base.values
    if d < 1 or m < 1:
        raise ValueError("need d >= 1 and m >= 1")
    if v.size == 0 or m > v.size ** d:
        raise ValueError(f"base table of length {v.size} has fewer than m={m} products in dimension {d}")

    def prod(idx):
        p = 1.0
        for i in idx:
            p *= v[i]
        return p

    start = (0,) * d
    heap = [(-prod(start), start)]
    seen = {start}
    out = []
    while len(out) < m:
        negval, idx = heapq.heappop(heap)
        out.append(-negval)
        for axis in range(d):
            if idx[axis] + 1 < v.size:
                nxt = idx[:axis] + (idx[axis] + 1,) + idx[axis + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (-prod(nxt), nxt))
    if certify and v[-1] * v[0] ** (d - 1) > out[-1]:
        raise ValueError("base table too short to certify the requested tensor eigenvalues")
    return EigenvalueTable(np.minimum.accumulate(np.array(out)), source=base.source)
