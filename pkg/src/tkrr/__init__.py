"""Truncated kernel ridge regression (TKRR).

The estimator fits ``N`` kernel columns out of ``n`` with a ridge penalty,
``w = (A_N^T A_N + lam I)^{-1} A_N^T Y``. The package also ships the full
KRR baseline, spectra of the Sinc and Gaussian kernels, spectrum-driven
choice of ``(N, lam)`` and a Monte Carlo experiment harness.
"""

from ._accel import BACKEND
from .errors import ConfigError, InvariantViolation, NumericalError, TkrrError
from .estimators import (
    KrrModel,
    TkrrModel,
    fit_generalized_ridge,
    fit_krr,
    fit_tkrr,
    hat_matrix,
    predict_krr,
    predict_tkrr,
)
from .gram import (
    GramFull,
    GramTruncated,
    build_full,
    build_truncated,
    eigvals_desc,
    interlacing_holds,
    singvals_desc,
    statistical_dimension,
    trace_tail,
)
from .kernels import Gaussian, Sinc, TensorProduct, eval_kernel, kappa1, kernel_matrix
from .sampling import GaussianMeasure, Normal, RngSeed, TruncatedStdNormal, UniformCube, draw
from .selection import (
    RiskReport,
    SelectionResult,
    empirical_risk,
    rate_bound,
    refined_truncation_general,
    refined_truncation_sinc,
    risk_bound_tkrr,
    select_exponential,
    select_polynomial,
)
from .spectral import (
    EigenvalueTable,
    SpectralModel,
    degrees_of_freedom,
    gaussian_eigenvalue,
    gaussian_model,
    nystrom_eigenvalues,
    sinc_eigenvalue_upper_bound,
    sinc_eigenvalues,
    sinc_model,
    tensor_top_eigenvalues,
)

__version__ = "0.1.0"
