import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from tkrr.errors import NumericalError
from tkrr.kernels import Gaussian, Sinc, TensorProduct
from tkrr.sampling import GaussianMeasure, TruncatedStdNormal, UniformCube
from tkrr.spectral import (
    EigenvalueTable,
    degrees_of_freedom,
    gaussian_decay_b,
    gaussian_eigenfunction,
    gaussian_eigenvalue,
    gaussian_model,
    gaussian_ratio,
    hermite_functions,
    nystrom_eigenvalues,
    quadrature_rule,
    sinc_dof_estimate,
    sinc_eigenvalue_upper_bound,
    sinc_eigenvalues,
    sinc_model,
    tensor_top_eigenvalues,
)

# ---------------------------------------------------------------- tables


def test_table_validation():
    EigenvalueTable([3.0, 2.0, 2.0, 0.0])
    for bad in ([1.0, 2.0], [1.0, -1.0], [np.nan]):
        with pytest.raises(ValueError):
            EigenvalueTable(bad)
    t = EigenvalueTable([1.0])
    with pytest.raises(ValueError):
        t.values[0] = 2.0


# -------------------------------------------------------------- Gaussian


def test_gaussian_ratio_closed_form():
    assert gaussian_ratio(25, 1) == pytest.approx(25 / (26 + math.sqrt(51)), rel=1e-15)
    assert gaussian_ratio(25, 1) == pytest.approx(0.754343, abs=5e-7)


def test_gaussian_eigenvalues_geometric():
    lam = [gaussian_eigenvalue(25, 1, k) for k in range(1, 30)]
    r = np.array(lam[1:]) / np.array(lam[:-1])
    assert np.allclose(r, gaussian_ratio(25, 1), rtol=1e-13)


def test_gaussian_leading_constants():
    g = math.sqrt(51)
    assert gaussian_eigenvalue(25, 1, 1) == pytest.approx(math.sqrt(math.pi / (26 + g)), rel=1e-15)
    assert gaussian_eigenvalue(25, 1, 1, paper_literal=False) == pytest.approx(math.sqrt(2 / (26 + g)), rel=1e-15)


def test_gaussian_normalised_constant_matches_nystrom():
    nv = nystrom_eigenvalues(Gaussian(25), GaussianMeasure(1.0), 300, 5).values
    closed = [gaussian_eigenvalue(25, 1, k, paper_literal=False) for k in range(1, 6)]
    assert np.allclose(nv, closed, rtol=1e-9)


def test_gaussian_decay_conventions():
    assert gaussian_decay_b(25, 1) == pytest.approx((26 + math.sqrt(51)) / 25)
    assert gaussian_decay_b(25, 1, "log") == pytest.approx(math.log((26 + math.sqrt(51)) / 25))
    with pytest.raises(ValueError):
        gaussian_decay_b(25, 1, "other")


def test_hermite_functions_orthonormal():
    u, w = np.polynomial.hermite.hermgauss(80)
    psi = hermite_functions(30, u)
    # int psi_j psi_k du with the exp(-u^2) weight divided out
    gram = (psi * (w * np.exp(u * u))) @ psi.T
    assert np.allclose(gram, np.eye(31), atol=1e-12)


def test_hermite_recurrence_matches_scipy():
    from scipy.special import eval_hermite
    u = np.linspace(-3, 3, 13)
    psi = hermite_functions(8, u)
    for k in range(9):
        ref = eval_hermite(k, u) * np.exp(-u * u / 2) / math.sqrt(2.0 ** k * math.factorial(k) * math.sqrt(math.pi))
        assert np.allclose(psi[k], ref, rtol=1e-12, atol=1e-14)


def test_gaussian_eigenfunctions_orthogonal_in_lebesgue():
    # phi_k(x) = psi_{k-1}(s x)/s with s = sqrt(2 gamma): int phi_j phi_k dx = delta_jk / s^3
    s = math.sqrt(2 * math.sqrt(51))
    for j, k in [(1, 1), (2, 2), (5, 5), (1, 3), (2, 4)]:
        val, _ = integrate.quad(lambda x: gaussian_eigenfunction(25, 1, j, x) * gaussian_eigenfunction(25, 1, k, x),
                                -np.inf, np.inf)
        assert val == pytest.approx((j == k) / s ** 3, abs=1e-12)


def test_gaussian_eigenfunction_index_range():
    gaussian_eigenfunction(25, 1, 200, 0.1)
    with pytest.raises(ValueError):
        gaussian_eigenfunction(25, 1, 201, 0.1)
    with pytest.raises(ValueError):
        gaussian_eigenfunction(25, 1, 0, 0.1)


def test_gaussian_model():
    m = gaussian_model(25, 1, n_b=20)
    assert m.a == 0.0 and m.decay.n_b == 20
    assert m.eigenvalue(3) == gaussian_eigenvalue(25, 1, 3)
    assert len(m.table(10)) == 10


# ------------------------------------------------------------------ Sinc


def test_sinc_bound_domain():
    with pytest.raises(ValueError):
        sinc_eigenvalue_upper_bound(25, 33)
    assert sinc_eigenvalue_upper_bound(25, 34) < 1


def test_sinc_bound_value():
    m = 40
    expect = math.exp(-(2 * m + 1) * math.log(2 * (m + 1) / (math.e * 25)))
    assert sinc_eigenvalue_upper_bound(25, m) == pytest.approx(expect, rel=1e-15)


def test_sinc_prolate_route_matches_nystrom():
    p = sinc_eigenvalues(25, 40).values
    q = nystrom_eigenvalues(Sinc(25), UniformCube(), 400, 40, lebesgue=True)
    ok = q.values > 1e3 * q.resolution
    assert ok.sum() >= 25
    assert np.allclose(p[ok], q.values[ok], rtol=1e-9)


def test_sinc_eigenvalues_plateau_then_plunge():
    v = sinc_eigenvalues(25, 60).values
    assert np.all(v <= 1.0 + 1e-12) and v[0] > 0.999
    w = 2 * 25 / math.pi
    assert v[int(w) - 4] > 0.9 and v[int(w) + 8] < 1e-3
    assert np.all(np.diff(v) <= 0)


def test_sinc_eigenvalues_below_bound():
    v = sinc_eigenvalues(25, 70).values
    for m in range(34, 61):
        # table index m (1-based) against the bound at m
        assert v[m - 1] <= sinc_eigenvalue_upper_bound(25, m)


def test_sinc_landau_estimate():
    assert sinc_dof_estimate(25, 0.5) == pytest.approx(50 / math.pi)
    v = sinc_eigenvalues(25, 60)
    for eps in (1e-2, 1e-4, 1e-8, 1e-20):
        # the asymptotic count slightly undershoots the exact count
        n_true, n_est = degrees_of_freedom(v, eps), sinc_dof_estimate(25, eps)
        assert n_est <= n_true <= 1.25 * n_est


def test_sinc_model_extends_with_bound():
    m = sinc_model(25, count=60)
    assert m.a == 1.0 and m.decay.b == 2.0 and m.decay.n_b == 34
    assert m.eigenvalue(61) == sinc_eigenvalue_upper_bound(25, 61)
    with pytest.raises(ValueError):
        m.eigenvalue(0)


# --------------------------------------------------------------- Nyström


def test_quadrature_rules_integrate_density():
    for m in (UniformCube(), TruncatedStdNormal(), GaussianMeasure(2.0)):
        t, w = quadrature_rule(m, 50)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
    t, w = quadrature_rule(UniformCube(), 50, lebesgue=True)
    assert w.sum() == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        quadrature_rule(TruncatedStdNormal(), 10, lebesgue=True)


def test_nystrom_sinc_leading_eigenvalue():
    v = nystrom_eigenvalues(Sinc(25), UniformCube(), 200, 5, lebesgue=True).values
    assert 0.999 < v[0] <= 1 + 1e-12


def test_nystrom_floor_reports_zero():
    t = nystrom_eigenvalues(Sinc(25), UniformCube(), 200, 80, lebesgue=True)
    assert t.resolution > 0
    assert t.values[-1] == 0.0


def test_nystrom_rejects_tensor():
    with pytest.raises(ValueError):
        nystrom_eigenvalues(TensorProduct(Sinc(1), 2), UniformCube(2), 10, 2)


# ---------------------------------------------------- degrees of freedom


def test_degrees_of_freedom_examples():
    t = EigenvalueTable([1.0, 0.5, 0.25, 0.125])
    assert degrees_of_freedom(t, 0.3) == 3
    assert degrees_of_freedom(t, 0.5) == 2
    assert degrees_of_freedom(t, 2.0) == 1
    with pytest.raises(ValueError):
        degrees_of_freedom(t, 0.1)


# ---------------------------------------------------------------- tensor


def _brute(v, d, m):
    prods = sorted((math.prod(c) for c in itertools.product(v, repeat=d)), reverse=True)
    return np.array(prods[:m])


@given(
    st.lists(st.floats(1e-6, 10.0), min_size=1, max_size=6),
    st.integers(1, 3),
    st.integers(1, 30),
)
def test_tensor_top_matches_brute_force(vals, d, m):
    v = np.sort(np.array(vals))[::-1]
    m = min(m, v.size ** d)
    got = tensor_top_eigenvalues(EigenvalueTable(v), d, m).values
    assert np.allclose(got, _brute(v, d, m), rtol=1e-12)


def test_tensor_example():
    got = tensor_top_eigenvalues(EigenvalueTable([1.0, 0.5, 0.1]), 2, 4).values
    assert np.allclose(got, [1.0, 0.5, 0.5, 0.25])


def test_tensor_certify():
    t = EigenvalueTable([1.0, 0.5, 0.1, 0.01])
    tensor_top_eigenvalues(t, 2, 3, certify=True)
    with pytest.raises(ValueError):
        tensor_top_eigenvalues(EigenvalueTable([1.0, 0.5]), 2, 4, certify=True)
    with pytest.raises(ValueError):
        tensor_top_eigenvalues(t, 2, 17)
