"""Acceptance criteria, one test (and one PASS/FAIL summary line) each.

Published values are quoted to three significant figures; "agrees to the
quoted digits" means the computed value lies within one unit of the last
quoted digit.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

import conftest
from tkrr.estimators import fit_generalized_ridge, hat_matrix, tkrr_weights
from tkrr.gram import build_full, build_truncated, eigvals_desc, interlacing_holds, singvals_desc
from tkrr.harness import config_from_dict, run_regression, run_spectra
from tkrr.kernels import Gaussian, Sinc, kernel_diag, kernel_matrix
from tkrr.sampling import GaussianMeasure, RngSeed, TruncatedStdNormal, UniformCube, draw
from tkrr.selection import rate_bound, refined_truncation_sinc, select_exponential
from tkrr.spectral import (
    EigenvalueTable,
    gaussian_eigenvalue,
    gaussian_ratio,
    nystrom_eigenvalues,
    sinc_eigenvalue_upper_bound,
    sinc_eigenvalues,
    tensor_top_eigenvalues,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SINC_RISK_REF = {  # (sigma, N) -> published mean empirical risk
    (0.1, 20): 9.05e-3, (0.1, 25): 4.64e-3, (0.1, 30): 1.02e-3, (0.1, 50): 1.00e-3,
    (0.5, 20): 2.07e-2, (0.5, 25): 2.21e-2, (0.5, 30): 2.20e-2, (0.5, 50): 1.92e-2,
}
GAUSS_RISK_REF = {
    (0.1, 20): 1.13e-2, (0.1, 25): 5.26e-3, (0.1, 30): 1.91e-3, (0.1, 50): 1.10e-3,
    (0.5, 20): 1.20e-2, (0.5, 25): 1.43e-2, (0.5, 30): 1.04e-2, (0.5, 50): 8.72e-3,
}
GAUSS_RATE_REF = {0.1: 4.75e-3, 0.5: 5.01e-2}


def record(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def quoted_digits_agree(x, quoted):
    unit = 10.0 ** (math.floor(math.log10(abs(quoted))) - 2)
    return abs(x - quoted) < unit


def best_time(fn, repeat=200):
    fn()
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _config(name, **changes):
    obj = json.loads((CONFIGS / f"{name}.json").read_text())
    obj.pop("output_dir", None)
    obj.update(changes)
    return config_from_dict(obj)


def test_criterion_1_exponential_rule():
    r = select_exponential(2, 34, 200, 0.01)
    t = best_time(lambda: select_exponential(2, 34, 200, 0.01))
    ok = quoted_digits_agree(r.lam, 2.47e-4) and t < 1e-3
    record("1 selection rule", ok, f"lambda={r.lam:.6e} (published 2.47e-4), N={r.n_trunc}, {t * 1e6:.1f} us")


def test_criterion_2_refined_sinc_order():
    n1 = refined_truncation_sinc(25, 200, 0.01).n_trunc
    n2 = refined_truncation_sinc(25, 200, 0.25).n_trunc
    t1 = best_time(lambda: refined_truncation_sinc(25, 200, 0.01))
    t2 = best_time(lambda: refined_truncation_sinc(25, 200, 0.25))
    ok = n1 == 21 and n2 == 20 and max(t1, t2) < 1e-3
    record("2 fixed point", ok, f"N={n1} (sigma=0.1, published 21), N={n2} (sigma=0.5, published 20), "
                                f"{t1 * 1e6:.1f}/{t2 * 1e6:.1f} us")


def test_criterion_3_sinc_rate_column():
    r1 = rate_bound("sinc", sigma2=0.01, n=200, c=25)
    r2 = rate_bound("sinc", sigma2=0.25, n=200, c=25)
    ok = quoted_digits_agree(r1, 1.70e-3) and quoted_digits_agree(r2, 4.25e-2)
    record("3 rate bound", ok, f"R_n={r1:.5e} (published 1.70e-3), {r2:.5e} (published 4.25e-2)")


def _ratios(reports, table):
    return {(r.config["sigma"], r.config["n_trunc"]): r.empirical / table[(r.config["sigma"], r.config["n_trunc"])]
            for r in reports}


def test_criterion_4_sinc_risk_table():
    t0 = time.perf_counter()
    reps = run_regression(_config("example2"))
    elapsed = time.perf_counter() - t0
    ratios = _ratios(reps, SINC_RISK_REF)
    within = all(0.2 <= q <= 5 for q in ratios.values())
    below = all(r.empirical <= r.theoretical for r in reps if r.config["sigma"] == 0.5)
    ok = within and below and elapsed < 30 and len(ratios) == 8
    detail = ", ".join(f"{s}/{m}:{q:.2f}" for (s, m), q in sorted(ratios.items()))
    record("4 Sinc risk table", ok, f"ratio to published per sigma/N [{detail}]; sigma=0.5 below R_n: {below}; "
                            f"{elapsed:.1f} s")


@pytest.fixture(scope="module")
def gaussian_run():
    t0 = time.perf_counter()
    reps = run_regression(_config("example3"))
    return reps, time.perf_counter() - t0


def test_criterion_5_gaussian_rate_column(gaussian_run):
    reps, elapsed = gaussian_run
    ratios = {r.config["sigma"]: r.theoretical / GAUSS_RATE_REF[r.config["sigma"]] for r in reps}
    ok = all(0.5 <= q <= 2 for q in ratios.values()) and elapsed < 30
    detail = ", ".join(f"sigma={s}: {q:.2f}" for s, q in sorted(ratios.items()))
    record("5 Gaussian rate column", ok, f"ratio to published [{detail}]; {elapsed:.1f} s")


def test_criterion_5_gaussian_empirical_risk(gaussian_run):
    # Expected to fail: with the target as printed, the mean of f*^2 over
    # [-1, 1] is about 8.6e-5, so no fit can have a risk near 1e-2.
    reps, elapsed = gaussian_run
    ratios = _ratios(reps, GAUSS_RISK_REF)
    ok = all(0.2 <= q <= 5 for q in ratios.values()) and elapsed < 30
    detail = ", ".join(f"{s}/{m}:{q:.3f}" for (s, m), q in sorted(ratios.items()))
    record("5 Gaussian risk table", ok, f"ratio to published per sigma/N [{detail}]; {elapsed:.1f} s")


def test_criterion_6_gaussian_spectrum():
    t0 = time.perf_counter()
    r = gaussian_ratio(25, 1)
    closed = 25 / (26 + math.sqrt(51))
    nv = nystrom_eigenvalues(Gaussian(25), GaussianMeasure(1.0), 400, 10).values
    rel = np.max(np.abs((nv[1:] / nv[:-1]) / r - 1))
    lit = [gaussian_eigenvalue(25, 1, k) for k in range(1, 11)]
    rel_lit = np.max(np.abs((np.array(lit[1:]) / lit[:-1]) / r - 1))
    elapsed = time.perf_counter() - t0
    ok = abs(r - closed) <= 1e-15 * closed and rel < 1e-6 and rel_lit < 1e-12 and elapsed < 5
    record("6 Gaussian spectrum", ok, f"ratio={r:.9f} (closed form {closed:.9f}); Nyström ratio rel err {rel:.1e}; "
                                      f"{elapsed:.2f} s")


def _instances(count, seed, max_n=100):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        kernel = Sinc(rng.uniform(0.5, 40)) if rng.random() < 0.5 else Gaussian(rng.uniform(0.5, 60))
        k = rng.integers(3)
        measure = [UniformCube(), TruncatedStdNormal(), GaussianMeasure(rng.uniform(0.25, 4))][k]
        n = int(rng.integers(1, max_n + 1))
        n_trunc = int(rng.integers(1, n + 1))
        x = draw(measure, n, RngSeed(int(rng.integers(2 ** 32))))
        lam = float(10 ** rng.uniform(-8, 0))
        y = np.sin(3 * x[:, 0]) + 0.1 * rng.standard_normal(n)
        yield kernel, x, n_trunc, lam, y


def test_criterion_7_property_suite():
    failures = []

    for kernel, x, m, _, _ in _instances(100, 1):
        a = build_truncated(kernel, x, m)
        if not interlacing_holds(singvals_desc(a), eigvals_desc(build_full(kernel, x)), 1e-8 * a.kappa1):
            failures.append("interlacing")

    for kernel, x, m, lam, _ in _instances(100, 2):
        a = build_truncated(kernel, x, m).entries
        h = hat_matrix(a, lam)
        if np.linalg.norm(h, 2) > 1 + 1e-12 or np.linalg.norm((h - np.eye(len(h))) @ a, 2) ** 2 > lam / 4 + 1e-8:
            failures.append("hat matrix")

    for kernel, x, m, lam, y in _instances(100, 3):
        n = x.shape[0]
        a = build_truncated(kernel, x, m).entries
        w_t = tkrr_weights(a, y, lam)
        w_g = fit_generalized_ridge(a, np.eye(m) / n, y, lam, n)
        if not np.allclose(w_g, w_t, rtol=1e-8, atol=1e-8 * max(1.0, np.abs(w_t).max())):
            failures.append("ridge reduction (TKRR)")
    rng = np.random.default_rng(4)
    for _ in range(100):
        n = int(rng.integers(1, 31))
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        k = (q * rng.uniform(0.1, 10, n)) @ q.T
        k = 0.5 * (k + k.T)
        lam = float(10 ** rng.uniform(-4, 0))
        y = rng.standard_normal(n)
        if not np.allclose(fit_generalized_ridge(k, k, y, lam, n), np.linalg.solve(k + n * lam * np.eye(n), y),
                           rtol=1e-8, atol=1e-8):
            failures.append("ridge reduction (KRR)")

    for kernel, x, m, _, y in _instances(50, 5):
        a = build_truncated(kernel, x, m).entries
        norms = [np.linalg.norm(tkrr_weights(a, y, lam)) for lam in np.logspace(-6, 2, 17)]
        if any(b > a_ * (1 + 1e-9) for a_, b in zip(norms, norms[1:])):
            failures.append("shrinkage")

    for kernel, x, _, _, _ in _instances(100, 6):
        g = build_full(kernel, x)
        total = eigvals_desc(g).values.sum()
        if abs(total - kernel_diag(kernel, x).mean()) > 1e-8 * total or total > g.kappa1 * (1 + 1e-8):
            failures.append("trace identity")

    ny = nystrom_eigenvalues(Sinc(25), UniformCube(), 400, 60, lebesgue=True).values
    pro = sinc_eigenvalues(25, 60).values
    for m in range(34, 61):
        bound = sinc_eigenvalue_upper_bound(25, m)
        if ny[m - 1] > bound or pro[m - 1] > bound:
            failures.append(f"sinc bound m={m}")

    rng = np.random.default_rng(7)
    import itertools
    for _ in range(100):
        v = np.sort(rng.uniform(1e-3, 2, int(rng.integers(1, 7))))[::-1]
        d = int(rng.integers(1, 4))
        m = int(rng.integers(1, v.size ** d + 1))
        brute = sorted((math.prod(c) for c in itertools.product(v, repeat=d)), reverse=True)[:m]
        if not np.allclose(tensor_top_eigenvalues(EigenvalueTable(v), d, m).values, brute, rtol=1e-12):
            failures.append("tensor top eigenvalues")

    record("7 property suite", not failures,
           "all properties hold" if not failures else f"failed: {sorted(set(failures))}")


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir())}


def test_criterion_8_determinism(tmp_path):
    for sub, workers in (("a", 1), ("b", 1), ("c", 4)):
        out = str(tmp_path / sub)
        run_regression(_config("example2", output_dir=out, workers=workers))
        run_spectra(_config("example1_sinc", output_dir=out, workers=workers))
    a, b, c = (_files(tmp_path / s) for s in "abc")
    ok = a == b == c and len(a) == 5
    record("8 determinism", ok, f"{len(a)} files byte-identical across 2 serial runs and a 4-thread run: {ok}")
