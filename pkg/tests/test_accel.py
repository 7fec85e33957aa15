import os
import subprocess
import sys

import numpy as np
import pytest

from tkrr import _accel

PROBE = "import tkrr._accel as a; print(a.BACKEND, a.sinc_matrix is a.sinc_matrix_numpy)"


def _probe(flag):
    env = dict(os.environ)
    env.pop("TKRR_DISABLE_NUMBA", None)
    if flag is not None:
        env["TKRR_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    return out.stdout.split()


@pytest.mark.parametrize("flag", ["1", "true", "YES"])
def test_env_flag_forces_numpy(flag):
    assert _probe(flag) == ["numpy", "True"]


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")
def test_numba_is_default_when_available():
    assert _probe(None) == ["numba", "False"]
    assert _probe("0") == ["numba", "False"]


def test_numpy_path_handles_empty_inputs():
    out = _accel.sinc_matrix_numpy(np.zeros(0), np.zeros(3), 2.0)
    assert out.shape == (0, 3)


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")
def test_numba_threads_are_reentrant():
    from concurrent.futures import ThreadPoolExecutor

    x = np.linspace(-1, 1, 300)
    ref = _accel.gaussian_matrix_numpy(x, x, 25.0)
    with ThreadPoolExecutor(4) as pool:
        outs = list(pool.map(lambda _: _accel.gaussian_matrix_numba(x, x, 25.0), range(8)))
    assert all(np.allclose(o, ref, rtol=1e-14, atol=0) for o in outs)
