"""Random (kernel, measure, n, N, seed) instances shared by the property tests."""

from hypothesis import strategies as st

from tkrr.kernels import Gaussian, Sinc
from tkrr.sampling import GaussianMeasure, RngSeed, TruncatedStdNormal, UniformCube, draw

kernels = st.one_of(
    st.floats(0.5, 40.0).map(Sinc),
    st.floats(0.5, 60.0).map(Gaussian),
)
measures = st.one_of(
    st.just(UniformCube()),
    st.just(TruncatedStdNormal()),
    st.floats(0.25, 4.0).map(GaussianMeasure),
)


@st.composite
def instances(draw_, max_n=100):
    kernel = draw_(kernels)
    measure = draw_(measures)
    n = draw_(st.integers(1, max_n))
    n_trunc = draw_(st.integers(1, n))
    seed = draw_(st.integers(0, 2 ** 32))
    x = draw(measure, n, RngSeed(seed))
    return kernel, x, n_trunc, seed
