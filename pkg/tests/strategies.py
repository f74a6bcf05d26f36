"""Shared hypothesis strategies."""
import numpy as np
from hypothesis import strategies as st

from kms_lab.linalg import random_density, random_hermitian, random_matrix

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
dims = st.integers(min_value=2, max_value=5)


@st.composite
def matrices(draw, dim=dims):
    d = draw(dim)
    return random_matrix(np.random.default_rng(draw(seeds)), d, 1.0)


@st.composite
def densities(draw, dim=dims):
    d = draw(dim)
    return random_density(np.random.default_rng(draw(seeds)), d)


@st.composite
def hermitians(draw, dim=dims):
    d = draw(dim)
    return random_hermitian(np.random.default_rng(draw(seeds)), d)
