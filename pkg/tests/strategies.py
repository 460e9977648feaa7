"""Hypothesis strategies shared by the property tests."""
import numpy as np
from hypothesis import strategies as st

from postsel import random_density

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=5)


@st.composite
def psd_matrices(draw, max_dim=5, min_dim=1):
    n = draw(st.integers(min_value=min_dim, max_value=max_dim))
    k = draw(st.integers(min_value=1, max_value=n))
    rng = np.random.default_rng(draw(seeds))
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    m = g @ g.conj().T
    return (m + m.conj().T) / 2


@st.composite
def densities(draw, dim, full_rank=False):
    rank = dim if full_rank else draw(st.integers(min_value=1, max_value=dim))
    return random_density(dim, rank, draw(seeds)).matrix


@st.composite
def full_rank_pairs(draw, min_dim=2, max_dim=4):
    n = draw(st.integers(min_value=min_dim, max_value=max_dim))
    return draw(densities(n, True)), draw(densities(n, True))
