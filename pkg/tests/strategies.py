"""Hypothesis strategies: random instances are drawn from a seed so shrinking stays cheap."""

import numpy as np
from hypothesis import strategies as st

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
small_n = st.integers(min_value=2, max_value=3)


def complex_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def positive_definite(rng, n, floor=0.1):
    g = complex_matrix(rng, n)
    return g @ g.conj().T + floor * np.eye(n)
