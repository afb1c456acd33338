"""Shared hypothesis strategies for random robot pair states."""

import numpy as np
from hypothesis import strategies as st

from swarmcbf import CbfParams, PairState


finite = st.floats(allow_nan=False, allow_infinity=False)


def coords(lo=-50.0, hi=50.0):
    return st.floats(min_value=lo, max_value=hi, allow_nan=False)


@st.composite
def pair_states(draw, dims=(1, 2), min_sep=1e-3, max_sep=100.0, max_speed=10.0):
    """A nonsingular PairState with bounded separation and relative speed."""
    dim = draw(st.sampled_from(dims))
    direction = draw(st.lists(coords(-1.0, 1.0), min_size=dim, max_size=dim))
    direction = np.asarray(direction)
    norm = np.linalg.norm(direction)
    if norm < 1e-6:
        direction = np.zeros(dim)
        direction[0] = 1.0
        norm = 1.0
    sep = draw(st.floats(min_value=min_sep, max_value=max_sep))
    x = direction / norm * sep
    v = np.asarray(
        draw(st.lists(coords(-max_speed, max_speed), min_size=dim, max_size=dim))
    )
    return PairState(x, v)


@st.composite
def cbf_params(draw):
    r_s = draw(st.floats(min_value=0.01, max_value=2.0))
    gamma = draw(st.sampled_from([0.5, 1.0, 2.0, 5.0]))
    return CbfParams(r_s=r_s, gamma=gamma, t_c=0.025)
