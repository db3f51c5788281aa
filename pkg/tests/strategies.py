"""Shared hypothesis strategies."""
from hypothesis import strategies as st


def taus(min_im=0.8, max_im=1.6, max_re=0.5):
    return st.builds(complex, st.floats(-max_re, max_re), st.floats(min_im, max_im))


def points(radius=0.45):
    return st.builds(complex, st.floats(-radius, radius), st.floats(-radius, radius))


def away_from_lattice(z, L, clearance=0.05):
    import numpy as np
    from heunlab.elliptic import reduce_argument
    return abs(complex(np.asarray(reduce_argument(z, L)[0]))) > clearance
