from fractions import Fraction

from hypothesis import strategies as st

from leviflat.series import GaussianRational, Series

small_fracs = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3))
gaussians = st.builds(GaussianRational, small_fracs, small_fracs)
nonzero_gaussians = gaussians.filter(bool)


@st.composite
def series_in(draw, space, max_deg=4, min_deg=0, max_terms=6, trunc=None):
    """Sparse polynomial in ``space`` with weighted degrees in [min_deg, max_deg]."""
    n = space.nvars
    exps = st.tuples(*[st.integers(0, max_deg) for _ in range(n)]).filter(
        lambda e: min_deg <= sum(a * w for a, w in zip(e, space.weights)) <= max_deg)
    d = draw(st.dictionaries(exps, nonzero_gaussians, max_size=max_terms))
    return Series.from_dict(space, d, trunc)
