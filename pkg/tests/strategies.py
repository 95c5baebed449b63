"""Hypothesis strategies for random report profiles."""

from __future__ import annotations

from hypothesis import strategies as st

from diffusion_auctions import build_profile

_LETTERS = "abcdefghij"


@st.composite
def profiles(draw, max_buyers=6, max_bid=20, with_gamma0=False):
    n = draw(st.integers(min_value=1, max_value=max_buyers))
    buyers = list(_LETTERS[:n])
    neighbors = draw(
        st.sets(st.sampled_from(buyers), min_size=1, max_size=n).map(sorted)
    )
    reports = {}
    for u in buyers:
        bid = draw(st.integers(min_value=0, max_value=max_bid))
        others = [v for v in buyers if v != u]
        targets = draw(st.sets(st.sampled_from(others))) if others else set()
        reports[u] = (bid, sorted(targets))
    gamma0 = ()
    if with_gamma0:
        gamma0 = draw(st.sets(st.sampled_from(buyers)).map(sorted))
    return build_profile(
        seller="s", seller_neighbors=neighbors, reports=reports, gamma0=gamma0
    )
