"""Hypothesis strategies for (theta, c, a) triples away from the special thresholds."""

import math

from hypothesis import assume
from hypothesis import strategies as st

from ousldp.model import classify_case, effective_domain

thetas = st.floats(-3.0, 3.0, allow_nan=False)
cs = st.floats(-4.0, 4.0, allow_nan=False)


def well_separated(theta: float, c: float, gap: float = 0.05) -> bool:
    specials = [0.0, theta, -theta, theta / 3.0]
    return all(abs(c - s) > gap for s in specials)


@st.composite
def theta_c(draw, gap: float = 0.05):
    th = draw(thetas)
    c = draw(cs)
    assume(abs(th) > gap or th == 0.0)
    assume(well_separated(th, c, gap))
    return th, c


@st.composite
def theta_c_a(draw, gap: float = 0.05):
    """A point strictly inside the limiting tilt domain, at least ``gap`` (relative) from its edges."""
    th, c = draw(theta_c(gap))
    dom = effective_domain(th, c)
    lo, hi = dom.lower, dom.upper
    if math.isinf(lo):
        lo = hi - 6.0
    if math.isinf(hi):
        hi = lo + 6.0
    frac = draw(st.floats(0.02, 0.98))
    a = lo + frac * (hi - lo)
    assume(dom.distance_to_edge(a) > 1e-3)
    return th, c, a


def regime(theta: float, c: float):
    return classify_case(theta, c)
