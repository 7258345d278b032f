"""Shared strategies and independent oracles for the test suite."""

import random
from fractions import Fraction

from hypothesis import strategies as st

from thompsonv.cantor import canonicalize
from thompsonv.velement import random_element

words = st.text(alphabet="01", max_size=8)
periods = st.text(alphabet="01", min_size=1, max_size=5)


@st.composite
def points(draw, max_pre=8):
    w = draw(st.text(alphabet="01", max_size=max_pre))
    u = draw(periods)
    return canonicalize(w, u)


@st.composite
def elements(draw, max_depth=6, order_preserving=False):
    seed = draw(st.integers(0, 2 ** 32))
    return random_element(random.Random(seed), max_depth, 12, order_preserving)


def expand(w, u, n):
    """First ``n`` letters of ``w u u u ...``."""
    s = w
    while len(s) < n:
        s += u
    return s[:n]


def brute_canonical(w, u):
    """Shortest representation found by exhaustive search: minimal period, then minimal preperiod."""
    horizon = 4 * (len(w) + len(u)) + 8
    target = expand(w, u, horizon)
    best = None
    total = len(w) + len(u)
    for plen in range(1, len(u) + 1):
        for wlen in range(0, total + 1):
            w2 = target[:wlen]
            u2 = target[wlen:wlen + plen]
            if expand(w2, u2, horizon) == target:
                cand = (plen, wlen, w2, u2)
                if best is None or cand < best:
                    best = cand
    return best[2], best[3]


def substitute(pairs, word):
    """Apply a prefix table to a finite word long enough to contain a domain word."""
    for d, r in pairs:
        if word.startswith(d):
            return r + word[len(d):]
    return None


def partial_sum(w, u, n):
    """Sum of the first ``n`` terms of the binary expansion."""
    s = expand(w, u, n)
    return sum(Fraction(int(c), 2 ** (i + 1)) for i, c in enumerate(s))
