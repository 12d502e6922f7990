"""Random decorated trees for the property tests.

Both a hypothesis strategy and a seeded generator are provided; the
acceptance suite uses the seeded one so that instance counts are exact.
"""
from __future__ import annotations

import random

from hypothesis import strategies as st

from qkpz.trees import ONE, XI, ZERO_MI, DecoratedTree, MultiIndex, pidx

EDGES = (pidx(0), pidx(1), pidx(0, 0, 1), pidx(1, 0, 1), pidx(2))
V_ALPHAS = EDGES + (pidx(0, 0, 0),)


def _splits(n: int, rng) -> list:
    parts = []
    while n:
        k = rng.randint(1, n)
        parts.append(k)
        n -= k
    return parts


def random_tree(rng: random.Random, noises: int, one_root=None, deco=False) -> DecoratedTree:
    """A tree with exactly ``noises`` noises (constant nodes always have children)."""
    if one_root is None:
        one_root = noises > 1 and rng.random() < 0.4
    if one_root:
        parts = _splits(noises, rng)
    else:
        parts = _splits(noises - 1, rng) if noises > 1 else []
    kids = tuple((rng.choice(EDGES), random_tree(rng, k)) for k in parts)
    k = MultiIndex(rng.randint(0, 1), rng.randint(0, 1)) if deco and rng.random() < 0.3 else ZERO_MI
    return DecoratedTree(ONE if one_root else XI, k, kids)


def planted_product(rng: random.Random, noises: int, deco=False) -> DecoratedTree:
    """``X^k prod I_a(t_i)``: a constant root over trees with ``noises`` noises in total."""
    parts = _splits(noises, rng) if noises else []
    kids = tuple((rng.choice(EDGES), random_tree(rng, k)) for k in parts)
    k = MultiIndex(rng.randint(0, 1), rng.randint(0, 1)) if deco and rng.random() < 0.3 else ZERO_MI
    return DecoratedTree(ONE, k, kids)


@st.composite
def trees(draw, max_noises: int = 2, min_noises: int = 1):
    n = draw(st.integers(min_noises, max_noises))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_tree(random.Random(seed), n)


@st.composite
def planted_products(draw, max_noises: int = 2, min_noises: int = 1, deco: bool = False):
    n = draw(st.integers(min_noises, max_noises))
    seed = draw(st.integers(0, 2**32 - 1))
    return planted_product(random.Random(seed), n, deco)


edges = st.sampled_from(EDGES)
v_alphas = st.sampled_from(V_ALPHAS)
