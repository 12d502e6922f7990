"""Brute-force generator for the saturated negative-degree trees.

Independent of ``qkpz.rules``: it builds every tree from the node rule
directly (noise nodes take thin children only, constant nodes take exactly
two thick children plus thin ones), dedupes by a sorted string form and
filters on degree.  Used once to freeze ``fixtures/negative_trees.json``
and again in the tests as a cross-check.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement


def _partitions(n: int, parts: int, smallest: int = 1):
    if parts == 0:
        if n == 0:
            yield ()
        return
    for first in range(smallest, n + 1):
        for rest in _partitions(n - first, parts - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def trees(n: int) -> tuple:
    """String forms of all saturated trees with exactly ``n`` noises."""
    out = set()
    # noise at the root: the root uses one noise, children the rest
    for k in range(0, n):
        for sizes in _partitions(n - 1, k):
            for kids in _choose(sizes):
                out.add(_fmt("Xi", [("I", c) for c in kids]))
    # constant root: two thick children and k thin ones
    for k in range(0, n - 1):
        for split in range(2, n + 1):
            for thick_sizes in _partitions(split, 2):
                for thin_sizes in _partitions(n - split, k):
                    for thick in _choose(thick_sizes):
                        for thin in _choose(thin_sizes):
                            edges = [("Ix", c) for c in thick] + [("I", c) for c in thin]
                            out.add(_fmt("One", edges))
    return tuple(sorted(out))


def _choose(sizes):
    # multisets of subtrees, one per size (sizes sorted ascending)
    groups = {}
    for s in sizes:
        groups[s] = groups.get(s, 0) + 1
    pools = [combinations_with_replacement(trees(s), m) for s, m in sorted(groups.items())]
    results = [()]
    for pool in pools:
        pool = list(pool)
        results = [r + p for r in results for p in pool]
    return results


def _fmt(head: str, edges) -> str:
    if not edges:
        return head
    return head + "[" + ", ".join(sorted(f"{e}({c})" for e, c in edges)) + "]"


def degree(s: str, noise=Fraction(-3, 2) - Fraction(1, 100)) -> Fraction:
    return (s.count("Xi") * noise + 2 * s.count("I(") + s.count("Ix("))


def negative(n: int) -> list:
    return [s for s in trees(n) if degree(s) < 0]
