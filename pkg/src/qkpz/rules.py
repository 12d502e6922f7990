"""Admissibility rules and enumeration of negative-degree trees.

Two rules are supported.  Under the full rule a noise node has thin children
only, and a constant node has at most two thick children plus any number of
thin ones.  The saturated rule keeps noise nodes as they are, forces exactly
two thick children at every constant node and forbids node decorations.
Thin and thick refer to the space-time part of the edge index only; the
parameter-derivative order ``h`` is ignored by the rules.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct

from .errors import NotSubcritical
from .trees import (
    ONE, XI, ZERO_MI, DecoratedTree, MultiIndex, ParamIndex, THICK, THIN,
    degree, rewrite_at_nodes, sort_key,
)

FULL = "full"
SATURATED = "saturated"


@dataclass(frozen=True)
class RuleSet:
    """Node signatures: thin children at noise nodes, ``thick^l thin^k`` at constant nodes."""

    kind: str = SATURATED
    thick_counts: frozenset = frozenset({2})
    require_zero_decorations: bool = True

    @classmethod
    def full(cls) -> "RuleSet":
        return cls(FULL, frozenset({0, 1, 2}), False)

    @classmethod
    def saturated(cls) -> "RuleSet":
        return cls(SATURATED, frozenset({2}), True)

    @classmethod
    def named(cls, name: str) -> "RuleSet":
        if name.lower() in ("sat", "saturated"):
            return cls.saturated()
        if name.lower() in ("full", "r"):
            return cls.full()
        raise ValueError(f"unknown rule set {name!r}")


@dataclass(frozen=True)
class EnumConfig:
    noise_degree: Fraction = Fraction(-3, 2)
    kappa: Fraction = Fraction(1, 100)
    noise_counts: frozenset = field(default_factory=lambda: frozenset({2, 4}))
    max_param_deriv: int = 4

    def __post_init__(self):
        object.__setattr__(self, "noise_degree", Fraction(self.noise_degree))
        object.__setattr__(self, "kappa", Fraction(self.kappa))
        object.__setattr__(self, "noise_counts", frozenset(self.noise_counts))
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    @property
    def xi_degree(self) -> Fraction:
        return self.noise_degree - self.kappa

    def check_subcritical(self) -> None:
        if self.xi_degree <= -2:
            raise NotSubcritical(
                f"noise degree {self.xi_degree} is not above -2; infinitely many negative trees")


def _edge_kind(alpha: ParamIndex):
    if alpha.st == (0, 0):
        return "thin"
    if alpha.st == (0, 1):
        return "thick"
    return None


def node_conforms(node: DecoratedTree, rules: RuleSet) -> bool:
    if rules.require_zero_decorations and node.deco != ZERO_MI:
        return False
    thick = 0
    for a, _ in node.children:
        kind = _edge_kind(a)
        if kind is None:
            return False
        thick += kind == "thick"
    if node.noise == XI:
        return thick == 0
    return thick in rules.thick_counts


def conforms(tree: DecoratedTree, rules: RuleSet) -> bool:
    """Every node matches one of the admissible signatures."""
    return all(node_conforms(n, rules) for n in tree.nodes())


def is_positive(tree: DecoratedTree, cfg: EnumConfig | None = None) -> bool:
    cfg = cfg or EnumConfig()
    return degree(tree, cfg.noise_degree, cfg.kappa) > 0


def is_negative(tree: DecoratedTree, cfg: EnumConfig | None = None) -> bool:
    cfg = cfg or EnumConfig()
    return degree(tree, cfg.noise_degree, cfg.kappa) < 0


def max_nodes(n_noises: int, cfg: EnumConfig) -> int:
    """Largest node count compatible with negative degree.

    Every edge in a conformal tree contributes at least 1 to the degree,
    so ``deg >= n * deg(Xi) + (nodes - 1)``.
    """
    bound = 1 - n_noises * cfg.xi_degree  # nodes < bound
    return int(bound) if bound != int(bound) else int(bound) - 1


# ------------------------------------------------- strategy 1: composition


def _multisets(options: tuple, start: int, noises: int, nodes: int, thick_left: int):
    """Multisets (as index-sorted lists) of planted options with exact totals."""
    if noises == 0 and nodes == 0:
        if thick_left <= 0:
            yield ()
        return
    if noises <= 0 or nodes <= 0:
        return
    for i in range(start, len(options)):
        alpha, sub, n_i, m_i = options[i]
        if n_i > noises or m_i > nodes:
            continue
        is_thick = alpha == THICK
        if is_thick and thick_left <= 0:
            continue
        for rest in _multisets(options, i, noises - n_i, nodes - m_i,
                               thick_left - (1 if is_thick else 0)):
            yield ((alpha, sub),) + rest


@lru_cache(maxsize=None)
def _subtrees(n: int, m: int, rules: RuleSet) -> tuple:
    """Conformal trees with ``n`` noises and ``m`` nodes, no bare constant leaves."""
    if n <= 0 or m <= 0:
        return ()
    out = []
    options = []
    for n_i in range(1, n + 1):
        for m_i in range(1, m):
            for sub in _subtrees(n_i, m_i, rules):
                options.append((THIN, sub, n_i, m_i))
                options.append((THICK, sub, n_i, m_i))
    options = tuple(options)
    thin_only = tuple(o for o in options if o[0] == THIN)
    # noise root
    for kids in _multisets(thin_only, 0, n - 1, m - 1, 0):
        out.append(DecoratedTree(XI, ZERO_MI, kids))
    # constant root: exact thick count enforced after generation
    for ell in sorted(rules.thick_counts):
        for kids in _multisets(options, 0, n, m - 1, ell):
            thick = sum(1 for a, _ in kids if a == THICK)
            if thick == ell and kids:
                out.append(DecoratedTree(ONE, ZERO_MI, kids))
    return tuple(dict.fromkeys(out))


def _enumerate_recursive(rules: RuleSet, cfg: EnumConfig) -> set:
    found = set()
    for n in cfg.noise_counts:
        for m in range(1, max_nodes(n, cfg) + 1):
            for t in _subtrees(n, m, rules):
                if degree(t, cfg.noise_degree, cfg.kappa) < 0:
                    found.add(t)
    return found


# --------------------------------------------------- strategy 2: growth


def _grow(tree: DecoratedTree, rules: RuleSet) -> list:
    """All trees obtained by attaching one new leaf below some node."""
    out = []

    def attach(node):
        res = []
        thick_here = sum(1 for a, _ in node.children if a == THICK)
        for leaf in (DecoratedTree(XI), DecoratedTree(ONE)):
            res.append((1, node.replace(children=node.children + ((THIN, leaf),))))
            if node.noise == ONE and thick_here < max(rules.thick_counts):
                res.append((1, node.replace(children=node.children + ((THICK, leaf),))))
        return res

    for _, t in rewrite_at_nodes(tree, attach):
        out.append(t)
    return out


def _enumerate_growth(rules: RuleSet, cfg: EnumConfig) -> set:
    found = set()
    slope = cfg.xi_degree + 1  # best case change per extra noise
    for n in cfg.noise_counts:
        limit = max_nodes(n, cfg)
        frontier = {DecoratedTree(XI), DecoratedTree(ONE)}
        seen = set(frontier)
        while frontier:
            nxt = set()
            for t in frontier:
                if t.noise_count() == n and _final_ok(t, rules, cfg):
                    found.add(t)
                if t.node_count() >= limit:
                    continue
                for g in _grow(t, rules):
                    k = g.noise_count()
                    if k > n or g in seen:
                        continue
                    lower = degree(g, cfg.noise_degree, cfg.kappa) + (n - k) * min(slope, 0)
                    if lower >= 0:
                        continue
                    seen.add(g)
                    nxt.add(g)
            frontier = nxt
    return found


def _final_ok(t: DecoratedTree, rules: RuleSet, cfg: EnumConfig) -> bool:
    if not conforms(t, rules):
        return False
    if any(c.is_unit for n in t.nodes() for _, c in n.children):
        return False
    return degree(t, cfg.noise_degree, cfg.kappa) < 0


STRATEGIES = {"recursive": _enumerate_recursive, "growth": _enumerate_growth}


def enumerate_negative(rules: RuleSet | None = None, cfg: EnumConfig | None = None,
                       strategy: str = "recursive") -> list:
    """Conformal trees with zero decorations, the configured noise counts and degree < 0.

    Returned as a list sorted in the canonical output order.
    """
    rules = rules or RuleSet.saturated()
    cfg = cfg or EnumConfig()
    cfg.check_subcritical()
    trees = STRATEGIES[strategy](rules, cfg)
    return sorted(trees, key=sort_key)


# -------------------------------------------------------- parametrisation


def _param_variants(tree: DecoratedTree, n: int) -> set:
    kid_choices = []
    for a, c in tree.children:
        subs = _param_variants(c, n)
        kid_choices.append([(ParamIndex(h, a.st), s) for h in range(n + 1) for s in subs])
    out = set()
    for kids in iproduct(*kid_choices):
        out.add(DecoratedTree(tree.noise, tree.deco, kids))
    return out


def parametrise(trees, n: int, max_total: int | None = None) -> list:
    """Every assignment of ``h in {0..n}`` to the edges, deduplicated.

    ``max_total`` optionally bounds the sum of ``h`` over the edges of a tree.
    """
    out = set()
    for t in trees:
        for v in _param_variants(t, n):
            if max_total is None or sum(a.h for a in v.edges()) <= max_total:
                out.add(v)
    return sorted(out, key=sort_key)


def unparametrise(tree: DecoratedTree) -> DecoratedTree:
    """Forget all ``h`` decorations."""
    return DecoratedTree(
        tree.noise, tree.deco,
        tuple((ParamIndex(0, a.st), unparametrise(c)) for a, c in tree.children))


__all__ = [
    "RuleSet", "EnumConfig", "FULL", "SATURATED", "conforms", "node_conforms",
    "enumerate_negative", "parametrise", "unparametrise", "is_positive", "is_negative",
    "max_nodes", "MultiIndex",
]
