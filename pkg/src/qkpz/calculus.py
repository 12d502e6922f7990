"""Operations on decorated trees: raising, grafting, the star product,
abstract derivatives, the unparametrised projection, preparation maps and
covariant derivatives.

All operations return ``TreeSum`` values and extend bilinearly when given
sums.  Grafting with a node decoration ``n_v`` lowers that decoration by
``beta`` and the edge index by the same amount, weighted by
``binom(n_v, beta)``; for zero-decorated trees only ``beta = 0`` survives.
New edges are appended on the right of the target node before the tree is
canonicalised.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

from .errors import StarDomain
from .trees import (
    ONE, XI, ZERO_MI, DecoratedTree, MultiIndex, ParamIndex, TreeSum,
    as_param, as_sum, degree, symmetry_factor,
)

ALL = "all"

# ------------------------------------------------------------ raw trees
# A raw tree is ``(noise, deco, ((alpha, raw), ...))`` with the child order
# exactly as built; paths of original nodes stay valid while edges are
# appended at the end of child lists.


def _raw(tree: DecoratedTree) -> tuple:
    return (tree.noise, tree.deco, tuple((a, _raw(c)) for a, c in tree.children))


def _cook(raw: tuple) -> DecoratedTree:
    noise, deco, kids = raw
    return DecoratedTree(noise, deco, tuple((a, _cook(c)) for a, c in kids))


def _paths(raw: tuple, prefix=()) -> list:
    out = [prefix]
    for i, (_, c) in enumerate(raw[2]):
        out.extend(_paths(c, prefix + (i,)))
    return out


def _node(raw: tuple, path: tuple) -> tuple:
    for i in path:
        raw = raw[2][i][1]
    return raw


def _update(raw: tuple, path: tuple, fn) -> tuple:
    if not path:
        return fn(raw)
    noise, deco, kids = raw
    i = path[0]
    a, c = kids[i]
    return (noise, deco, kids[:i] + ((a, _update(c, path[1:], fn)),) + kids[i + 1:])


def _sub_indices(n: MultiIndex):
    for t in range(n.t + 1):
        for x in range(n.x + 1):
            yield MultiIndex(t, x)


def _binom(n: MultiIndex, b: MultiIndex) -> int:
    return comb(n.t, b.t) * comb(n.x, b.x)


# ------------------------------------------------------------ raising


def _distributions(k: MultiIndex, n: int):
    """All ``(k_1, .., k_n)`` with sum ``k`` and their multinomial weight."""
    def split(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in split(total - first, parts - 1):
                yield (first,) + rest

    kf = k.factorial()
    for ts in split(k.t, n):
        for xs in split(k.x, n):
            ks = [MultiIndex(t, x) for t, x in zip(ts, xs)]
            w = kf
            for ki in ks:
                w //= ki.factorial()
            yield ks, w


def _uparrow_raw(raw: tuple, k: MultiIndex, paths: list) -> list:
    out = []
    for ks, w in _distributions(k, len(paths)):
        r = raw
        for p, kv in zip(paths, ks):
            if kv != ZERO_MI:
                r = _update(r, p, lambda nd, kv=kv: (nd[0], nd[1] + kv, nd[2]))
        out.append((w, r))
    return out


def uparrow(tau, k, nodes=ALL) -> TreeSum:
    """``sum over k = sum_v k_v`` of the decoration increments on ``nodes``.

    ``nodes`` is ``ALL`` or an iterable of paths (tuples of child indices in
    the canonical child order).
    """
    k = MultiIndex(*k)
    out = TreeSum()
    for tree, c in as_sum(tau).items():
        raw = _raw(tree)
        paths = _paths(raw) if nodes == ALL else [tuple(p) for p in nodes]
        for w, r in _uparrow_raw(raw, k, paths):
            out.add_term(_cook(r), c * w)
    return out


# ------------------------------------------------------------ grafting


def _graft_raw(sigma_raw: tuple, alpha: ParamIndex, raw: tuple, paths: list) -> list:
    """Attach ``I_{alpha - beta}(sigma)`` at each of ``paths`` in ``raw``."""
    out = []
    for p in paths:
        n_v = _node(raw, p)[1]
        for beta in _sub_indices(n_v):
            st = alpha.st - beta
            if not st.is_nonneg():
                continue
            edge = ParamIndex(alpha.h, st)

            def attach(nd, beta=beta, edge=edge):
                return (nd[0], nd[1] - beta, nd[2] + ((edge, sigma_raw),))

            out.append((_binom(n_v, beta), _update(raw, p, attach)))
    return out


def graft(sigma, alpha, tau) -> TreeSum:
    """``sigma`` grafted onto every node of ``tau`` with an edge ``I_alpha``."""
    alpha = as_param(alpha)
    out = TreeSum()
    for s, cs in as_sum(sigma).items():
        s_raw = _raw(s)
        for t, ct in as_sum(tau).items():
            raw = _raw(t)
            for w, r in _graft_raw(s_raw, alpha, raw, _paths(raw)):
                out.add_term(_cook(r), cs * ct * w)
    return out


def star(sigma, tau) -> TreeSum:
    """``X^k prod I_{a_i}(sigma_i)`` star ``tau``.

    Each ``sigma_i`` is grafted independently onto the nodes of ``tau``; the
    raising ``uparrow^k`` then acts on the nodes of ``tau`` only, which keeps
    the product associative.
    """
    out = TreeSum()
    for s, cs in as_sum(sigma).items():
        if s.noise == XI:
            raise StarDomain("the left factor of a star product must have a One root")
        for t, ct in as_sum(tau).items():
            raw = _raw(t)
            original = _paths(raw)
            states = [(1, raw)]
            for a, sub in s.children:
                sub_raw = _raw(sub)
                states = [(w * w2, r2) for w, r in states
                          for w2, r2 in _graft_raw(sub_raw, a, r, original)]
            for w, r in states:
                if s.deco == ZERO_MI:
                    out.add_term(_cook(r), cs * ct * w)
                    continue
                for w2, r2 in _uparrow_raw(r, s.deco, original):
                    out.add_term(_cook(r2), cs * ct * w * w2)
    return out


# ------------------------------------------------------------ derivatives


def abstract_derivative(i: int, tau) -> TreeSum:
    """``D_i`` (``i = 0`` time, ``i = 1`` space) by Leibniz over root factors."""
    if i not in (0, 1):
        raise ValueError("i must be 0 (time) or 1 (space)")
    e = MultiIndex(1, 0) if i == 0 else MultiIndex(0, 1)
    out = TreeSum()
    for t, c in as_sum(tau).items():
        k = t.deco
        if k[i]:
            out.add_term(t.replace(deco=k - e), c * k[i])
        kids = t.children
        for j, (a, sub) in enumerate(kids):
            new = ParamIndex(a.h, a.st + e)
            out.add_term(t.replace(children=kids[:j] + ((new, sub),) + kids[j + 1:]), c)
    return out


def project_unparam(tau) -> TreeSum:
    """Keep the trees whose edges all have ``h = 0``."""
    out = TreeSum()
    for t, c in as_sum(tau).items():
        if t.is_unparametrised():
            out.add_term(t, c)
    return out


# ------------------------------------------------------------ preparation maps


@dataclass
class Character:
    """Finitely supported linear form on negative-degree trees."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for t in self.values:
            if degree(t) >= 0:
                raise ValueError(f"character support must have negative degree: {t}")

    def __call__(self, tree):
        return self.values.get(tree, 0)

    def support(self):
        return sorted(self.values)


def prep_map_adjoint(ell: Character, tau, include_identity: bool = False) -> TreeSum:
    """``R*(tau) = sum_sigma ell(sigma) / S(sigma) (tau star sigma)``.

    Preparation maps fix noises, so a tree with a noise at the root has no
    correction.
    """
    out = TreeSum()
    for t, c in as_sum(tau).items():
        if include_identity:
            out.add_term(t, c)
        if t.noise == XI:
            continue
        for s in ell.support():
            w = Fraction(1, symmetry_factor(s))
            out = out + star(t, s).scale(c * ell(s) * w)
    return out


def eq_analytical_violations(tau: DecoratedTree, corrections: TreeSum) -> list:
    """Trees of ``R*(tau) - tau`` breaking the degree / noise-count constraint.

    ``R*`` is the adjoint, so every correction ``t`` must have ``tau`` among
    the terms of ``R(t)``: ``deg(tau) >= deg(t)`` and fewer noises in ``tau``.
    """
    bad = []
    for t in corrections:
        if t == tau:
            continue
        if not (degree(tau) >= degree(t) and tau.noise_count() < t.noise_count()):
            bad.append(t)
    return bad


# ------------------------------------------------------------ covariant derivatives


def cherry(tau1, tau2, k: int = 0, ell: int = 0) -> TreeSum:
    """``One[I_x{k}(tau1), I_x{ell}(tau2)]``, bilinear in the arguments."""
    out = TreeSum()
    e1, e2 = ParamIndex(k, MultiIndex(0, 1)), ParamIndex(ell, MultiIndex(0, 1))
    for t1, c1 in as_sum(tau1).items():
        for t2, c2 in as_sum(tau2).items():
            out.add_term(DecoratedTree(ONE, ZERO_MI, ((e1, t1), (e2, t2))), c1 * c2)
    return out


@dataclass(frozen=True)
class CherryTerm:
    k: int
    ell: int
    weight: Fraction
    trees: TreeSum


@dataclass(frozen=True)
class GradedCounterterm:
    """``nabla^m_{tau2} tau1`` with prefixes kept as tags.

    ``single`` carries the prefix ``d^m(a .)``; every cherry term carries
    ``(d^m .)``.  The weights already include the factor 1/2.
    """

    m: int
    single: TreeSum
    cherries: tuple

    @property
    def single_prefix(self) -> str:
        return f"d^{self.m}(a.)"

    @property
    def cherry_prefix(self) -> str:
        return f"(d^{self.m}.)"

    def trees(self) -> TreeSum:
        out = TreeSum(self.single.items())
        for ch in self.cherries:
            out = out + ch.trees
        return out


def nabla(tau1, tau2, m: int, max_order: int | None = None) -> GradedCounterterm:
    """Covariant derivative of ``tau1`` along ``tau2`` of parameter order ``m``."""
    if m < 0 or (max_order is not None and m > max_order):
        raise ValueError(f"order m={m} outside 0..{max_order}")
    single = graft(tau2, ParamIndex(m, ZERO_MI), tau1)
    cherries = tuple(
        CherryTerm(k, m - k, Fraction(1, 2 * factorial(k) * factorial(m - k)),
                   cherry(tau1, tau2, k, m - k))
        for k in range(m, -1, -1))
    return GradedCounterterm(m, single, cherries)


__all__ = [
    "ALL", "uparrow", "graft", "star", "abstract_derivative", "project_unparam",
    "Character", "prep_map_adjoint", "eq_analytical_violations", "cherry",
    "CherryTerm", "GradedCounterterm", "nabla",
]
