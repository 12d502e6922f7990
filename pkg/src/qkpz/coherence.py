"""Tree expansion of the lifted fixed-point system and coefficient checks.

The unknowns are ``U = V_0``, the ``V_alpha`` and the lifted right-hand
side ``F_hat``.  Each is an ``Expansion``: a scalar part (coefficient of the
empty tree) plus coefficients on products of planted trees (``F_hat`` also
has noise-rooted trees).  Expansions are products of commuting quantities,
so every key is stored as its commutative representative (sibling edges
ordered by increasing parameter order); all planar arrangements produced by
a product land on the same key.

Polynomial trees are dropped and the scalar parts are injected by hand:
``K_beta F_hat = I_beta(F_hat) + v_beta * 1`` and ``DU = dxu * 1 + D U``
with ``dxu = v_x / q``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from math import factorial

from . import symexpr as sx
from .errors import TruncationTooSmall
from .rules import RuleSet, conforms
from .symexpr import SymExpr
from .trees import (
    XI, DecoratedTree, MultiIndex, ParamIndex, as_param, commutative_representative,
    pidx, plant, render_tree, sort_key, symmetry_factor, tree_product, unit,
)
from .upsilon import FHAT_DEFAULT, upsilon_Fhat, upsilon_V

UNIT = unit()
XI_TREE = DecoratedTree(XI)
_SAT = RuleSet.saturated()


class Expansion:
    """Truncated sum ``scalar * 1 + sum_tau coeff(tau) * tau``."""

    __slots__ = ("terms", "max_noises")

    def __init__(self, terms: dict | None = None, max_noises: int = 3):
        self.max_noises = max_noises
        self.terms: dict = {}
        for t, c in (terms or {}).items():
            self.add(t, c)

    @classmethod
    def scalar(cls, value, max_noises: int) -> "Expansion":
        return cls({UNIT: SymExpr._coerce(value)}, max_noises)

    def add(self, tree: DecoratedTree, coeff) -> None:
        if not coeff or tree.noise_count() > self.max_noises:
            return
        tree = commutative_representative(tree)
        prev = self.terms.get(tree)
        v = coeff if prev is None else prev + coeff
        if v:
            self.terms[tree] = v
        else:
            self.terms.pop(tree, None)

    @property
    def scalar_part(self) -> SymExpr:
        return self.terms.get(UNIT, sx.ZERO)

    def coeff(self, tree: DecoratedTree) -> SymExpr:
        return self.terms.get(commutative_representative(tree), sx.ZERO)

    def tilde(self) -> "Expansion":
        """The tree part (scalar part removed)."""
        out = Expansion(max_noises=self.max_noises)
        out.terms = {t: c for t, c in self.terms.items() if t != UNIT}
        return out

    def map_coeffs(self, fn) -> "Expansion":
        out = Expansion(max_noises=self.max_noises)
        for t, c in self.terms.items():
            out.add(t, fn(c))
        return out

    def __add__(self, other: "Expansion") -> "Expansion":
        out = Expansion(max_noises=self.max_noises)
        out.terms = dict(self.terms)
        for t, c in other.terms.items():
            out.add(t, c)
        return out

    def __sub__(self, other: "Expansion") -> "Expansion":
        return self + other.scale(-1)

    def scale(self, c) -> "Expansion":
        out = Expansion(max_noises=self.max_noises)
        for t, d in self.terms.items():
            out.add(t, d * c)
        return out

    def __mul__(self, other):
        if not isinstance(other, Expansion):
            return self.scale(other)
        out = Expansion(max_noises=self.max_noises)
        k = self.max_noises
        for t1, c1 in self.terms.items():
            n1 = t1.noise_count()
            for t2, c2 in other.terms.items():
                if n1 + t2.noise_count() > k:
                    continue
                if t1.noise == XI and t2.noise == XI:
                    continue
                out.add(tree_product(t1, t2), c1 * c2)
        return out

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return isinstance(other, Expansion) and self.terms == other.terms

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: sort_key(kv[0]))

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return "Expansion(" + " + ".join(
            f"[{c}]*{render_tree(t)}" for t, c in self.items()) + ")"


def lift_compose(phi: SymExpr, e: Expansion, tilde: bool = False) -> Expansion:
    """Lift of a function of ``u``: ``sum_k phi^(k)(u) / k! * (E - u)^k``.

    ``phi`` is a SymExpr in the u-functions; v-variables are constants here.
    The ``tilde`` variant drops the scalar part.
    """
    et = e.tilde()
    out = Expansion(max_noises=e.max_noises)
    deriv = phi
    power = Expansion.scalar(1, e.max_noises)
    for k in range(e.max_noises + 1):
        if k:
            deriv = sx.slot_partial("u", deriv)
            power = power * et
            if not power.terms:
                break
        if k == 0 and tilde:
            continue
        out = out + power.scale(deriv * Fraction(1, factorial(k)))
    return out


def plant_expansion(beta: ParamIndex, e: Expansion, rules: RuleSet | None = _SAT) -> Expansion:
    """``I_beta`` applied termwise; polynomial (empty-tree) terms are dropped.

    Only trees conforming to ``rules`` are planted, so every node below the
    root of an expansion tree is admissible.  Without this the noise-count
    truncation would not be finite (chains of single-child constant nodes).
    """
    out = Expansion(max_noises=e.max_noises)
    for t, c in e.terms.items():
        if t == UNIT or (rules is not None and not conforms(t, rules)):
            continue
        out.add(plant(beta, t), c)
    return out


def d_expansion(e: Expansion, m=(0, 1)) -> Expansion:
    """Abstract derivative ``D^m`` on products of planted trees.

    Leibniz over the root edges: ``m`` is distributed multinomially and
    each share is added to the space-time index of its edge.
    """
    m = MultiIndex(*m)
    out = Expansion(max_noises=e.max_noises)
    for t, c in e.terms.items():
        kids = t.children
        if not kids:
            continue
        for split in _splits(m, len(kids)):
            weight = m.factorial()
            new = []
            for (a, sub), s in zip(kids, split):
                weight //= s.factorial()
                new.append((ParamIndex(a.h, a.st + s), sub))
            out.add(DecoratedTree(t.noise, t.deco, tuple(new)), c * weight)
    return out


def _splits(m: MultiIndex, n: int):
    for ts in iproduct(*([range(m.t + 1)] * n)):
        if sum(ts) != m.t:
            continue
        for xs in iproduct(*([range(m.x + 1)] * n)):
            if sum(xs) == m.x:
                yield tuple(MultiIndex(a, b) for a, b in zip(ts, xs))


def d1_expansion(e: Expansion) -> Expansion:
    return d_expansion(e, (0, 1))


def times_xi(e: Expansion) -> Expansion:
    out = Expansion(max_noises=e.max_noises)
    for t, c in e.terms.items():
        if t.noise == XI:
            continue
        out.add(DecoratedTree(XI, t.deco, t.children), c)
    return out


def saturated_part(e: Expansion) -> Expansion:
    """Keep the scalar part and the trees that conform to the saturated rule."""
    out = Expansion(max_noises=e.max_noises)
    out.terms = {t: c for t, c in e.terms.items() if t == UNIT or conforms(t, _SAT)}
    return out


@dataclass
class System:
    """Solved truncated expansions of ``U``, ``V_alpha``, ``D U`` and ``F_hat``."""

    max_noises: int
    n_param: int
    U: Expansion
    V: dict
    DU: Expansion
    Fhat: Expansion
    iterations: int
    alphas: tuple = field(default_factory=tuple)


_NEEDED = (pidx(1, 0, 0), pidx(2, 0, 0), pidx(1, 0, 1), pidx(0, 0, 1))


def _funcs():
    return (sx.func("a"), sx.func("a", 1), sx.func("a", 2), sx.func("f"), sx.func("g"))


def fhat_lifted(U: Expansion, V: dict, DU: Expansion, xi_factor: Expansion | None = None) -> Expansion:
    """The lifted right-hand side evaluated on the current expansions.

    ``(1 - A'(U) V_c) F(U, DU) + (a a'^2)(U) V_cc DU^2 + (a a'')(U) V_c DU^2
    + 2 (a a')(U) V_cx DU + A'(U) V_x DU`` where ``F`` contains ``G(U) xi``.
    ``xi_factor`` replaces the lifted ``q`` in front of ``F`` (negative
    controls only).
    """
    k = U.max_noises
    a, a1, a2, f, g = _funcs()
    A1 = lift_compose(a1, U)
    Vc, Vcc, Vcx, Vx = (V[b] for b in _NEEDED)
    DU2 = DU * DU
    F = (lift_compose(f, U) - A1) * DU2 + times_xi(lift_compose(g, U))
    pre = Expansion.scalar(1, k) - A1 * Vc if xi_factor is None else xi_factor
    out = F * pre
    out = out + lift_compose(a * a1 ** 2, U) * DU2 * Vcc
    out = out + lift_compose(a * a2, U) * DU2 * Vc
    out = out + (lift_compose(a * a1, U) * DU * Vcx).scale(2)
    out = out + lift_compose(a1, U) * DU * Vx
    return saturated_part(out)


SLOTS = ("u", "dxu", "v_c", "v_cc", "v_cx", "v_x")


def fhat_taylor(U: Expansion, V: dict, DU: Expansion) -> Expansion:
    """Same right-hand side via the multi-slot Taylor formula.

    ``sum_k d^k F_hat / k! * prod_s (E_s - e_s)^{k_s}`` over the slots
    ``(u, dxu, v_c, v_cc, v_cx, v_x)``; an independent route to
    ``fhat_lifted`` (Faa di Bruno consistency).
    """
    k = U.max_noises
    sources = (U, DU) + tuple(V[b] for b in _NEEDED[:3]) + (V[_NEEDED[3]],)
    powers = {}
    for s, e in zip(SLOTS, sources):
        row = [Expansion.scalar(1, k)]
        et = e.tilde()
        for _ in range(k):
            row.append(row[-1] * et)
        powers[s] = row

    def taylor(phi: SymExpr) -> Expansion:
        out = Expansion(max_noises=k)
        for ks in _compositions(len(SLOTS), k):
            deriv = phi
            for s, n in zip(SLOTS, ks):
                for _ in range(n):
                    deriv = sx.slot_partial(s, deriv)
            if deriv.is_zero():
                continue
            term = Expansion.scalar(1, k)
            weight = 1
            for s, n in zip(SLOTS, ks):
                if n:
                    term = term * powers[s][n]
                    weight *= factorial(n)
            out = out + term.scale(deriv * Fraction(1, weight))
        return out

    out = taylor(FHAT_DEFAULT.f_one) + times_xi(taylor(FHAT_DEFAULT.f_xi))
    return saturated_part(out)


def _compositions(n: int, total: int):
    """All ``n``-tuples of naturals with sum at most ``total``."""
    if n == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(n - 1, total - first):
            yield (first,) + rest


def _v_rhs(alpha: ParamIndex, U: Expansion, Fhat: Expansion, n_param: int) -> Expansion:
    """``sum_l A~^l / l! (I_{alpha+l c} F_hat + v_{alpha + l c})``."""
    k = U.max_noises
    At = lift_compose(sx.func("a"), U, tilde=True)
    out = Expansion(max_noises=k)
    power = Expansion.scalar(1, k)
    for ell in range(n_param + 1):
        if ell:
            power = power * At
            if not power.terms:
                break
        beta = alpha.shift_h(ell)
        inner = plant_expansion(beta, Fhat)
        inner.add(UNIT, sx.v(beta))
        out = out + (power * inner).scale(Fraction(1, factorial(ell)))
    return out


def _check_truncation(max_noises: int, n_param: int) -> None:
    if max_noises < 0:
        raise ValueError("max_noises must be non-negative")
    if n_param < max_noises:
        raise TruncationTooSmall(
            f"N={n_param} is below max_noises={max_noises}: the A~^l terms with "
            f"l <= {max_noises} contribute and would be cut off")


def _wanted(alphas) -> tuple:
    return tuple(dict.fromkeys(tuple(_NEEDED) + tuple(as_param(a) for a in alphas)))


def expand_system(max_noises: int = 3, n_param: int | None = None,
                  alphas=(), max_iter: int | None = None, xi_factor=None) -> System:
    """Fixed-point expansion truncated at ``max_noises`` noises.

    The ``U`` equation contains ``a' v_c U~`` on its right-hand side (from
    ``A~ v_c``); that linear term is moved to the left and the rest divided
    by ``q = 1 - a' v_c`` exactly.  Each sweep fixes the coefficients of one
    more noise level.
    """
    k = max_noises
    n_param = k if n_param is None else n_param
    _check_truncation(k, n_param)
    wanted = _wanted(alphas)
    a1 = sx.func("a", 1)
    U = Expansion(max_noises=k)
    V = {b: Expansion.scalar(sx.v(b), k) for b in wanted}
    DU = Expansion.scalar(sx.DXU, k)
    Fhat = Expansion(max_noises=k)
    limit = max_iter or 2 * k + 4
    for it in range(1, limit + 1):
        Fhat_new = fhat_lifted(U, V, DU, xi_factor)
        rhs = _v_rhs(pidx(), U, Fhat_new, n_param).tilde()
        linear = U.scale(a1 * sx.v("c"))
        U_new = (rhs - linear).scale(sx.QINV)
        V_new = {b: _v_rhs(b, U_new, Fhat_new, n_param) for b in wanted}
        DU_new = d1_expansion(U_new)
        DU_new.add(UNIT, sx.DXU)
        done = (U_new == U and Fhat_new == Fhat
                and all(V_new[b] == V[b] for b in wanted))
        U, V, DU, Fhat = U_new, V_new, DU_new, Fhat_new
        if done:
            return System(k, n_param, U, V, DU, Fhat, it, wanted)
    raise TruncationTooSmall(f"expansion did not stabilise in {limit} iterations")


def expand_system_neumann(max_noises: int = 2, order: int | None = None,
                          n_param: int | None = None, alphas=()) -> System:
    """Oracle for the linear solve: no division at all.

    The ``U`` equation is iterated as written, so ``1/q`` builds up as the
    geometric series in ``a' v_c``.  All coefficients are kept as
    polynomials truncated at ``v_c`` degree ``order``; the result agrees
    with ``vc_series`` of the exact solution.
    """
    k = max_noises
    order = k + 1 if order is None else order
    n_param = k if n_param is None else n_param
    _check_truncation(k, n_param)
    wanted = _wanted(alphas)

    def trunc(e: Expansion) -> Expansion:
        return e.map_coeffs(lambda c: sx.truncate_vc(c, order))

    U = Expansion(max_noises=k)
    V = {b: Expansion.scalar(sx.v(b), k) for b in wanted}
    dxu = sx.vc_series(sx.dxu_to_vx(sx.DXU), order)
    DU = Expansion.scalar(dxu, k)
    Fhat = Expansion(max_noises=k)
    limit = (k + 1) * (order + 2) + 4
    for it in range(1, limit + 1):
        Fhat_new = trunc(fhat_lifted(U, V, DU))
        U_new = trunc(_v_rhs(pidx(), U, Fhat_new, n_param).tilde())
        V_new = {b: trunc(_v_rhs(b, U_new, Fhat_new, n_param)) for b in wanted}
        DU_new = d1_expansion(U_new)
        DU_new.add(UNIT, dxu)
        done = (U_new == U and Fhat_new == Fhat
                and all(V_new[b] == V[b] for b in wanted))
        U, V, DU, Fhat = U_new, V_new, DU_new, Fhat_new
        if done:
            return System(k, n_param, U, V, DU, Fhat, it, wanted)
    raise TruncationTooSmall(f"Neumann iteration did not stabilise in {limit} sweeps")


# ------------------------------------------------------------------ reports


@dataclass(frozen=True)
class CoherenceEntry:
    expansion: str
    tree: DecoratedTree
    expected: SymExpr
    got: SymExpr
    ok: bool

    def to_json(self) -> dict:
        return {
            "expansion": self.expansion,
            "tree": render_tree(self.tree),
            "symmetry": symmetry_factor(self.tree),
            "expected": sx.render(self.expected),
            "got": sx.render(self.got),
            "ok": self.ok,
        }


@dataclass
class CoherenceReport:
    max_noises: int
    entries: list

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def failures(self) -> list:
        return [e for e in self.entries if not e.ok]

    def counts(self) -> dict:
        out: dict = {}
        for e in self.entries:
            n, bad = out.get(e.expansion, (0, 0))
            out[e.expansion] = (n + 1, bad + (not e.ok))
        return out

    def to_json(self) -> dict:
        return {
            "max_noises": self.max_noises,
            "ok": self.ok,
            "checked": len(self.entries),
            "failed": len(self.failures),
            "entries": [e.to_json() for e in self.entries],
        }

    def to_text(self) -> str:
        lines = [f"coherence up to {self.max_noises} noises: "
                 f"{len(self.entries) - len(self.failures)}/{len(self.entries)} coefficients agree"]
        for name, (n, bad) in self.counts().items():
            lines.append(f"  {name}: {n} trees, {bad} mismatches")
        for e in self.failures:
            lines.append(f"  MISMATCH {e.expansion} {render_tree(e.tree)}: "
                         f"expansion {sx.render(e.got)} vs Upsilon/S {sx.render(e.expected)}")
        return "\n".join(lines)


def _same(expected: SymExpr, got: SymExpr) -> bool:
    # the one place where the slot dxu is converted to v_x / q
    return sx.dxu_to_vx(expected) == sx.dxu_to_vx(got)


def expected_coefficient(name: str, tree: DecoratedTree, nl=None) -> SymExpr:
    """``Upsilon / S`` for the expansion called ``name`` (``U``, ``Fhat`` or ``V:<alpha>``)."""
    if name == "Fhat":
        val = upsilon_Fhat(tree, nl)
    elif name == "U":
        val = upsilon_V((0, 0, 0), tree, nl)
    else:
        val = upsilon_V(sx.alpha_key(name[2:]), tree, nl)
    return val * Fraction(1, symmetry_factor(tree))


def check_coherence(max_noises: int = 3, system: System | None = None,
                    alphas=(), nl=None) -> CoherenceReport:
    """Compare every expansion coefficient with ``Upsilon / S``.

    Scalar parts are compared too: ``V_alpha`` has ``v_alpha``, ``F_hat``
    has ``F_hat_1`` and ``U`` has none (``u`` itself is implicit).  ``nl`` overrides the lifted
    right-hand side used on the ``Upsilon`` side (negative controls).
    """
    system = system or expand_system(max_noises, alphas=alphas)
    entries = []

    def run(name, exp):
        for t, c in exp.items():
            if t == UNIT:
                if name == "Fhat":
                    expected = (nl or FHAT_DEFAULT).f_one
                elif name.startswith("V:"):
                    expected = sx.v(sx.alpha_key(name[2:]))
                else:
                    expected = sx.ZERO
            else:
                expected = expected_coefficient(name, t, nl)
            entries.append(CoherenceEntry(name, t, expected, c, _same(expected, c)))

    run("U", system.U)
    for b in system.alphas:
        run("V:" + sx.v_name(b.key()), system.V[b])
    run("Fhat", system.Fhat)
    return CoherenceReport(system.max_noises, entries)


# ------------------------------------------------- planted coefficients


def planted_coefficient(alpha, m=(0, 0), beta=None, system: System | None = None) -> SymExpr:
    """Coefficient of ``I_alpha F_hat`` in ``D^m U`` (or in ``V_beta``).

    Read off from the expansion on the planted noise: the coefficient of
    ``I_alpha(Xi)`` divided by ``<F_hat, Xi> = q g``.
    """
    alpha = as_param(alpha)
    if beta is not None:
        beta = as_param(beta)
    if system is None:
        system = expand_system(1, alphas=() if beta is None else (beta,))
    target = plant(alpha, XI_TREE)
    if beta is None:
        exp = system.U if tuple(m) == (0, 0) else d_expansion(system.U, m)
    else:
        exp = system.U if beta.key() == (0, 0, 0) else system.V[beta]
    return exp.coeff(target) / system.Fhat.coeff(XI_TREE)


def planted_coefficient_expected(alpha, m=(0, 0), beta=None) -> SymExpr:
    """Closed forms: ``delta(alpha, (0, m)) / q`` for ``D^m U`` and
    ``delta(alpha, beta) + a' v_{beta + c} delta(alpha, 0) / q`` for ``V_beta``."""
    alpha = as_param(alpha)
    if beta is None:
        hit = alpha.h == 0 and tuple(alpha.st) == tuple(m)
        return sx.QINV if hit else sx.ZERO
    beta = as_param(beta)
    out = sx.ONE if alpha == beta else sx.ZERO
    if alpha.key() == (0, 0, 0):
        out = out + sx.func("a", 1) * sx.v(beta.shift_h(1)) * sx.QINV
    return out


__all__ = [
    "Expansion", "System", "CoherenceEntry", "CoherenceReport", "lift_compose",
    "plant_expansion", "d_expansion", "d1_expansion", "times_xi", "fhat_lifted",
    "fhat_taylor", "expand_system", "expand_system_neumann", "check_coherence",
    "expected_coefficient", "planted_coefficient", "planted_coefficient_expected",
]
