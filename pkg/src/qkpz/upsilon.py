"""Elementary differentials attached to decorated trees.

``upsilon_F`` is the classical recursion with commuting slot partials in
``u`` and ``dxu``.  ``upsilon_Fhat`` replaces those partials by the
non-commutative derivatives ``d/dv_alpha``; the derivative for the leftmost
child edge is applied first and the one for the rightmost edge last, which
is the order compatible with grafting new edges on the right.  Before those
derivatives act, the slot ``dxu`` is rewritten as ``v_x / q``; with that
reading the derivatives along edges without parameter order commute, as the
tree quotient requires.
``upsilon_V`` gives the coefficients of the lifted ``V_alpha``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import symexpr as sx
from .errors import Unsupported
from .symexpr import SymExpr
from .trees import XI, DecoratedTree, ParamIndex, as_param, symmetry_factor


@dataclass(frozen=True)
class Nonlinearity:
    """A right-hand side ``F_1 * 1 + F_xi * xi`` in the slot variables."""

    name: str
    f_one: SymExpr
    f_xi: SymExpr

    def part(self, noise: str) -> SymExpr:
        return self.f_xi if noise == XI else self.f_one


def reduced_f(full: bool = False) -> Nonlinearity:
    """``F = (f - a') dxu^2 (+ k dxu + h) + g xi``."""
    a1, f, g = sx.func("a", 1), sx.func("f"), sx.func("g")
    one = (f - a1) * sx.DXU ** 2
    if full:
        one = one + sx.func("k") * sx.DXU + sx.func("h")
    return Nonlinearity("F-full" if full else "F", one, g)


def fhat_hat_f(full: bool = False) -> SymExpr:
    """``f_hat = q (f - a') + a a'^2 v_cc + a a'' v_c``."""
    a, a1, a2, f = sx.func("a"), sx.func("a", 1), sx.func("a", 2), sx.func("f")
    return sx.Q * (f - a1) + a * a1 ** 2 * sx.v("cc") + a * a2 * sx.v("c")


def lifted_f(full: bool = False, xi_factor: SymExpr | None = None) -> Nonlinearity:
    """The transformed right-hand side ``F_hat``.

    ``F_hat = f_hat dxu^2 + q g xi + 2 a a' dxu v_cx + a' dxu v_x``
    (plus ``q (k dxu + h)`` when ``full``).  ``xi_factor`` overrides the
    factor ``q`` in front of ``g``; it exists for negative controls.
    """
    a, a1 = sx.func("a"), sx.func("a", 1)
    dxu = sx.DXU
    one = (fhat_hat_f(full) * dxu ** 2 + 2 * a * a1 * dxu * sx.v("cx")
           + a1 * dxu * sx.v("x"))
    if full:
        one = one + sx.Q * (sx.func("k") * dxu + sx.func("h"))
    g_hat = (sx.Q if xi_factor is None else xi_factor) * sx.func("g")
    return Nonlinearity("Fhat-full" if full else "Fhat", one, g_hat)


F_DEFAULT = reduced_f()
FHAT_DEFAULT = lifted_f()


def _require_saturated_shape(tree: DecoratedTree) -> None:
    if not tree.has_zero_decorations():
        raise Unsupported("elementary differentials of polynomial-decorated trees are not implemented")


# ---------------------------------------------------------------- Upsilon_F


def _slot_for(alpha: ParamIndex):
    if alpha.h:
        raise Unsupported("Upsilon_F is only defined on unparametrised trees")
    if alpha.st == (0, 0):
        return "u"
    if alpha.st == (0, 1):
        return "dxu"
    raise Unsupported(f"no slot for edge index {tuple(alpha.st)}")


@lru_cache(maxsize=None)
def _upsilon_f(tree: DecoratedTree, nl: Nonlinearity) -> SymExpr:
    expr = nl.part(tree.noise)
    for a, _ in tree.children:
        expr = sx.slot_partial(_slot_for(a), expr)
        if expr.is_zero():
            return expr
    for _, c in tree.children:
        expr = expr * _upsilon_f(c, nl)
    return expr


def upsilon_F(tree: DecoratedTree, nl: Nonlinearity | None = None) -> SymExpr:
    """Classical elementary differential with commuting slot partials."""
    _require_saturated_shape(tree)
    if not tree.is_unparametrised():
        raise Unsupported("Upsilon_F is only defined on unparametrised trees")
    return _upsilon_f(tree, nl or F_DEFAULT)


# ------------------------------------------------------------- Upsilon_Fhat


@lru_cache(maxsize=None)
def _v_reading(e: SymExpr) -> SymExpr:
    return sx.dxu_to_vx(e)


@lru_cache(maxsize=None)
def _upsilon_fhat(tree: DecoratedTree, nl: Nonlinearity) -> SymExpr:
    expr = _v_reading(nl.part(tree.noise))
    for a, _ in tree.children:
        expr = sx.v_derivative(a, expr)
        if expr.is_zero():
            return expr
    for _, c in tree.children:
        expr = expr * _upsilon_fhat(c, nl)
    return expr


def upsilon_Fhat(tree: DecoratedTree, nl: Nonlinearity | None = None) -> SymExpr:
    """Non-commutative elementary differential of the lifted right-hand side."""
    _require_saturated_shape(tree)
    return _upsilon_fhat(tree, nl or FHAT_DEFAULT)


def upsilon_V(alpha, tree: DecoratedTree, nl: Nonlinearity | None = None) -> SymExpr:
    """Coefficient function of ``V_alpha`` on a product of planted trees.

    ``(prod Upsilon_Fhat[tau_i]) * d_{alpha_n} ... d_{alpha_1} v_alpha`` with
    the leftmost edge's derivative innermost; ``alpha = 0`` gives ``U``.
    """
    _require_saturated_shape(tree)
    if not tree.is_planted_product() or tree.noise == XI:
        raise Unsupported("Upsilon_V is defined on products of planted trees only")
    nl = nl or FHAT_DEFAULT
    alpha = as_param(alpha)
    kids = tree.children
    if alpha.key() == (0, 0, 0):
        if not kids:
            raise Unsupported("Upsilon_U of the empty tree is the scalar u itself")
        # d_beta u = delta(beta, 0) / q
        expr = sx.QINV if kids[0][0].key() == (0, 0, 0) else sx.ZERO
        kids_left = kids[1:]
    else:
        expr = sx.v(alpha)
        kids_left = kids
    for a, _ in kids_left:
        if expr.is_zero():
            return expr
        expr = sx.v_derivative(a, expr)
    for _, c in kids:
        expr = expr * _upsilon_fhat(c, nl)
    return expr


def upsilon_U(tree: DecoratedTree, nl: Nonlinearity | None = None) -> SymExpr:
    return upsilon_V((0, 0, 0), tree, nl)


def coefficient(tree: DecoratedTree, kind: str = "Fhat", alpha=None,
                nl: Nonlinearity | None = None) -> SymExpr:
    """``Upsilon / S`` for the requested differential."""
    if kind == "F":
        val = upsilon_F(tree, nl)
    elif kind == "Fhat":
        val = upsilon_Fhat(tree, nl)
    else:
        val = upsilon_V(alpha, tree, nl)
    return val * Fraction(1, symmetry_factor(tree))


def upsilon_prefixed(tree: DecoratedTree, kind: str = "Fhat", nl=None) -> SymExpr:
    """Dispatch helper used by the CLI (``F``, ``Fhat`` or ``V:<name>``)."""
    if kind == "F":
        return upsilon_F(tree, nl)
    if kind == "Fhat":
        return upsilon_Fhat(tree, nl)
    if kind.startswith("V:"):
        return upsilon_V(sx.alpha_key(kind[2:]), tree, nl)
    if kind == "U":
        return upsilon_U(tree, nl)
    raise ValueError(f"unknown nonlinearity {kind!r}")
