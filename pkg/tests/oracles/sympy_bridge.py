"""sympy translation of ``SymExpr`` and an independent v-derivative.

The derivative is the total derivative along the implicit dependence
``d u / d v_alpha = delta(alpha, 0) / q`` and ``d dxu / d v_x = 1 / q``,
written directly with sympy partial derivatives.
"""
from __future__ import annotations

import sympy as sp

from qkpz import symexpr as sx

U = sp.Symbol("u")
DXU = sp.Symbol("dxu")
_FUNCS = {b: sp.Function(b) for b in sx.FUNC_BASES}


def v_sym(key) -> sp.Symbol:
    return sp.Symbol(sx.v_name(tuple(key)))


def func_sym(base: str, n: int = 0):
    f = _FUNCS[base](U)
    return sp.diff(f, U, n) if n else f


def q_sym():
    return 1 - func_sym("a", 1) * v_sym((1, 0, 0))


def atom(code: int):
    kind = sx.decode(code)
    if kind[0] == "func":
        return func_sym(kind[1], kind[2])
    if kind[0] == "dxu":
        return DXU
    return v_sym(kind[1])


def to_sympy(e: sx.SymExpr):
    if any(g for g, _ in e._num):
        raise ValueError("graded expressions have no sympy image")
    num = 0
    for (_, m), c in e._num.items():
        term = sp.Rational(c.numerator, c.denominator) if hasattr(c, "numerator") else c
        for code, k in m:
            term *= atom(code) ** k
        num += term
    return num / q_sym() ** e._p


def _v_symbols(expr) -> list:
    out = []
    for s in expr.free_symbols:
        name = s.name
        if name == "v" or name.startswith("v_"):
            out.append(s)
    return out


def _key(sym) -> tuple:
    return sx.alpha_key(sym.name)


def v_derivative(alpha, expr):
    h, t, x = sx.alpha_key(alpha)
    q = q_sym()
    out = sp.diff(expr, v_sym((h, t, x)))
    if (h, t, x) == (0, 0, 0):
        drift = sp.diff(expr, U)
        for s in _v_symbols(expr):
            kh, kt, kx = _key(s)
            drift += func_sym("a", 1) * v_sym((kh + 1, kt, kx)) * sp.diff(expr, s)
        out += drift / q
    if (h, t, x) == (0, 0, 1):
        out += sp.diff(expr, DXU) / q
    return out


def equal(e1, e2) -> bool:
    return sp.simplify(sp.together(e1 - e2)) == 0
