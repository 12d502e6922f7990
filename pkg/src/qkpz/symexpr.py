"""Exact rational expressions in u-functions, v-variables and q.

Every expression is stored as ``N / q**p`` with ``N`` a polynomial (exact
rational coefficients) in the atoms

* ``a^(n), f^(n), g^(n), k^(n), h^(n)`` -- derivatives of functions of u,
* ``dxu`` -- the spatial derivative of u used as an independent slot,
* ``v_alpha`` -- one variable per parameter index ``alpha = (h, t, x)``,

and ``q = 1 - a' v_c`` never appears in ``N``.  The fraction is kept reduced:
when ``p > 0`` the numerator is not divisible by ``q``.  This makes the
representation a normal form, so equality is structural.

Two nilpotent grading symbols ``D1`` and ``D2`` (products of graded terms
vanish) record derivatives falling on renormalisation constants.
"""
from __future__ import annotations

import os
import re
from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import NotDivisible, ParseError

try:  # pragma: no cover - exercised implicitly
    if os.environ.get("QKPZ_PURE_PYTHON") == "1":
        raise ImportError("compiled kernels disabled")
    from ._speedups import mono_mul, poly_add_into, poly_mul

    BACKEND = "compiled"
except ImportError:  # pragma: no cover
    from ._kernels import mono_mul, poly_add_into, poly_mul

    BACKEND = "python"

FUNC_BASES = ("a", "f", "g", "k", "h")
DXU_CODE = 1000
_V_BASE = 2000

A1 = 1  # code of a'
A2 = 2  # code of a''
VC = _V_BASE + 100  # code of v_c
GRADES = (1, 2)


def func_code(base: str, n: int = 0) -> int:
    if n < 0 or n >= 100:
        raise ValueError("derivative order out of range")
    return 100 * FUNC_BASES.index(base) + n


def v_code(alpha) -> int:
    h, t, x = alpha_key(alpha)
    if max(h, t, x) >= 10:
        raise ValueError(f"parameter index {alpha} out of range")
    return _V_BASE + 100 * h + 10 * t + x


def decode(code: int):
    """Return ``('func', base, n)``, ``('dxu',)`` or ``('v', (h, t, x))``."""
    if code < DXU_CODE:
        return ("func", FUNC_BASES[code // 100], code % 100)
    if code == DXU_CODE:
        return ("dxu",)
    r = code - _V_BASE
    return ("v", (r // 100, (r // 10) % 10, r % 10))


_V_NAMES = {"": (0, 0, 0)}


def alpha_key(alpha) -> tuple:
    """Normalise a parameter index to a plain ``(h, t, x)`` triple.

    Accepts objects with ``h`` and ``st`` attributes, 3-tuples, and names
    such as ``"cx"`` or ``"v_cx"`` (letters ``c``, ``t``, ``x`` counted).
    """
    if isinstance(alpha, str):
        if alpha == "v" or alpha.startswith("v_"):
            alpha = alpha[2:]
        if not re.fullmatch(r"[ctx]*", alpha):
            raise ValueError(f"bad v-index name {alpha!r}")
        return (alpha.count("c"), alpha.count("t"), alpha.count("x"))
    st = getattr(alpha, "st", None)
    if st is not None:
        return (int(alpha.h), int(st[0]), int(st[1]))
    h, t, x = alpha
    return (int(h), int(t), int(x))


def v_name(key: tuple) -> str:
    h, t, x = key
    suffix = "c" * h + "t" * t + "x" * x
    return "v_" + suffix if suffix else "v"


# ---------------------------------------------------------------- raw polys

_ONE_MONO: tuple = ()
_POLY_ONE = {(0, _ONE_MONO): 1}
_POLY_Q = {(0, _ONE_MONO): 1, (0, ((A1, 1), (VC, 1))): -1}


def _atom_poly(code: int, exp: int = 1) -> dict:
    return {(0, ((code, exp),)): 1}


@lru_cache(maxsize=None)
def _qpow_items(k: int) -> tuple:
    out = dict(_POLY_ONE)
    for _ in range(k):
        out = poly_mul(out, _POLY_Q)
    return tuple(out.items())


def _qpow(k: int) -> dict:
    return dict(_qpow_items(k))


def _split_vc(m: tuple):
    for i, (c, e) in enumerate(m):
        if c == VC:
            return e, m[:i] + m[i + 1:]
    return 0, m


def _div_q(num: dict):
    """Exact quotient of ``num`` by ``q``, or ``None`` if not divisible."""
    if not num:
        return {}
    cols: dict = {}
    for (g, m), c in num.items():
        j, rest = _split_vc(m)
        cols.setdefault(g, {}).setdefault(j, {})[rest] = c
    a1 = ((A1, 1),)
    out: dict = {}
    for g, by_j in cols.items():
        top = max(by_j)
        if top == 0:
            return None
        prev: dict = {}
        for j in range(top + 1):
            cur = dict(by_j.get(j, {}))
            for r, c in prev.items():
                key = mono_mul(r, a1)
                v = cur.get(key, 0) + c
                if v:
                    cur[key] = v
                else:
                    cur.pop(key, None)
            if j == top:
                if cur:
                    return None
                break
            for r, c in cur.items():
                m = mono_mul(r, ((VC, j),)) if j else r
                out[(g, m)] = c
            prev = cur
    return out


def _reduce(num: dict, p: int):
    while p > 0:
        quo = _div_q(num)
        if quo is None:
            break
        num, p = quo, p - 1
    if not num:
        p = 0
    return num, p


def _mono_without(m: tuple, i: int) -> tuple:
    c, e = m[i]
    if e == 1:
        return m[:i] + m[i + 1:]
    return m[:i] + ((c, e - 1),) + m[i + 1:]


@lru_cache(maxsize=None)
def _atom_vderiv(code: int, alpha: tuple):
    """Numerator ``A`` with ``d/dv_alpha atom = A / q`` (``None`` if zero)."""
    kind = decode(code)
    out: dict = {}
    zero = alpha == (0, 0, 0)
    if kind[0] == "func":
        if zero:
            out[(0, ((code + 1, 1),))] = 1
    elif kind[0] == "dxu":
        if alpha == (0, 0, 1):
            out[(0, _ONE_MONO)] = 1
    else:
        h, t, x = kind[1]
        if zero:
            vkey = v_code((h + 1, t, x))
            out[(0, tuple(sorted(((A1, 1), (vkey, 1)))))] = 1
        if alpha == kind[1]:
            poly_add_into(out, _POLY_Q)
    return tuple(out.items()) if out else None


def _deriv_num(num: dict, atom_rule) -> dict:
    """Apply a derivation given per atom by ``atom_rule(code) -> poly|None``."""
    out: dict = {}
    for (g, m), c in num.items():
        for i, (code, e) in enumerate(m):
            rule = atom_rule(code)
            if rule is None:
                continue
            rest = {(g, _mono_without(m, i)): c * e}
            poly_add_into(out, poly_mul(rest, dict(rule)))
    return out


# ------------------------------------------------------------------- class


class SymExpr:
    """Immutable normal-form expression ``numerator / q**p``."""

    __slots__ = ("_num", "_p", "_hash")

    def __init__(self, num: dict | None = None, p: int = 0, *, _reduced=False):
        num = {k: v for k, v in (num or {}).items() if v}
        if p < 0:
            num = poly_mul(num, _qpow(-p))
            p = 0
        if not _reduced:
            num, p = _reduce(num, p)
        self._num = num
        self._p = p if num else 0
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, c) -> "SymExpr":
        c = Fraction(c)
        return cls({(0, _ONE_MONO): c} if c else {}, 0, _reduced=True)

    @classmethod
    def _coerce(cls, other) -> "SymExpr":
        if isinstance(other, SymExpr):
            return other
        if isinstance(other, (int, Fraction)):
            return cls.const(other)
        return NotImplemented

    # accessors
    @property
    def qpower(self) -> int:
        """Power of ``q`` in the denominator."""
        return self._p

    @property
    def numerator(self) -> dict:
        return dict(self._num)

    def is_zero(self) -> bool:
        return not self._num

    def grades(self) -> set:
        return {g for g, _ in self._num}

    def graded_part(self, grade: int) -> "SymExpr":
        """Coefficient of the grading symbol ``grade`` (0 for ungraded)."""
        num = {(0, m): c for (g, m), c in self._num.items() if g == grade}
        return SymExpr(num, self._p)

    def atoms(self) -> set:
        return {code for (_, m) in self._num for code, _ in m}

    # arithmetic
    def __add__(self, other):
        other = SymExpr._coerce(other)
        if other is NotImplemented:
            return other
        if not other._num:
            return self
        if not self._num:
            return other
        p = max(self._p, other._p)
        acc = poly_mul(self._num, _qpow(p - self._p)) if p > self._p else dict(self._num)
        rhs = poly_mul(other._num, _qpow(p - other._p)) if p > other._p else other._num
        poly_add_into(acc, rhs)
        return SymExpr(acc, p)

    __radd__ = __add__

    def __neg__(self):
        return SymExpr({k: -v for k, v in self._num.items()}, self._p, _reduced=True)

    def __sub__(self, other):
        other = SymExpr._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return ZERO
            return SymExpr({k: v * other for k, v in self._num.items()}, self._p, _reduced=True)
        other = SymExpr._coerce(other)
        if other is NotImplemented:
            return other
        if not self._num or not other._num:
            return ZERO
        return SymExpr(poly_mul(self._num, other._num), self._p + other._p)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if self == Q:
                return SymExpr(dict(_POLY_ONE), -n, _reduced=True)
            raise ValueError("negative powers only supported for q")
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        other = SymExpr._coerce(other)
        if other is NotImplemented:
            return other
        return divide(self, other)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymExpr.const(other)
        if not isinstance(other, SymExpr):
            return NotImplemented
        return self._p == other._p and self._num == other._num

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._p, frozenset(self._num.items())))
        return self._hash

    def __repr__(self):
        return f"SymExpr({render(self)!r})"

    def __str__(self):
        return render(self)

    def __bool__(self):
        return bool(self._num)


ZERO = SymExpr({}, 0, _reduced=True)
ONE = SymExpr(dict(_POLY_ONE), 0, _reduced=True)
Q = SymExpr(dict(_POLY_Q), 0, _reduced=True)
QINV = SymExpr(dict(_POLY_ONE), 1, _reduced=True)
DXU = SymExpr(_atom_poly(DXU_CODE), 0, _reduced=True)


def func(base: str, n: int = 0) -> SymExpr:
    """``base^(n)(u)`` for ``base`` in ``a, f, g, k, h``."""
    return SymExpr(_atom_poly(func_code(base, n)), 0, _reduced=True)


def v(alpha) -> SymExpr:
    """The variable ``v_alpha``."""
    return SymExpr(_atom_poly(v_code(alpha)), 0, _reduced=True)


def grade_symbol(grade: int) -> SymExpr:
    """Nilpotent grading symbol ``D1`` or ``D2``."""
    if grade not in GRADES:
        raise ValueError("grade must be 1 or 2")
    return SymExpr({(grade, _ONE_MONO): 1}, 0, _reduced=True)


def const(c) -> SymExpr:
    return SymExpr.const(c)


def p_c() -> SymExpr:
    """Abbreviation ``a'' v_c + (a')^2 v_cc``, so that ``d_v q = -p_c / q``."""
    return func("a", 2) * v("c") + func("a", 1) ** 2 * v("cc")


def normalize(e: SymExpr) -> SymExpr:
    """Return the normal form (expressions are always stored normalised)."""
    return SymExpr(e._num, e._p)


def equal(e1, e2) -> bool:
    return SymExpr._coerce(e1) == SymExpr._coerce(e2)


# ------------------------------------------------------------ derivatives


def v_derivative(alpha, e: SymExpr) -> SymExpr:
    """Non-commutative derivative ``d/dv_alpha`` extended by the chain rule.

    On atoms: ``d_alpha F(u) = delta(alpha, 0) F'(u) / q``,
    ``d_alpha dxu = delta(alpha, (0,0,1)) / q`` and
    ``d_alpha v_beta = delta(alpha, 0) a' v_{beta + c} / q + delta(alpha, beta)``.
    """
    if any(g for g, _ in e._num):
        raise ValueError("v_derivative is not defined on graded expressions")
    if not e._num:
        return ZERO
    key = alpha_key(alpha)

    def rule(code):
        return _atom_vderiv(code, key)

    dnum = _deriv_num(e._num, rule)  # dN = dnum / q
    if e._p == 0:
        return SymExpr(dnum, 1)
    dq = _deriv_num(_POLY_Q, rule)  # dq = dq / q
    acc = poly_mul(dnum, _POLY_Q)
    poly_add_into(acc, poly_mul(e._num, dq), -e._p)
    return SymExpr(acc, e._p + 2)


def v_derivatives(alphas, e: SymExpr) -> SymExpr:
    """Apply ``d_{alphas[0]}`` first, then ``d_{alphas[1]}``, and so on."""
    for a in alphas:
        if not e._num:
            return e
        e = v_derivative(a, e)
    return e


def u_derivatives(alphas) -> SymExpr:
    """``d_{alphas[-1]} ... d_{alphas[0]} u``; the first step is ``delta(alpha, 0) / q``."""
    alphas = list(alphas)
    if not alphas:
        raise ValueError("u itself is not an expression atom")
    e = QINV if alpha_key(alphas[0]) == (0, 0, 0) else ZERO
    return v_derivatives(alphas[1:], e)


SLOTS = ("u", "dxu", "v_c", "v_cc", "v_cx", "v_x")


def _slot_code(slot) -> int | None:
    if slot == "u":
        return None
    if slot in ("dxu", "d_x u", "∂ₓu"):
        return DXU_CODE
    if isinstance(slot, str):
        name = slot[2:] if slot.startswith("v_") else ("" if slot == "v" else slot)
        return v_code(name)
    return v_code(slot)


def slot_partial(slot, e: SymExpr) -> SymExpr:
    """Ordinary partial derivative in one argument slot.

    ``slot`` is ``"u"``, ``"dxu"`` or a v-variable (``"v_c"``, a triple, ...).
    ``dxu`` is an independent symbol here; ``q`` depends on ``u`` and ``v_c``.
    """
    if not e._num:
        return ZERO
    code = _slot_code(slot)
    if code is None:
        def rule(c):
            return ((( 0, ((c + 1, 1),)), 1),) if c < DXU_CODE else None
    else:
        def rule(c):
            return (((0, _ONE_MONO), 1),) if c == code else None
    dnum = _deriv_num(e._num, rule)
    if e._p == 0:
        return SymExpr(dnum, 0)
    dq = _deriv_num(_POLY_Q, rule)
    acc = poly_mul(dnum, _POLY_Q)
    poly_add_into(acc, poly_mul(e._num, dq), -e._p)
    return SymExpr(acc, e._p + 1)


def dxu_to_vx(e: SymExpr) -> SymExpr:
    """Rewrite the slot symbol ``dxu`` as ``v_x / q``."""
    vx = v_code("x")
    kmax = 0
    for _, m in e._num:
        for c, ex in m:
            if c == DXU_CODE:
                kmax = max(kmax, ex)
    if kmax == 0:
        return e
    acc: dict = {}
    for (g, m), c in e._num.items():
        k = 0
        rest = m
        for i, (code, ex) in enumerate(m):
            if code == DXU_CODE:
                k = ex
                rest = m[:i] + m[i + 1:]
                break
        if k:
            rest = mono_mul(rest, ((vx, k),))
        term = {(g, rest): c}
        if kmax - k:
            term = poly_mul(term, _qpow(kmax - k))
        poly_add_into(acc, term)
    return SymExpr(acc, e._p + kmax)


def vc_degree(e: SymExpr) -> int:
    """Largest power of ``v_c`` in the numerator."""
    return max((_split_vc(m)[0] for _, m in e._num), default=0)


def truncate_vc(e: SymExpr, order: int) -> SymExpr:
    """Drop numerator monomials with ``v_c`` degree above ``order`` (needs ``p == 0``)."""
    if e._p:
        raise ValueError("truncate_vc expects a polynomial (no q in the denominator)")
    return SymExpr({k: c for k, c in e._num.items() if _split_vc(k[1])[0] <= order}, 0)


def vc_series(e: SymExpr, order: int) -> SymExpr:
    """Power series of ``e`` in ``v_c`` up to degree ``order``.

    ``1/q**p`` is expanded as the finite geometric sum
    ``sum_k binom(p+k-1, k) (a' v_c)**k``; the result is a polynomial.
    """
    num = SymExpr(dict(e._num), 0, _reduced=True)
    if e._p == 0:
        return truncate_vc(num, order)
    t = SymExpr({(0, ((A1, 1), (VC, 1))): 1}, 0, _reduced=True)
    series = ZERO
    power = ONE
    for k in range(order + 1):
        series = series + power * Fraction(comb(e._p + k - 1, k))
        power = power * t
    return truncate_vc(num * series, order)


def evaluate(e: SymExpr, point) -> Fraction:
    """Exact value of an ungraded expression; ``point(code)`` gives each atom's value."""
    if any(g for g, _ in e._num):
        raise ValueError("cannot evaluate a graded expression")
    total = Fraction(0)
    for (_, m), c in e._num.items():
        term = Fraction(c)
        for code, k in m:
            term *= Fraction(point(code)) ** k
        total += term
    if e._p:
        q = 1 - Fraction(point(A1)) * Fraction(point(VC))
        total /= q ** e._p
    return total


def substitute_constant(e: SymExpr, base: str) -> SymExpr:
    """Set every derivative of ``base`` (order >= 1) to zero."""
    lo, hi = func_code(base, 1), func_code(base, 99)
    num = {k: c for k, c in e._num.items() if not any(lo <= code <= hi for code, _ in k[1])}
    return SymExpr(num, e._p)


def _extract_q(num: dict):
    k = 0
    while True:
        quo = _div_q(num)
        if quo is None or not quo:
            return num, k
        num, k = quo, k + 1


def divide(a: SymExpr, b: SymExpr) -> SymExpr:
    """Exact quotient ``a / b`` when ``b`` is ``q**j`` times a monomial."""
    if b.is_zero():
        raise ZeroDivisionError("division by zero expression")
    num_b, k = _extract_q(b._num)
    if len(num_b) != 1:
        raise NotDivisible(f"divisor {b} is not a monomial times a power of q")
    ((gb, mb), cb), = num_b.items()
    if gb:
        raise NotDivisible("cannot divide by a graded expression")
    out: dict = {}
    for (g, m), c in a._num.items():
        d = dict(m)
        for code, e in mb:
            if d.get(code, 0) < e:
                raise NotDivisible(f"{a} is not divisible by {b}")
            d[code] -= e
        mono = tuple(sorted((cc, ee) for cc, ee in d.items() if ee))
        out[(g, mono)] = Fraction(c) / cb
    return SymExpr(out, a._p - b._p + k)


# ---------------------------------------------------------------- rendering

_PRIMES = {0: "", 1: "'", 2: "''", 3: "'''"}


def atom_name(code: int) -> str:
    kind = decode(code)
    if kind[0] == "func":
        n = kind[2]
        return kind[1] + (_PRIMES[n] if n in _PRIMES else f"^({n})")
    if kind[0] == "dxu":
        return "dxu"
    return v_name(kind[1])


def _render_mono(m: tuple) -> list:
    parts = []
    for code, e in m:
        name = atom_name(code)
        parts.append(name if e == 1 else f"{name}^{e}")
    return parts


def _term_order(item):
    (g, m), _ = item
    return (g, -sum(e for _, e in m), m)


def render_numerator(num: dict) -> str:
    if not num:
        return "0"
    chunks = []
    for (g, m), c in sorted(num.items(), key=_term_order):
        c = Fraction(c)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        factors = _render_mono(m)
        if g:
            factors.append(f"D{g}")
        if mag != 1 or not factors:
            factors.insert(0, str(mag))
        chunks.append((sign, "*".join(factors)))
    text = ("-" if chunks[0][0] == "-" else "") + chunks[0][1]
    for sign, body in chunks[1:]:
        text += f" {sign} {body}"
    return text


def render(e: SymExpr) -> str:
    """Deterministic text form, e.g. ``g*g'`` or ``(a'*g)/q^2``."""
    body = render_numerator(e._num)
    if e._p == 0:
        return body
    den = "q" if e._p == 1 else f"q^{e._p}"
    if len(e._num) > 1 or body.startswith("-"):
        body = f"({body})"
    return f"{body}/{den}"


def to_json(e: SymExpr) -> dict:
    """JSON-ready AST: ``{"qpow": p, "terms": [...]}``."""
    terms = []
    for (g, m), c in sorted(e._num.items(), key=_term_order):
        c = Fraction(c)
        terms.append({
            "coeff": str(c),
            "grade": g,
            "factors": [[atom_name(code), ex] for code, ex in m],
        })
    return {"qpow": e._p, "terms": terms, "text": render(e)}


# ------------------------------------------------------------------ parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<func>[afgkh])(?P<primes>'*)(?:\^\((?P<order>\d+)\))?(?![a-z_])"
    r"|(?P<v>v(?:_[ctx]+)?)|(?P<dxu>dxu)|(?P<q>q)|(?P<grade>D[12])|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError("unexpected character", pos, {"atom", "number", "operator"})
            self.toks.append((m, m.start() + len(m.group(0)) - len(m.group(0).lstrip())))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def op(self, ch):
        m = self.peek()
        if m is not None and m.group("op") == ch:
            self.i += 1
            return True
        return False

    def expr(self):
        neg = self.op("-")
        if not neg:
            self.op("+")
        out = self.term()
        if neg:
            out = -out
        while True:
            if self.op("+"):
                out = out + self.term()
            elif self.op("-"):
                out = out - self.term()
            else:
                return out

    def term(self):
        out = self.power()
        while True:
            if self.op("*"):
                out = out * self.power()
            elif self.op("/"):
                out = out / self.power()
            else:
                return out

    def power(self):
        base = self.atom()
        if self.op("^"):
            neg = self.op("-")
            m = self.peek()
            if m is None or m.group("num") is None:
                raise ParseError("expected exponent", self.pos(), {"integer"})
            self.i += 1
            n = int(m.group("num"))
            return base ** (-n if neg else n)
        return base

    def atom(self):
        m = self.peek()
        if m is None:
            raise ParseError("unexpected end of input", self.pos(), {"atom", "number", "("})
        if self.op("("):
            out = self.expr()
            if not self.op(")"):
                raise ParseError("unbalanced parenthesis", self.pos(), {")"})
            return out
        self.i += 1
        if m.group("num") is not None:
            return SymExpr.const(int(m.group("num")))
        if m.group("func") is not None:
            n = int(m.group("order")) if m.group("order") else len(m.group("primes"))
            return func(m.group("func"), n)
        if m.group("v") is not None:
            name = m.group("v")
            return v(name[2:] if "_" in name else "")
        if m.group("dxu") is not None:
            return DXU
        if m.group("q") is not None:
            return Q
        if m.group("grade") is not None:
            return grade_symbol(int(m.group("grade")[1]))
        self.i -= 1
        raise ParseError("unexpected token", self.pos(), {"atom", "number", "("})


def parse_expr(text: str) -> SymExpr:
    """Parse e.g. ``"q*g*g' - (a''*v_c + a'^2*v_cc)*g^2"``."""
    p = _Parser(text)
    out = p.expr()
    if p.i != len(p.toks):
        raise ParseError("trailing input", p.pos(), {"+", "-", "*", "/"})
    return out
