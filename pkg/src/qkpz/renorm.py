"""Counterterms, chain-rule constraints, locality checks and the Ito constant.

Prefixes produced by covariant derivatives act on renormalisation constants,
not on elementary differentials.  They are evaluated with two nilpotent
grading symbols ``D1`` and ``D2`` standing for a derivative of the constant
in the slot of the first or second argument:

* ``d(a .) X = X + a (D1 + D2) X``;
* ``(d .)`` sends the cherry with parameter orders ``(1, 0)`` to ``D1`` and
  ``(0, 1)`` to ``D2``.

A covariant combination ``nabla^0 + nabla^1`` is then a ``TreeSum`` with
graded coefficients.  Its elementary differential splits into a graded part,
which must vanish term by term, and an ungraded part, which must equal
``q * Upsilon_F`` of the unparametrised projection.
"""
from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import symexpr as sx
from .calculus import cherry, graft, nabla, project_unparam
from .errors import (
    NonlocalResidue, NotLocalInput, QuadratureFailure, SectorUnsupported,
)
from .rules import unparametrise
from .symexpr import SymExpr
from .trees import (
    DecoratedTree, MultiIndex, ParamIndex, TreeSum, as_sum, parse_tree,
    render_tree, sort_key, symmetry_factor, xi,
)
from .upsilon import F_DEFAULT, FHAT_DEFAULT, upsilon_F, upsilon_Fhat

FHAT_OVER_Q = "Fhat-overQ"
F_LOCAL = "F-local"

A = sx.func("a")
D1 = sx.grade_symbol(1)
D2 = sx.grade_symbol(2)


def _same(e1: SymExpr, e2: SymExpr) -> bool:
    return sx.dxu_to_vx(e1) == sx.dxu_to_vx(e2)


# ------------------------------------------------------------ formal constants


@dataclass(frozen=True, order=False)
class FormalConstant:
    """``C(tau_hat)``: the constant of the base tree with slot derivatives.

    The slot derivative orders are the parameter orders ``h`` of the edges,
    read in canonical edge order.
    """

    tree: DecoratedTree

    @property
    def base(self) -> DecoratedTree:
        return unparametrise(self.tree)

    @property
    def slot_derivatives(self) -> tuple:
        return tuple(a.h for a in self.tree.edges())

    def sort_key(self):
        return sort_key(self.tree)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return f"C({render_tree(self.tree)})"


@dataclass(frozen=True)
class CountertermTerm:
    constant: FormalConstant
    factor: SymExpr
    tree: DecoratedTree
    kind: str  # "F" or "Fhat"
    weight: Fraction

    def differential(self, nl_f=None, nl_fhat=None) -> SymExpr:
        if self.kind == "F":
            return upsilon_F(self.tree, nl_f)
        return upsilon_Fhat(self.tree, nl_fhat) * sx.QINV

    def value(self, nl_f=None, nl_fhat=None) -> SymExpr:
        return self.factor * self.differential(nl_f, nl_fhat) * self.weight

    def to_json(self) -> dict:
        return {
            "constant": str(self.constant),
            "factor": sx.render(self.factor),
            "tree": render_tree(self.tree),
            "kind": self.kind,
            "weight": str(self.weight),
        }


@dataclass
class CountertermExpr:
    """``sum C * factor * Upsilon[tree] * weight`` over formal constants."""

    mode: str
    terms: list = field(default_factory=list)

    def by_constant(self, nl_f=None, nl_fhat=None) -> dict:
        out: dict = {}
        for t in self.terms:
            out[t.constant] = out.get(t.constant, sx.ZERO) + t.value(nl_f, nl_fhat)
        return {c: e for c, e in sorted(out.items()) if not sx.dxu_to_vx(e).is_zero()}

    def constants(self) -> list:
        return sorted({t.constant for t in self.terms})

    def is_zero(self) -> bool:
        return not self.by_constant()

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for c in self.constants():
            inner = []
            for t in self.terms:
                if t.constant != c:
                    continue
                coef = t.factor * t.weight
                sym = "Upsilon_F" if t.kind == "F" else "Upsilon_Fhat/q"
                inner.append(f"{sx.render(coef)}*{sym}[{render_tree(t.tree)}]")
            parts.append(f"{c}*(" + " + ".join(inner) + ")")
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "terms": [t.to_json() for t in self.terms],
            "by_constant": {str(c): sx.render(e) for c, e in self.by_constant().items()},
        }


def assemble_counterterm(trees, mode: str = FHAT_OVER_Q) -> CountertermExpr:
    """``sum_tau C(tau) Upsilon[tau] / (S(tau) q^[mode])``."""
    if mode not in (FHAT_OVER_Q, F_LOCAL):
        raise ValueError(f"unknown mode {mode!r}")
    kind = "Fhat" if mode == FHAT_OVER_Q else "F"
    out = CountertermExpr(mode)
    for t in sorted(set(trees), key=sort_key):
        out.terms.append(CountertermTerm(FormalConstant(t), sx.ONE, t, kind,
                                         Fraction(1, symmetry_factor(t))))
    return out


# ------------------------------------------------------------ Upsilon of sums


def upsilon_sum(ts, kind: str = "Fhat", nl=None) -> SymExpr:
    """Linear extension; coefficients (possibly graded) are never differentiated."""
    total = sx.ZERO
    for t, c in as_sum(ts).items():
        val = upsilon_Fhat(t, nl) if kind == "Fhat" else upsilon_F(t, nl)
        total = total + sx.dxu_to_vx(val) * c
    return total


def is_local(tau, nl_fhat=None, nl_f=None) -> bool:
    """Membership in the local set: ``Upsilon_Fhat[tau] = q Upsilon_F[P tau]``."""
    lhs = upsilon_sum(tau, "Fhat", nl_fhat)
    rhs = sx.Q * upsilon_sum(project_unparam(tau), "F", nl_f)
    return _same(lhs, rhs)


def _require_local(*taus) -> None:
    for t in taus:
        if not is_local(t):
            raise NotLocalInput(f"not in the local set: {t}")


def apply_prefixes(gc) -> TreeSum:
    """Evaluate the prefix tags of a ``GradedCounterterm`` (orders 0 and 1)."""
    if gc.m == 0:
        out = gc.single.scale(A)
        for ch in gc.cherries:
            out = out + ch.trees.scale(ch.weight)
        return out
    if gc.m == 1:
        out = gc.single.scale(sx.ONE + A * (D1 + D2))
        for ch in gc.cherries:
            grade = D1 if ch.k == 1 else D2
            out = out + ch.trees.scale(grade * ch.weight)
        return out
    # D1, D2 are nilpotent: higher parameter derivatives of constants vanish
    return TreeSum()


def covariant_combination(tau1, tau2) -> TreeSum:
    """``nabla_{tau2} tau1 + nabla^1_{tau2} tau1`` with graded coefficients."""
    return apply_prefixes(nabla(tau1, tau2, 0)) + apply_prefixes(nabla(tau1, tau2, 1))


@dataclass
class LocalityReport:
    tau1: str
    tau2: str
    graded: dict
    free: SymExpr
    expected: SymExpr
    ledger: list

    @property
    def graded_ok(self) -> bool:
        return all(e.is_zero() for e in self.graded.values())

    @property
    def free_ok(self) -> bool:
        return _same(self.free, self.expected)

    @property
    def ok(self) -> bool:
        return self.graded_ok and self.free_ok

    def to_json(self) -> dict:
        return {
            "tau1": self.tau1, "tau2": self.tau2, "ok": self.ok,
            "graded_ok": self.graded_ok, "free_ok": self.free_ok,
            "graded": {k: sx.render(v) for k, v in self.graded.items()},
            "free": sx.render(self.free), "expected": sx.render(self.expected),
            "ledger": self.ledger,
        }


def _ledger(combo: TreeSum) -> list:
    rows = []
    for t, c in combo.items():
        rows.append({"tree": render_tree(t), "coefficient": sx.render(sx.const(c) if not isinstance(c, SymExpr) else c),
                     "upsilon_Fhat": sx.render(sx.dxu_to_vx(upsilon_Fhat(t)))})
    return rows


def check_locality(tau1, tau2, nl=None) -> LocalityReport:
    """Verify ``Upsilon_Fhat[nabla + nabla^1] = q Upsilon_F[P nabla]`` grade by grade.

    ``nl`` replaces the lifted right-hand side on the left only (negative
    controls); the inputs are always checked against the default one.
    """
    _require_local(tau1, tau2)
    combo = covariant_combination(tau1, tau2)
    lhs = upsilon_sum(combo, "Fhat", nl)
    graded = {f"D{g}": lhs.graded_part(g) for g in sx.GRADES}
    free = lhs.graded_part(0)
    expected = sx.Q * upsilon_sum(project_unparam(combo), "F")
    return LocalityReport(_name(tau1), _name(tau2), graded, free, expected, _ledger(combo))


def _name(tau) -> str:
    if isinstance(tau, DecoratedTree):
        return render_tree(tau)
    return getattr(tau, "label", None) or repr(tau)


@dataclass
class NullReport:
    kind: str
    orders: tuple
    lhs: SymExpr
    rhs: SymExpr
    in_claim: bool

    @property
    def vanishes(self) -> bool:
        return self.lhs.is_zero() and sx.dxu_to_vx(self.rhs).is_zero()

    @property
    def ok(self) -> bool:
        return self.vanishes if self.in_claim else True

    @property
    def status(self) -> str:
        if not self.in_claim:
            return "out-of-claim"
        return "pass" if self.vanishes else "fail"

    def to_json(self) -> dict:
        return {"kind": self.kind, "orders": list(self.orders), "status": self.status,
                "upsilon_Fhat": sx.render(self.lhs), "q_upsilon_F_proj": sx.render(self.rhs)}


def check_null(tau1, tau2, kind: str, k: int, ell: int = 0) -> NullReport:
    """Single-edge graft of order ``k`` or cherry of orders ``(k, ell)``.

    The claim covers ``k > 1`` (single edge) and ``k + ell > 1`` (cherry);
    other orders are computed and reported as out of claim.
    """
    _require_local(tau1, tau2)
    if kind == "single":
        ts = graft(tau2, ParamIndex(k, MultiIndex()), tau1)
        in_claim, orders = k > 1, (k,)
    elif kind == "cherry":
        ts = cherry(tau1, tau2, k, ell)
        in_claim, orders = k + ell > 1, (k, ell)
    else:
        raise ValueError("kind must be 'single' or 'cherry'")
    lhs = upsilon_sum(ts, "Fhat")
    rhs = sx.Q * upsilon_sum(project_unparam(ts), "F")
    return NullReport(kind, orders, lhs, rhs, in_claim)


# ------------------------------------------------------------ chain-rule constraints


@dataclass(frozen=True)
class Generator:
    label: str
    combo: TreeSum
    noises: int


@lru_cache(maxsize=None)
def local_generators(n: int) -> tuple:
    """Candidate covariant words with ``n`` noises.

    ``n = 1`` gives the noise itself; otherwise every split ``i + j = n``
    contributes ``N(t1, t2) = nabla_{t2} t1 + nabla^1_{t2} t1`` for words
    ``t1`` with ``i`` noises and ``t2`` with ``j`` noises.  Coefficients are
    frozen, so a word is a plain linear combination of trees.
    """
    if n < 1:
        return ()
    if n == 1:
        return (Generator("Xi", TreeSum.of(xi()), 1),)
    out = []
    for i in range(1, n):
        for g1 in local_generators(i):
            for g2 in local_generators(n - i):
                out.append(Generator(f"N({g1.label},{g2.label})",
                                     covariant_combination(g1.combo, g2.combo), n))
    return tuple(out)


# ------------------------------------------------------------ function-level words


def _vd(alpha, e: SymExpr) -> SymExpr:
    """``d/dv_alpha`` applied grade by grade."""
    out = sx.v_derivative(alpha, e.graded_part(0))
    for g in sx.GRADES:
        part = e.graded_part(g)
        if not part.is_zero():
            out = out + sx.v_derivative(alpha, part) * sx.grade_symbol(g)
    return out


@lru_cache(maxsize=None)
def _root_factors():
    f1h = sx.dxu_to_vx(FHAT_DEFAULT.f_one)
    d = sx.v_derivative
    thick2 = sx.slot_partial("dxu", sx.slot_partial("dxu", F_DEFAULT.f_one))
    return (d("x", d("x", f1h)), d("x", d("cx", f1h)), d("cx", d("x", f1h)), thick2)


@dataclass(frozen=True)
class FunctionalWord:
    """A covariant word kept as the pair ``(Upsilon_Fhat, Upsilon_F o P)``.

    The coefficient ``a`` is the function ``a(u)`` here and is differentiated
    together with everything else, which is how the locality argument treats
    the arguments of a covariant derivative.
    """

    label: str
    hat: SymExpr
    flat: SymExpr

    @property
    def graded_ok(self) -> bool:
        return all(self.hat.graded_part(g).is_zero() for g in sx.GRADES)

    @property
    def ok(self) -> bool:
        return self.graded_ok and _same(self.hat.graded_part(0), sx.Q * self.flat)


def functional_nabla(w1: FunctionalWord, w2: FunctionalWord) -> FunctionalWord:
    c00, c10, c01, thick2 = _root_factors()
    h1, h2 = w1.hat, w2.hat
    half = Fraction(1, 2)
    hat = (A * h2 * _vd((0, 0, 0), h1) + h1 * h2 * c00 * half
           + (sx.ONE + A * (D1 + D2)) * h2 * _vd((1, 0, 0), h1)
           + (D1 * c10 + D2 * c01) * h1 * h2 * half)
    flat = A * w2.flat * sx.slot_partial("u", w1.flat) + w1.flat * w2.flat * thick2 * half
    return FunctionalWord(f"N({w1.label},{w2.label})", hat, flat)


@lru_cache(maxsize=None)
def functional_words(n: int) -> tuple:
    """Function-level counterparts of ``local_generators(n)`` (same labels)."""
    if n < 1:
        return ()
    if n == 1:
        g = sx.func("g")
        return (FunctionalWord("Xi", sx.Q * g, g),)
    return tuple(functional_nabla(w1, w2)
                 for i in range(1, n)
                 for w1 in functional_words(i)
                 for w2 in functional_words(n - i))


@dataclass
class ConstraintTable:
    """Constants expressed through the covariant generators.

    ``rows`` maps each generator label to the graded coefficients it puts on
    each tree; ``relations`` expresses every non-pivot constant through the
    pivot constants.
    """

    sector: int
    generators: tuple
    rows: dict
    pivots: list
    relations: dict
    rank: int
    rejected: tuple = ()

    @property
    def trees(self) -> list:
        return sorted({t for row in self.rows.values() for t in row}, key=sort_key)

    def substitution(self) -> dict:
        sub = {FormalConstant(p): {FormalConstant(p): sx.ONE} for p in self.pivots}
        for t, rel in self.relations.items():
            sub[FormalConstant(t)] = dict(rel)
        return sub

    def to_json(self) -> dict:
        return {
            "sector": self.sector,
            "generators": [g.label for g in self.generators],
            "rejected": list(self.rejected),
            "rank": self.rank,
            "pivots": [render_tree(p) for p in self.pivots],
            "relations": [
                {"constant": str(FormalConstant(t)),
                 "equals": {str(c): sx.render(e) for c, e in sorted(rel.items())}}
                for t, rel in sorted(self.relations.items(), key=lambda kv: sort_key(kv[0]))],
        }

    def to_text(self) -> str:
        lines = [f"sector {self.sector}: {len(self.generators)} generators, rank {self.rank}"]
        if self.rejected:
            lines.append("rejected (not local as tree combinations): " + ", ".join(self.rejected))
        for t, rel in sorted(self.relations.items(), key=lambda kv: sort_key(kv[0])):
            rhs = " + ".join(f"({sx.render(e)})*{c}" for c, e in sorted(rel.items())) or "0"
            lines.append(f"{FormalConstant(t)} = {rhs}")
        return "\n".join(lines)


def _is_number(e: SymExpr):
    num = e.numerator
    if e.qpower or len(num) != 1:
        return None
    ((g, m), c), = num.items()
    return Fraction(c) if g == 0 and not m else None


def _generic_point(seed: int):
    rng = random.Random(seed)
    cache: dict = {}

    def point(code):
        if code not in cache:
            cache[code] = Fraction(rng.randint(2, 97), rng.randint(2, 97))
        return cache[code]
    return point


def _rank(rows: list, unknowns: list) -> int:
    best = 0
    for seed in (11, 23):
        point = _generic_point(seed)
        mat = [[sx.evaluate(r.get(u, sx.ZERO), point) for u in unknowns] for r in rows]
        best = max(best, _fraction_rank(mat))
    return best


def _fraction_rank(mat: list) -> int:
    mat = [row[:] for row in mat]
    rank, cols = 0, len(mat[0]) if mat else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(mat)) if mat[i][c]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        for i in range(len(mat)):
            if i != rank and mat[i][c]:
                f = mat[i][c] / mat[rank][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def chain_rule_constraints(sector: int) -> ConstraintTable:
    """Relations between constants forced by the covariant-derivative span.

    Only candidate words that pass the local-set test as tree combinations
    are used; the others are listed in ``rejected``.
    """
    if sector not in (2, 4):
        raise SectorUnsupported(f"sector {sector} is not supported (use 2 or 4)")
    gens, rejected = [], []
    for g in local_generators(sector):
        (gens if is_local(g.combo) else rejected).append(g)
    gens = tuple(gens)
    rows = {}
    # unknowns (j, grade): the generator's constant and its slot derivatives
    eqs = {}
    for j, g in enumerate(gens):
        row = {}
        for t, c in g.combo.items():
            row[t] = c
            s = symmetry_factor(t)
            for grade in (0,) + sx.GRADES:
                part = c.graded_part(grade) if isinstance(c, SymExpr) else (
                    sx.const(c) if grade == 0 else sx.ZERO)
                if not part.is_zero():
                    eqs.setdefault(t, {})[(j, grade)] = part * s
        rows[g.label] = row
    unknowns = sorted({u for e in eqs.values() for u in e})
    trees = sorted(eqs, key=sort_key)
    rank = _rank([eqs[t] for t in trees], unknowns) if trees else 0

    # elimination with numeric pivots; each row also carries -C(tree)
    work = {t: ({u: v for u, v in eqs[t].items()}, {FormalConstant(t): -sx.ONE}) for t in trees}
    pivots = []
    remaining = set(trees)
    for u in unknowns:
        cands = []
        for t in remaining:
            val = _is_number(work[t][0].get(u, sx.ZERO))
            if val:
                nz = sum(1 for e in work[t][0].values() if not e.is_zero())
                hsum = sum(a.h for a in t.edges())
                cands.append((nz, hsum, sort_key(t), t, val))
        if not cands:
            continue
        *_, p, pval = min(cands, key=lambda c: c[:3])
        remaining.discard(p)
        pivots.append(p)
        prow, pcon = work[p]
        for t in trees:
            if t == p:
                continue
            row, con = work[t]
            e = row.get(u)
            if e is None or e.is_zero():
                continue
            f = e * Fraction(1) / pval
            for uu, vv in prow.items():
                row[uu] = row.get(uu, sx.ZERO) - f * vv
            for cc, vv in pcon.items():
                con[cc] = con.get(cc, sx.ZERO) - f * vv
    relations = {}
    for t in trees:
        if t in pivots:
            continue
        row, con = work[t]
        if any(not e.is_zero() for e in row.values()):
            continue  # generator constants not determined by the pivots
        own = FormalConstant(t)
        rel = {c: e for c, e in con.items() if c != own and not e.is_zero()}
        relations[t] = rel
    return ConstraintTable(sector, gens, rows, sorted(pivots, key=sort_key), relations, rank,
                           tuple(g.label for g in rejected))


def reduce_to_local(ct: CountertermExpr, table: ConstraintTable, nl=None) -> CountertermExpr:
    """Substitute the relations and return the local counterterm.

    Raises ``NonlocalResidue`` when, for some remaining constant, the
    ``Upsilon_Fhat / q`` sum differs from the ``Upsilon_F`` sum over the
    unparametrised trees.  ``nl`` overrides the lifted right-hand side.
    """
    if ct.mode != FHAT_OVER_Q:
        raise ValueError("reduce_to_local expects a counterterm in Fhat-overQ mode")
    sub = table.substitution()
    raw: dict = {}
    local_terms = []
    for term in ct.terms:
        rel = sub.get(term.constant, {})
        val = term.value(nl_fhat=nl)
        for c, coef in rel.items():
            raw[c] = raw.get(c, sx.ZERO) + coef * val
        if term.tree.is_unparametrised():
            for c, coef in rel.items():
                local_terms.append(CountertermTerm(c, coef, term.tree, "F", term.weight))
    out = CountertermExpr(F_LOCAL, sorted(local_terms, key=lambda t: (t.constant.sort_key(), sort_key(t.tree))))
    local = out.by_constant()
    for c in sorted(set(raw) | set(local)):
        diff = sx.dxu_to_vx(raw.get(c, sx.ZERO)) - sx.dxu_to_vx(local.get(c, sx.ZERO))
        if not diff.is_zero():
            raise NonlocalResidue(f"non-local residue for {c}", sx.render(diff))
    return out


# ------------------------------------------------------------ Ito constant


@dataclass(frozen=True)
class Mollifier:
    """Even, compactly supported density on the line."""

    evaluate: object
    radius: float = 1.0
    symmetric: bool = True
    name: str = "custom"
    knots: tuple = ()  # points where rho is not smooth (sampled mollifiers)

    def __call__(self, x):
        return self.evaluate(x) if abs(x) <= self.radius else 0.0


def _bump(x: float) -> float:
    return 15.0 / 16.0 * (1.0 - x * x) ** 2


def poly_bump() -> Mollifier:
    """``rho(x) = 15/16 (1 - x^2)^2`` on ``[-1, 1]``."""
    return Mollifier(_bump, 1.0, True, "poly")


POLY_BUMP_C1 = Fraction(5, 7)  # int rho^2, computed exactly beforehand


def mollifier_from_file(path: str) -> Mollifier:
    """Two-column samples ``x rho(x)``, linearly interpolated, zero outside."""
    import numpy as np

    data = np.loadtxt(path, ndmin=2)
    xs, ys = data[:, 0], data[:, 1]
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    radius = float(max(abs(xs[0]), abs(xs[-1])))
    moll = Mollifier(lambda x: float(np.interp(x, xs, ys, left=0.0, right=0.0)),
                     radius, True, f"file:{path}", tuple(float(x) for x in xs))
    _validate(moll)
    return moll


def _validate(moll: Mollifier) -> None:
    from scipy.integrate import quad

    mass, _ = quad(moll, -moll.radius, moll.radius, limit=200)
    if abs(mass - 1.0) > 1e-6:
        raise ValueError(f"mollifier integrates to {mass}, not 1")
    for x in (0.1, 0.37, 0.8):
        xr = x * moll.radius
        if abs(moll(xr) - moll(-xr)) > 1e-9:
            raise ValueError("mollifier is not even")


def ito_constant(rho: Mollifier, eps: float, tol: float = 1e-12) -> float:
    """``int rho_eps(x)^2 dx`` with ``rho_eps(x) = rho(x / eps) / eps``."""
    from scipy.integrate import IntegrationWarning, quad

    if not eps > 0:
        raise ValueError("eps must be positive")
    r = rho.radius * eps

    def integrand(x):
        return (rho(x / eps) / eps) ** 2

    # integrate piece by piece between kinks, where the integrand is smooth
    cuts = sorted({-r, r} | {k * eps for k in rho.knots if -r < k * eps < r})
    val = err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            for lo, hi in zip(cuts, cuts[1:]):
                piece_tol = tol * (hi - lo) / (2 * r)
                v, e = quad(integrand, lo, hi, epsabs=piece_tol, epsrel=0.0, limit=500)
                val, err = val + v, err + e
        except IntegrationWarning as exc:
            raise QuadratureFailure(f"quadrature did not reach {tol:.3g}: {exc}") from exc
    if not math.isfinite(val) or err > tol:
        raise QuadratureFailure(f"quadrature error estimate {err:.3g} exceeds {tol:.3g}")
    return val


# ------------------------------------------------------------ fixed examples


def sector2_trees() -> list:
    """The five parametrised 2-noise trees with ``h <= 1``."""
    return [parse_tree(s) for s in (
        "Xi[I(Xi)]", "One[Ix(Xi), Ix(Xi)]", "Xi[I{1}(Xi)]",
        "One[Ix{1}(Xi), Ix(Xi)]", "One[Ix(Xi), Ix{1}(Xi)]")]


__all__ = [
    "FHAT_OVER_Q", "F_LOCAL", "FormalConstant", "CountertermTerm", "CountertermExpr",
    "assemble_counterterm", "upsilon_sum", "is_local", "apply_prefixes",
    "covariant_combination", "LocalityReport", "check_locality", "NullReport",
    "check_null", "Generator", "local_generators", "FunctionalWord",
    "functional_nabla", "functional_words", "ConstraintTable",
    "chain_rule_constraints", "reduce_to_local", "Mollifier", "poly_bump",
    "POLY_BUMP_C1", "mollifier_from_file", "ito_constant", "sector2_trees",
]
