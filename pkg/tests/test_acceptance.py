"""Acceptance criteria, one test per criterion.

Each check returns ``(ok, detail)``; the outcome is recorded in ``RESULTS``
and printed as one PASS/FAIL line per criterion in the terminal summary.
Run ``python tests/test_acceptance.py`` for the same lines without pytest.
Set ``QKPZ_EXTENDED=1`` to run the coherence criterion at four noises.
"""
from __future__ import annotations

import os
import random
from collections import Counter
from fractions import Fraction
from functools import lru_cache

import pytest
import sympy as sp

from qkpz import symexpr as sx
from qkpz.calculus import Character, graft, prep_map_adjoint, star
from qkpz.coherence import check_coherence, expand_system, planted_coefficient
from qkpz.errors import NonlocalResidue
from qkpz.renorm import (
    assemble_counterterm, chain_rule_constraints, check_locality, check_null,
    covariant_combination, ito_constant, poly_bump, reduce_to_local, sector2_trees,
)
from qkpz.rules import EnumConfig, RuleSet, enumerate_negative
from qkpz.trees import as_sum, parse_tree, pidx, xi
from qkpz.upsilon import Nonlinearity, fhat_hat_f, upsilon_F, upsilon_Fhat, upsilon_V
from treegen import EDGES, V_ALPHAS, planted_product, random_tree

P = parse_tree
E = sx.parse_expr
XI = xi()
HALF = Fraction(1, 2)

RESULTS: dict = {}

TITLES = {
    1: "tree table: 2 and 23 saturated trees match the fixture",
    2: "warm-up elementary differentials",
    3: "locality of the noise pair and the sector-2 reduction",
    4: "coherence of the expansion with Upsilon/S",
    5: "morphism properties and strong preparation identity",
    6: "non-commuting parameter derivatives of u",
    7: "vanishing of higher parameter orders",
    8: "derivative coefficients of U on planted noises",
    9: "Ito constant scaling and exact value",
    10: "negative controls break criteria 2-4",
}


def same(e1, e2) -> bool:
    return sx.dxu_to_vx(e1) == sx.dxu_to_vx(e2)


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    assert ok, f"criterion {n} failed: {detail}"


# ------------------------------------------------------------ 1


def criterion_1(fixture: dict):
    cfg = EnumConfig(Fraction(-3, 2), Fraction(1, 100), max_param_deriv=0)
    details = []
    ok = True
    for n, want in (("2", 2), ("4", 23)):
        got = enumerate_negative(RuleSet.saturated(), EnumConfig(
            cfg.noise_degree, cfg.kappa, frozenset({int(n)}), cfg.max_param_deriv))
        expected = Counter(P(r["tree"]) for r in fixture["trees"][n])
        ok &= Counter(got) == expected and len(got) == want
        details.append(f"{n} noises: {len(got)}")
    return ok, ", ".join(details)


# ------------------------------------------------------------ 2


def warmups(nl=None) -> list:
    cherry, c_cherry = P("Xi[I(Xi)]"), P("Xi[I{1}(Xi)]")
    thick = P("One[Ix(Xi), Ix(Xi)]")
    checks = [
        ("F[cherry]", upsilon_F(cherry), E("g*g'")),
        ("Fhat[cherry]", upsilon_Fhat(cherry, nl), E("q*g*g' + (-a''*v_c - a'^2*v_cc)*g^2")),
        ("Fhat[c-cherry]", upsilon_Fhat(c_cherry, nl), E("-q*a'*g^2")),
        ("F[thick]/2", upsilon_F(thick) * HALF, E("(f - a')*g^2")),
        ("Fhat[thick]/2", upsilon_Fhat(thick, nl) * HALF,
         E("q*(f - a')*g^2 + (a*a'^2*v_cc + a*a''*v_c)*g^2 + q*a'*g^2")),
        ("Fhat[mixed 1,0]", upsilon_Fhat(P("One[Ix{1}(Xi), Ix(Xi)]"), nl), E("2*q*a*a'*g^2")),
        ("Fhat[mixed 0,1]", upsilon_Fhat(P("One[Ix(Xi), Ix{1}(Xi)]"), nl), E("2*q*a*a'*g^2")),
    ]
    return [(name, same(got, want)) for name, got, want in checks]


def criterion_2(nl=None):
    res = warmups(nl)
    bad = [n for n, ok in res if not ok]
    return not bad, f"{len(res) - len(bad)}/{len(res)} identities" + (f"; failing {bad}" if bad else "")


# ------------------------------------------------------------ 3

SECTOR2_CLOSED_FORM = "C(One[Ix(Xi), Ix(Xi)])*(1/2*Upsilon_F[One[Ix(Xi), Ix(Xi)]] + a*Upsilon_F[Xi[I(Xi)]])"


@lru_cache(maxsize=None)
def _table2():
    return chain_rule_constraints(2)


def criterion_3(nl=None):
    rep = check_locality(XI, XI, nl)
    q, a = sx.Q, sx.func("a")
    master = q * a * upsilon_F(P("Xi[I(Xi)]")) + q * HALF * upsilon_F(P("One[Ix(Xi), Ix(Xi)]"))
    free_ok = same(rep.free, master) and same(rep.free, E("q*(a*g*g' + (f - a')*g^2)"))
    try:
        local = reduce_to_local(assemble_counterterm(sector2_trees()), _table2(), nl)
        text = local.to_text()
        (value,) = local.by_constant().values()
        red_ok = text == SECTOR2_CLOSED_FORM and value == E("a*g*g' - a'*g^2 + f*g^2")
    except NonlocalResidue as exc:
        text, red_ok = f"residue {exc.residue}", False
    ok = rep.graded_ok and free_ok and red_ok
    return ok, f"graded zero={rep.graded_ok}, free part={free_ok}, reduction={red_ok}: {text}"


# ------------------------------------------------------------ 4


def coherence_depth() -> int:
    return 4 if os.environ.get("QKPZ_EXTENDED") == "1" else 3


@lru_cache(maxsize=None)
def _system(k: int):
    return expand_system(k)


def criterion_4(nl=None):
    k = coherence_depth()
    system = _system(k)
    rep = check_coherence(k, system=system, nl=nl)
    vc = system.V[pidx(1)]
    pins = [
        system.U.coeff(P("One[I(Xi)]")) == E("g"),
        vc.scalar_part == sx.v("c"),
        same(vc.coeff(P("One[I(Xi)]")), E("a'*g*v_cc")),
        same(vc.coeff(P("One[I{1}(Xi)]")), E("q*g")),
    ]
    ok = rep.ok and all(pins)
    return ok, f"max noises {k}: {len(rep.entries) - len(rep.failures)}/{len(rep.entries)} coefficients, pins {sum(pins)}/4"


# ------------------------------------------------------------ 5

MORPHISM_INSTANCES = 200
IDENTITY_INSTANCES = 100
ELL = Character({P(s): Fraction(i + 2) for i, s in enumerate(
    ["Xi[I(Xi)]", "One[Ix(Xi), Ix(Xi)]", "Xi[I{1}(Xi)]", "One[Ix{1}(Xi), Ix(Xi)]",
     "One[Ix(Xi), Ix{1}(Xi)]"])})


def _ups(ts):
    total = sx.ZERO
    for t, c in as_sum(ts).items():
        total = total + c * upsilon_Fhat(t)
    return total


def _ups_v(alpha, ts):
    total = sx.ZERO
    for t, c in as_sum(ts).items():
        total = total + c * upsilon_V(alpha, t)
    return sx.dxu_to_vx(total)


def _unparam_edge(a):
    return pidx(0, *a.st)


def criterion_5():
    rng = random.Random(20240611)
    bad1 = bad2 = bad3 = 0
    n1 = n2 = n3 = 0
    while n1 < MORPHISM_INSTANCES:
        ns = rng.randint(1, 2)
        nt = rng.randint(1, 3 - ns)
        sigma, tau, alpha = random_tree(rng, ns), random_tree(rng, nt), rng.choice(EDGES)
        lhs = _ups(graft(sigma, alpha, tau))
        bad1 += lhs != upsilon_Fhat(sigma) * sx.v_derivative(alpha, upsilon_Fhat(tau))
        if sigma.is_unparametrised() and tau.is_unparametrised() and alpha.h == 0:
            slot = "u" if alpha.st == (0, 0) else "dxu"
            flat = sx.ZERO
            for t, c in graft(sigma, alpha, tau).items():
                flat = flat + c * upsilon_F(t)
            bad1 += flat != upsilon_F(sigma) * sx.slot_partial(slot, upsilon_F(tau))
        n1 += 1
    while n2 < MORPHISM_INSTANCES:
        nt = rng.randint(1, 2)
        ns = rng.randint(1, 3 - nt)
        tau, sigma = random_tree(rng, nt), planted_product(rng, ns)
        beta, alpha = rng.choice(EDGES), rng.choice(V_ALPHAS)
        lhs = _ups_v(alpha, graft(tau, beta, sigma))
        rhs = upsilon_Fhat(tau) * sx.v_derivative(beta, sx.dxu_to_vx(upsilon_V(alpha, sigma)))
        bad2 += lhs != rhs
        n2 += 1
    while n3 < IDENTITY_INSTANCES:
        s = planted_product(rng, rng.randint(0, 2), deco=True)
        t = planted_product(rng, rng.randint(0, 1), deco=True) if rng.random() < 0.6 else random_tree(rng, 1)
        bad3 += prep_map_adjoint(ELL, star(s, t)) != star(s, prep_map_adjoint(ELL, t))
        n3 += 1
    ok = bad1 == bad2 == bad3 == 0
    return ok, (f"graft morphism {n1 - bad1}/{n1}, v-differential morphism {n2 - bad2}/{n2}, "
                f"strong preparation {n3 - bad3}/{n3}")


# ------------------------------------------------------------ 6


def criterion_6():
    one = sx.u_derivatives(["", "c"])
    other = sx.u_derivatives(["c", ""])
    ok = one == sx.func("a", 1) * sx.QINV ** 2 and other.is_zero()
    return ok, f"d_c d_v u = {sx.render(one)}, d_v d_c u = {sx.render(other)}"


# ------------------------------------------------------------ 7


def criterion_7():
    pairs = {"(Xi,Xi)": XI, "(Xi,N(Xi,Xi))": covariant_combination(XI, XI)}
    orders = [("single", k, 0) for k in (2, 3)]
    orders += [("cherry", k, s - k) for s in (2, 3) for k in range(s + 1)]
    total = failed = 0
    for tau2 in pairs.values():
        for kind, k, ell in orders:
            rep = check_null(XI, tau2, kind, k, ell)
            total += 1
            failed += rep.status != "pass"
    return failed == 0, f"{total - failed}/{total} vanish on {', '.join(pairs)}"


# ------------------------------------------------------------ 8


def criterion_8():
    alphas = [pidx(h, t, x) for h in range(3) for t in range(3) for x in range(3) if h + t + x <= 2]
    total = bad = 0
    for m in ((0, 0), (0, 1)):
        for a in alphas:
            want = sx.QINV if (a.h, tuple(a.st)) == (0, m) else sx.ZERO
            total += 1
            bad += planted_coefficient(a, m) != want
    return bad == 0, f"{total - bad}/{total} coefficients over {len(alphas)} indices and m in {{0, e1}}"


# ------------------------------------------------------------ 9


def exact_poly_bump_constant() -> Fraction:
    x = sp.Symbol("x")
    rho = sp.Rational(15, 16) * (1 - x ** 2) ** 2
    val = sp.integrate(rho ** 2, (x, -1, 1))
    return Fraction(int(val.p), int(val.q))


def criterion_9():
    c1 = exact_poly_bump_constant()
    rows = []
    ok = True
    for eps in (1.0, 0.1, 0.01):
        dev = abs(eps * ito_constant(poly_bump(), eps) - float(c1))
        ok &= dev <= 1e-10
        rows.append(f"eps={eps}: {dev:.1e}")
    return ok, f"C1 = {c1}; deviations " + ", ".join(rows)


# ------------------------------------------------------------ 10


def perturbations() -> list:
    a, a1, a2, f, g = (sx.func("a"), sx.func("a", 1), sx.func("a", 2), sx.func("f"), sx.func("g"))
    q, dxu = sx.Q, sx.DXU

    def make(name, fhat=None, cx=2, vx=1, xi_factor=q):
        fhat = fhat_hat_f() if fhat is None else fhat
        one = fhat * dxu ** 2 + cx * a * a1 * dxu * sx.v("cx") + vx * a1 * dxu * sx.v("x")
        return Nonlinearity(name, one, xi_factor * g)

    return [
        make("g_hat without q", xi_factor=sx.ONE),
        make("f_hat without q", fhat=(f - a1) + a * a1 ** 2 * sx.v("cc") + a * a2 * sx.v("c")),
        make("f_hat without v_cc term", fhat=q * (f - a1) + a * a2 * sx.v("c")),
        make("f_hat without v_c term", fhat=q * (f - a1) + a * a1 ** 2 * sx.v("cc")),
        make("v_cx term halved", cx=1),
        make("v_x term dropped", vx=0),
    ]


def criterion_10():
    lines = []
    ok = True
    for nl in perturbations():
        fails = [n for n, check in ((2, criterion_2), (3, criterion_3), (4, criterion_4))
                 if not check(nl)[0]]
        ok &= fails == [2, 3, 4]
        lines.append(f"{nl.name}: fails {fails}")
    return ok, "; ".join(lines)


# ------------------------------------------------------------ pytest entry points


def test_criterion_1(negative_tree_fixture):
    record(1, *criterion_1(negative_tree_fixture))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8, 9, 10])
def test_criterion(n):
    record(n, *globals()[f"criterion_{n}"]())


def summary_lines() -> list:
    out = []
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        out.append(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {TITLES[n]} ({detail})")
    return out


if __name__ == "__main__":
    import json
    from pathlib import Path

    fixture = json.loads((Path(__file__).parent / "fixtures" / "negative_trees.json").read_text())
    for n in range(1, 11):
        res = criterion_1(fixture) if n == 1 else globals()[f"criterion_{n}"]()
        RESULTS[n] = res
    print("\n".join(summary_lines()))
