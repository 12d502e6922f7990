"""Command-line front end.

Every subcommand prints either human-readable text or, with ``--json``, a
single object ``{"command", "config", "results"}``.  Exit status: 0 when the
requested identities hold, 1 when a verification fails, 2 on usage errors.

Defaults come from a ``key = value`` file named by ``$QKPZ_CONFIG``; flags
override the file.  Recognised keys: ``noise_degree``, ``kappa``, ``N``,
``max_noises``, ``format`` (``text`` or ``json``) and ``mollifier``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from fractions import Fraction

from . import symexpr as sx
from .calculus import graft, nabla, star
from .coherence import check_coherence
from .errors import (
    NonlocalResidue, NotLocalInput, ParseError, QkpzError, QuadratureFailure,
)
from .renorm import (
    POLY_BUMP_C1, assemble_counterterm, chain_rule_constraints, check_locality,
    check_null, covariant_combination, ito_constant, mollifier_from_file,
    poly_bump, reduce_to_local, sector2_trees,
)
from .rules import EnumConfig, RuleSet, enumerate_negative, parametrise
from .trees import (
    TreeSum, as_param, degree, parse_tree, render_tree, sort_key, symmetry_factor,
    tree_to_json, xi,
)
from .upsilon import upsilon_prefixed

CONFIG_ENV = "QKPZ_CONFIG"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

TREE_GRAMMAR = """tree grammar:
  tree  := head | head '[' edge (',' edge)* ']' | tree '*' tree
  head  := 'Xi' | 'One' | 'X^(t,x)' | 'X^(t,x)Xi'
  edge  := kind ['{' h '}'] '(' tree ')'
  kind  := 'I' (thin) | 'Ix' (thick) | 'I_(t,x)'
words: 'N(w1,w2)' is the covariant combination of two words, e.g. N(Xi,Xi)"""


class UsageError(QkpzError):
    """Bad flags or configuration."""


@dataclass(frozen=True)
class Config:
    noise_degree: Fraction = Fraction(-3, 2)
    kappa: Fraction = Fraction(1, 100)
    N: int = 0
    max_noises: int = 3
    output: str = "text"
    mollifier: str = "poly"

    def __post_init__(self):
        if self.output not in ("text", "json"):
            raise UsageError(f"format must be 'text' or 'json', not {self.output!r}")
        if self.N < 0 or self.max_noises < 1:
            raise UsageError("N must be >= 0 and max_noises >= 1")
        try:
            self.enum_config().check_subcritical()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    def enum_config(self, noises=None) -> EnumConfig:
        kw = {} if noises is None else {"noise_counts": frozenset(noises)}
        return EnumConfig(self.noise_degree, self.kappa, max_param_deriv=self.N, **kw)

    def to_json(self) -> dict:
        return {"noise_degree": str(self.noise_degree), "kappa": str(self.kappa),
                "N": self.N, "max_noises": self.max_noises, "format": self.output,
                "mollifier": self.mollifier}


_CONFIG_KEYS = {
    "noise_degree": ("noise_degree", Fraction), "alpha_n": ("noise_degree", Fraction),
    "kappa": ("kappa", Fraction), "n": ("N", int), "max_noises": ("max_noises", int),
    "format": ("output", str), "mollifier": ("mollifier", str),
}


def read_config(path: str | None) -> Config:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    if not path:
        return Config()
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip().lower()
        if not sep or key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{no}: expected one of {sorted(_CONFIG_KEYS)} as key = value")
        field_name, conv = _CONFIG_KEYS[key]
        try:
            values[field_name] = conv(val.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{no}: bad value {val.strip()!r}") from exc
    return Config(**values)


# ------------------------------------------------------------ input parsing


def _split_top(text: str) -> list:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def parse_word(text: str) -> TreeSum:
    """A tree, or a covariant word ``N(w1, w2)``."""
    s = text.strip()
    if s.startswith("N(") and s.endswith(")"):
        args = _split_top(s[2:-1])
        if len(args) != 2:
            raise ParseError("N(...) takes two arguments", 2, {"','"})
        return covariant_combination(parse_word(args[0]), parse_word(args[1]))
    if s == "Xi":
        return TreeSum.of(xi())
    return TreeSum.of(parse_tree(s))


def _word_or_tree(text: str):
    ts = parse_word(text)
    items = ts.items()
    if len(items) == 1 and items[0][1] == 1:
        return items[0][0]
    return ts


def _sum_json(ts: TreeSum) -> list:
    out = []
    for t, c in ts.items():
        coef = sx.render(c) if isinstance(c, sx.SymExpr) else str(c)
        out.append({"tree": render_tree(t), "coefficient": coef})
    return out


def _paren(coef: str) -> str:
    return f"({coef})" if " " in coef else coef


def _sum_text(ts: TreeSum) -> str:
    return "\n".join(f"  {_paren(r['coefficient'])} * {r['tree']}" for r in _sum_json(ts)) or "  0"


# ------------------------------------------------------------ subcommands


def _tree_record(t) -> dict:
    return {"tree": render_tree(t), "json": tree_to_json(t), "degree": str(degree(t)),
            "symmetry": symmetry_factor(t)}


def cmd_enumerate(args, cfg):
    noises = args.noises or [2, 4]
    ec = cfg.enum_config(noises)
    rules = RuleSet.named(args.rule)
    trees = enumerate_negative(rules, ec, args.strategy)
    if cfg.N > 0:
        trees = sorted(parametrise(trees, cfg.N), key=sort_key)
    recs = [_tree_record(t) for t in trees]
    text = "\n".join(f"{r['tree']}  deg={r['degree']}  S={r['symmetry']}" for r in recs)
    return EXIT_OK, recs, text + f"\n{len(recs)} trees"


def cmd_upsilon(args, cfg):
    tree = parse_tree(args.tree)
    val = upsilon_prefixed(tree, args.nonlinearity)
    s = symmetry_factor(tree)
    res = {"tree": render_tree(tree), "nonlinearity": args.nonlinearity,
           "value": sx.render(val), "symmetry": s}
    return EXIT_OK, res, f"{sx.render(val)}\nS = {s}"


def cmd_coherence(args, cfg):
    k = args.max_noises or cfg.max_noises
    rep = check_coherence(k)
    return (EXIT_OK if rep.ok else EXIT_FAIL), rep.to_json(), rep.to_text()


def cmd_locality(args, cfg):
    rep = check_locality(_word_or_tree(args.tau1), _word_or_tree(args.tau2))
    rep.tau1, rep.tau2 = args.tau1, args.tau2
    lines = [f"locality of ({args.tau1}, {args.tau2}): {'ok' if rep.ok else 'FAILED'}"]
    for g, e in rep.graded.items():
        lines.append(f"  {g} part: {sx.render(e)}")
    lines.append(f"  free part: {sx.render(rep.free)}")
    lines.append(f"  q Upsilon_F of projection: {sx.render(rep.expected)}")
    lines.append("  ledger:")
    for row in rep.ledger:
        lines.append(f"    {_paren(row['coefficient'])} * {row['tree']} -> {row['upsilon_Fhat']}")
    return (EXIT_OK if rep.ok else EXIT_FAIL), rep.to_json(), "\n".join(lines)


def _null_grid(kind, k, ell):
    if k is not None:
        return [(kind, k, ell or 0)]
    if kind == "single":
        return [("single", k, 0) for k in (2, 3)]
    return [("cherry", k, s - k) for s in (2, 3) for k in range(s, -1, -1)]


def cmd_null(args, cfg):
    t1, t2 = _word_or_tree(args.tau1), _word_or_tree(args.tau2)
    reps = [check_null(t1, t2, kind, k, ell) for kind, k, ell in _null_grid(args.kind, args.k, args.l)]
    ok = all(r.ok for r in reps)
    lines = [f"{r.kind} {r.orders}: {r.status}  Upsilon_Fhat = {sx.render(r.lhs)}" for r in reps]
    return (EXIT_OK if ok else EXIT_FAIL), [r.to_json() for r in reps], "\n".join(lines)


def cmd_counterterm(args, cfg):
    table = chain_rule_constraints(args.sector)
    trees = sector2_trees() if args.sector == 2 else table.trees
    ct = assemble_counterterm(trees)
    if args.mode == "raw":
        return EXIT_OK, {"counterterm": ct.to_json(), "constraints": table.to_json()}, ct.to_text()
    try:
        local = reduce_to_local(ct, table)
    except NonlocalResidue as exc:
        res = {"ok": False, "error": str(exc), "residue": exc.residue,
               "constraints": table.to_json()}
        return EXIT_FAIL, res, str(exc)
    res = {"ok": True, "counterterm": local.to_json(), "constraints": table.to_json()}
    return EXIT_OK, res, table.to_text() + "\n" + local.to_text()


def _mollifier(text: str):
    if text == "poly":
        return poly_bump(), float(POLY_BUMP_C1)
    if text.startswith("file:"):
        try:
            rho = mollifier_from_file(text[5:])
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad mollifier file: {exc}") from exc
        return rho, None
    raise UsageError(f"mollifier must be 'poly' or 'file:<path>', not {text!r}")


def cmd_ito(args, cfg):
    rho, c1 = _mollifier(args.mollifier or cfg.mollifier)
    eps_list = args.eps or [1.0, 0.1, 0.01]
    if any(not e > 0 for e in eps_list):
        raise UsageError("eps must be positive")
    try:
        if c1 is None:
            c1 = ito_constant(rho, 1.0)
        rows = []
        for e in eps_list:
            c = ito_constant(rho, e)
            rows.append({"eps": e, "C_eps": c, "eps_C_eps": e * c,
                         "deviation": abs(e * c - c1), "ok": abs(e * c - c1) <= args.tol})
    except QuadratureFailure as exc:
        return EXIT_FAIL, {"ok": False, "error": str(exc)}, str(exc)
    ok = all(r["ok"] for r in rows)
    res = {"mollifier": rho.name, "C1": c1, "tol": args.tol, "ok": ok, "rows": rows}
    text = "\n".join([f"C1 = {c1!r}"] + [
        f"eps={r['eps']}: C_eps={r['C_eps']!r}  eps*C_eps={r['eps_C_eps']!r}  "
        f"dev={r['deviation']:.2e}" for r in rows])
    return (EXIT_OK if ok else EXIT_FAIL), res, text


def cmd_parse(args, cfg):
    if args.expr:
        e = sx.parse_expr(args.text)
        return EXIT_OK, {"expr": sx.render(e), "json": sx.to_json(e)}, sx.render(e)
    ts = parse_word(args.text)
    recs = [dict(_tree_record(t), coefficient=r["coefficient"])
            for (t, _), r in zip(ts.items(), _sum_json(ts))]
    if len(recs) == 1 and recs[0]["coefficient"] == "1":
        r = recs[0]
        return EXIT_OK, recs[0], f"{r['tree']}\ndegree {r['degree']}, S = {r['symmetry']}"
    return EXIT_OK, recs, _sum_text(ts)


def cmd_calc(args, cfg):
    sigma, tau = parse_word(args.sigma), parse_word(args.tau)
    if args.op == "graft":
        out = graft(sigma, as_param(args.alpha), tau)
    elif args.op == "star":
        out = star(sigma, tau)
    else:
        gc = nabla(tau, sigma, args.m)
        res = {"m": gc.m, "single_prefix": gc.single_prefix, "single": _sum_json(gc.single),
               "cherry_prefix": gc.cherry_prefix,
               "cherries": [{"k": c.k, "l": c.ell, "weight": str(c.weight),
                             "trees": _sum_json(c.trees)} for c in gc.cherries]}
        lines = [f"{gc.single_prefix}:", _sum_text(gc.single)]
        for c in gc.cherries:
            lines += [f"{c.weight} {gc.cherry_prefix} cherry({c.k},{c.ell}):", _sum_text(c.trees)]
        return EXIT_OK, res, "\n".join(lines)
    return EXIT_OK, _sum_json(out), _sum_text(out)


# ------------------------------------------------------------ parser


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qkpz", description="decorated-tree calculus for quasi-generalised KPZ",
                                epilog=TREE_GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help=f"key=value config file (default: ${CONFIG_ENV})")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON object")
    common.add_argument("--noise-degree", type=Fraction, help="alpha_n")
    common.add_argument("--kappa", type=Fraction)
    common.add_argument("-N", "--param-order", type=int, dest="N", help="max parameter derivative order")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_, epilog=TREE_GRAMMAR,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.set_defaults(func=fn)
        return sp

    sp = add("enumerate", cmd_enumerate, "negative-degree trees")
    sp.add_argument("--noises", type=int, action="append", help="noise count (repeatable)")
    sp.add_argument("--rule", default="saturated", choices=["saturated", "sat", "full"])
    sp.add_argument("--strategy", default="recursive", choices=["recursive", "growth"])

    sp = add("upsilon", cmd_upsilon, "elementary differential of a tree")
    sp.add_argument("--nonlinearity", default="Fhat", help="F, Fhat, U or V:<name>")
    sp.add_argument("--tree", required=True)

    sp = add("coherence", cmd_coherence, "expansion coefficients against Upsilon/S")
    sp.add_argument("--max-noises", type=int)
    sp.add_argument("--report", choices=["json", "text"])

    for name, fn, help_ in (("locality", cmd_locality, "locality of the covariant combination"),
                            ("null", cmd_null, "vanishing of higher parameter orders")):
        sp = add(name, fn, help_)
        sp.add_argument("--tau1", default="Xi")
        sp.add_argument("--tau2", default="Xi")
        if name == "null":
            sp.add_argument("--kind", choices=["single", "cherry"], default="cherry")
            sp.add_argument("--k", type=int)
            sp.add_argument("--l", type=int)

    sp = add("counterterm", cmd_counterterm, "counterterm of a noise sector")
    sp.add_argument("--sector", type=int, choices=[2, 4], required=True)
    sp.add_argument("--mode", choices=["raw", "local"], default="local")

    sp = add("ito-constant", cmd_ito, "Ito constant of a mollifier")
    sp.add_argument("--eps", type=float, nargs="+", action="extend")
    sp.add_argument("--mollifier", help="poly or file:<path>")
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = add("parse", cmd_parse, "parse and canonicalise a tree, word or expression")
    sp.add_argument("text")
    sp.add_argument("--expr", action="store_true", help="parse a coefficient expression")

    sp = add("calc", cmd_calc, "graft, star or nabla of two trees")
    sp.add_argument("op", choices=["graft", "star", "nabla"])
    sp.add_argument("--sigma", required=True)
    sp.add_argument("--tau", required=True)
    sp.add_argument("--alpha", default="I", help="edge for graft, e.g. I, Ix, I{1}")
    sp.add_argument("--m", type=int, default=0, help="order for nabla")
    return p


def _edge_alias(text: str):
    probe = parse_tree(f"One[{text.strip()}(Xi)]")
    return probe.children[0][0]


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = read_config(args.config or os.environ.get(CONFIG_ENV))
        over = {k: getattr(args, k) for k in ("noise_degree", "kappa", "N", "max_noises", "mollifier")
                if getattr(args, k, None) is not None}
        if getattr(args, "json", False) or getattr(args, "report", None) == "json":
            over["output"] = "json"
        elif getattr(args, "report", None) == "text":
            over["output"] = "text"
        cfg = replace(cfg, **over)
        if args.command == "calc":
            args.alpha = _edge_alias(args.alpha)
        code, results, text = args.func(args, cfg)
    except (ParseError, NotLocalInput) as exc:
        print(f"error: {exc}\n\n{TREE_GRAMMAR}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, QkpzError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.output == "json":
        json.dump({"command": args.command, "config": cfg.to_json(), "results": results},
                  out, indent=2, sort_keys=False)
        out.write("\n")
    else:
        out.write(text + "\n")
    return code


def main() -> None:
    sys.exit(run())


__all__ = ["Config", "read_config", "parse_word", "run", "main", "CONFIG_ENV", "TREE_GRAMMAR"]
