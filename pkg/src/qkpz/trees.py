"""Partially planar decorated trees.

A tree is a root node carrying a noise label (``Xi`` for the noise, ``One``
for the constant), a node decoration ``X^k`` and an ordered tuple of planted
children ``I_alpha(tau)``.  Children whose edge has no parameter derivative
(``h == 0``) commute with each other; edges with ``h >= 1`` pin their
position, except that identical edge decorations commute.  Trees are
canonicalised on construction by sorting every maximal run of commuting
children, so equality and hashing are structural.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from math import factorial
from typing import Iterable, Iterator, NamedTuple

from .errors import IncompatibleNoise, ParseError

XI = "Xi"
ONE = "One"
_NOISE_RANK = {ONE: 0, XI: 1}

REF_NOISE_DEGREE = Fraction(-3, 2)
REF_KAPPA = Fraction(1, 100)


class MultiIndex(NamedTuple):
    t: int = 0
    x: int = 0

    @property
    def weight(self) -> int:
        """Parabolic weight ``2t + x``."""
        return 2 * self.t + self.x

    def factorial(self) -> int:
        return factorial(self.t) * factorial(self.x)

    def __add__(self, other):  # type: ignore[override]
        return MultiIndex(self.t + other[0], self.x + other[1])

    def __sub__(self, other):
        return MultiIndex(self.t - other[0], self.x - other[1])

    def is_nonneg(self) -> bool:
        return self.t >= 0 and self.x >= 0


class ParamIndex(NamedTuple):
    """Edge index ``alpha = (h, st)``: ``h`` parameter derivatives, ``st`` space-time."""

    h: int = 0
    st: MultiIndex = MultiIndex()

    def key(self) -> tuple:
        return (self.h, self.st.t, self.st.x)

    def shift_h(self, n: int) -> "ParamIndex":
        return ParamIndex(self.h + n, self.st)

    def is_nonneg(self) -> bool:
        return self.h >= 0 and self.st.is_nonneg()


ZERO_MI = MultiIndex(0, 0)
THIN = ParamIndex(0, MultiIndex(0, 0))
THICK = ParamIndex(0, MultiIndex(0, 1))


def pidx(h: int = 0, t: int = 0, x: int = 0) -> ParamIndex:
    return ParamIndex(h, MultiIndex(t, x))


def as_param(alpha) -> ParamIndex:
    """Accept a ParamIndex, an ``(h, (t, x))`` pair, an ``(h, t, x)`` triple or a name like ``"cx"``."""
    if isinstance(alpha, ParamIndex):
        return alpha
    if isinstance(alpha, str):
        return pidx(alpha.count("c"), alpha.count("t"), alpha.count("x"))
    if len(alpha) == 2:
        h, st = alpha
        return ParamIndex(int(h), MultiIndex(*st))
    h, t, x = alpha
    return pidx(h, t, x)


class DecoratedTree:
    """Canonical partially planar decorated tree (immutable, hashable)."""

    __slots__ = ("noise", "deco", "children", "_key", "_hash", "_deg")

    def __init__(self, noise: str = ONE, deco=ZERO_MI, children: Iterable = ()):
        if noise not in _NOISE_RANK:
            raise ValueError(f"unknown noise label {noise!r}")
        self.noise = noise
        self.deco = MultiIndex(*deco)
        self.children = _canonical_children(
            tuple((as_param(a), c) for a, c in children))
        self._key = None
        self._hash = None
        self._deg = None

    # structural identity
    def key(self) -> tuple:
        if self._key is None:
            self._key = (
                _NOISE_RANK[self.noise],
                tuple(self.deco),
                tuple((a.key(), c.key()) for a, c in self.children),
            )
        return self._key

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, DecoratedTree):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __lt__(self, other):
        return sort_key(self) < sort_key(other)

    def __repr__(self):
        return f"DecoratedTree({render_tree(self)!r})"

    def __str__(self):
        return render_tree(self)

    def __mul__(self, other):
        return tree_product(self, other)

    # convenience
    @property
    def is_unit(self) -> bool:
        return self.noise == ONE and not self.children and self.deco == ZERO_MI

    def noise_count(self) -> int:
        return (self.noise == XI) + sum(c.noise_count() for _, c in self.children)

    def edge_count(self) -> int:
        return len(self.children) + sum(c.edge_count() for _, c in self.children)

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for _, c in self.children)

    def edges(self) -> Iterator[ParamIndex]:
        for a, c in self.children:
            yield a
            yield from c.edges()

    def nodes(self) -> Iterator["DecoratedTree"]:
        yield self
        for _, c in self.children:
            yield from c.nodes()

    def is_unparametrised(self) -> bool:
        return all(a.h == 0 for a in self.edges())

    def has_zero_decorations(self) -> bool:
        return all(n.deco == ZERO_MI for n in self.nodes())

    def is_planted_product(self) -> bool:
        """Root is ``One`` with zero decoration (a product of planted trees)."""
        return self.noise == ONE and self.deco == ZERO_MI

    def replace(self, noise=None, deco=None, children=None) -> "DecoratedTree":
        return DecoratedTree(
            self.noise if noise is None else noise,
            self.deco if deco is None else deco,
            self.children if children is None else children,
        )


def _ref_planted_degree(alpha: ParamIndex, tree: DecoratedTree) -> Fraction:
    return degree(tree) + 2 - alpha.st.weight


def _child_sort_key(child) -> tuple:
    a, t = child
    return (_ref_planted_degree(a, t), a.key(), t.key())


def _canonical_children(children: tuple) -> tuple:
    """Sort every maximal run of mutually commuting children.

    Two adjacent edges commute when both have ``h == 0`` or when they carry
    the same decoration.
    """
    out: list = []
    run: list = []

    def flush():
        if run:
            out.extend(sorted(run, key=_child_sort_key))
            run.clear()

    for ch in children:
        if run and not _commute(run[-1][0], ch[0], run[0][0]):
            flush()
        run.append(ch)
    flush()
    return tuple(out)


def _commute(prev: ParamIndex, a: ParamIndex, first: ParamIndex) -> bool:
    if prev.h == 0 and a.h == 0:
        return True
    return a == prev == first


def commutative_representative(tree: DecoratedTree) -> DecoratedTree:
    """Representative of ``tree`` modulo full commutation of sibling edges.

    Children are ordered by increasing ``h`` (so derivatives without
    parameter order act first), then by the canonical child order.
    """
    kids = [(a, commutative_representative(c)) for a, c in tree.children]
    kids.sort(key=lambda ch: (ch[0].h,) + _child_sort_key(ch))
    return DecoratedTree(tree.noise, tree.deco, tuple(kids))


def sort_key(tree: DecoratedTree) -> tuple:
    """Total order used for deterministic output (degree, then structure)."""
    return (degree(tree), tree.key())


def canonicalize(tree: DecoratedTree) -> DecoratedTree:
    """Rebuild ``tree`` bottom-up; a no-op on already canonical trees."""
    return DecoratedTree(
        tree.noise, tree.deco,
        tuple((a, canonicalize(c)) for a, c in tree.children))


def unit() -> DecoratedTree:
    """The empty tree ``1 = X^0``."""
    return DecoratedTree(ONE)


def xi() -> DecoratedTree:
    return DecoratedTree(XI)


def monomial(k) -> DecoratedTree:
    return DecoratedTree(ONE, MultiIndex(*k))


def plant(alpha, tree: DecoratedTree) -> DecoratedTree:
    """``I_alpha(tree)``: a One root with a single child edge."""
    return DecoratedTree(ONE, ZERO_MI, ((as_param(alpha), tree),))


def tree_product(t1: DecoratedTree, t2: DecoratedTree) -> DecoratedTree:
    """Identify roots; ``t1``'s root edges precede ``t2``'s."""
    if t1.noise == XI and t2.noise == XI:
        raise IncompatibleNoise("both factors carry the noise at the root")
    noise = XI if XI in (t1.noise, t2.noise) else ONE
    return DecoratedTree(noise, t1.deco + t2.deco, t1.children + t2.children)


def product(trees: Iterable[DecoratedTree]) -> DecoratedTree:
    out = unit()
    for t in trees:
        out = tree_product(out, t)
    return out


def degree(tree: DecoratedTree, noise_degree=None, kappa=None) -> Fraction:
    """Homogeneity of ``tree``; parameter derivatives contribute nothing."""
    if noise_degree is None and kappa is None:
        if tree._deg is None:
            tree._deg = _degree(tree, REF_NOISE_DEGREE - REF_KAPPA)
        return tree._deg
    nd = Fraction(REF_NOISE_DEGREE if noise_degree is None else noise_degree)
    k = Fraction(REF_KAPPA if kappa is None else kappa)
    if k <= 0:
        raise ValueError("kappa must be positive")
    return _degree(tree, nd - k)


def _degree(tree: DecoratedTree, xi_deg: Fraction) -> Fraction:
    d = Fraction(tree.deco.weight) + (xi_deg if tree.noise == XI else 0)
    for a, c in tree.children:
        d += _degree(c, xi_deg) + 2 - a.st.weight
    return d


class Block(NamedTuple):
    alpha: ParamIndex
    tree: DecoratedTree
    multiplicity: int


def decompose(tree: DecoratedTree):
    """Return ``(k, blocks, noise)`` with consecutive identical children grouped.

    Equal children are adjacent in canonical form whenever they commute, so
    run-length encoding gives the maximal multiplicities.
    """
    blocks: list = []
    for a, c in tree.children:
        if blocks and blocks[-1].alpha == a and blocks[-1].tree == c:
            last = blocks[-1]
            blocks[-1] = Block(a, c, last.multiplicity + 1)
        else:
            blocks.append(Block(a, c, 1))
    return tree.deco, blocks, tree.noise


def reassemble(k, blocks, noise) -> DecoratedTree:
    children = []
    for a, c, m in blocks:
        children.extend([(a, c)] * m)
    return DecoratedTree(noise, k, children)


def symmetry_factor(tree: DecoratedTree) -> int:
    """``S(tau) = k! * prod_j S(tau_j)^beta_j beta_j!``."""
    k, blocks, _ = decompose(tree)
    s = MultiIndex(*k).factorial()
    for _, c, m in blocks:
        s *= symmetry_factor(c) ** m * factorial(m)
    return s


def inner_product(sigma, tau) -> int | Fraction:
    """``<sigma, tau> = S(tau)`` on equal trees, 0 otherwise; bilinear on sums."""
    if isinstance(sigma, DecoratedTree) and isinstance(tau, DecoratedTree):
        return symmetry_factor(tau) if sigma == tau else 0
    s = sigma if isinstance(sigma, TreeSum) else TreeSum.of(sigma)
    t = tau if isinstance(tau, TreeSum) else TreeSum.of(tau)
    total = 0
    for tree, c in s.items():
        d = t.get(tree)
        if d:
            total = total + c * d * symmetry_factor(tree)
    return total


# ------------------------------------------------------------------ TreeSum


class TreeSum:
    """Finite linear combination of canonical trees.

    Coefficients may be ints, Fractions or ``SymExpr``; anything supporting
    ``+``, ``*`` and truthiness works.  Zero coefficients are never stored.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        self._terms: dict = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for t, c in items:
                self.add_term(t, c)

    @classmethod
    def of(cls, tree: DecoratedTree, coeff=1) -> "TreeSum":
        return cls([(tree, coeff)])

    def add_term(self, tree: DecoratedTree, coeff) -> None:
        if not coeff:
            return
        prev = self._terms.get(tree)
        v = coeff if prev is None else prev + coeff
        if v:
            self._terms[tree] = v
        else:
            self._terms.pop(tree, None)

    def get(self, tree, default=0):
        return self._terms.get(tree, default)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: sort_key(kv[0]))

    def trees(self):
        return [t for t, _ in self.items()]

    def __iter__(self):
        return iter(self.trees())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __contains__(self, tree):
        return tree in self._terms

    def __eq__(self, other):
        if isinstance(other, DecoratedTree):
            other = TreeSum.of(other)
        if not isinstance(other, TreeSum):
            return NotImplemented
        return self._terms == other._terms

    def __add__(self, other):
        out = TreeSum(self._terms)
        if isinstance(other, DecoratedTree):
            out.add_term(other, 1)
            return out
        for t, c in other._terms.items():
            out.add_term(t, c)
        return out

    def __sub__(self, other):
        return self + (-1) * (other if isinstance(other, TreeSum) else TreeSum.of(other))

    def __neg__(self):
        return (-1) * self

    def scale(self, c) -> "TreeSum":
        out = TreeSum()
        if not c:
            return out
        for t, d in self._terms.items():
            out.add_term(t, c * d)
        return out

    def __mul__(self, c):
        if isinstance(c, (TreeSum, DecoratedTree)):
            return sum_product(self, c)
        return self.scale(c)

    def __rmul__(self, c):
        return self.scale(c)

    def map_coeffs(self, fn) -> "TreeSum":
        out = TreeSum()
        for t, c in self._terms.items():
            out.add_term(t, fn(c))
        return out

    def __repr__(self):
        if not self._terms:
            return "TreeSum(0)"
        def fmt(c):
            text = str(c)
            return f"({text})" if any(op in text.lstrip("-") for op in "+-") else text
        return "TreeSum(" + " + ".join(f"{fmt(c)}*{render_tree(t)}" for t, c in self.items()) + ")"


def as_sum(x) -> TreeSum:
    return x if isinstance(x, TreeSum) else TreeSum.of(x)


def sum_product(s1, s2) -> TreeSum:
    """Bilinear extension of the tree product (incompatible pairs vanish)."""
    out = TreeSum()
    for t1, c1 in as_sum(s1)._terms.items():
        for t2, c2 in as_sum(s2)._terms.items():
            if t1.noise == XI and t2.noise == XI:
                continue
            out.add_term(tree_product(t1, t2), c1 * c2)
    return out


# ---------------------------------------------------------- text rendering


def _render_edge(a: ParamIndex) -> str:
    st = a.st
    if st == (0, 0):
        name = "I"
    elif st == (0, 1):
        name = "Ix"
    else:
        name = f"I_({st.t},{st.x})"
    return name + (f"{{{a.h}}}" if a.h else "")


def render_tree(tree: DecoratedTree, fmt: str = "text") -> str:
    """Text (grammar form) or ``json`` rendering."""
    if fmt == "json":
        return json.dumps(tree_to_json(tree), sort_keys=True)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    return _render(tree)


def _render(tree: DecoratedTree) -> str:
    if tree.deco != ZERO_MI:
        head = f"X^({tree.deco.t},{tree.deco.x})" + (XI if tree.noise == XI else "")
    else:
        head = tree.noise
    if not tree.children:
        return head
    inner = ", ".join(f"{_render_edge(a)}({_render(c)})" for a, c in tree.children)
    return f"{head}[{inner}]"


def tree_to_json(tree: DecoratedTree) -> dict:
    return {
        "noise": tree.noise,
        "nodeDecoration": [tree.deco.t, tree.deco.x],
        "children": [
            {"h": a.h, "st": [a.st.t, a.st.x], "tree": tree_to_json(c)}
            for a, c in tree.children
        ],
    }


def tree_from_json(obj) -> DecoratedTree:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return DecoratedTree(
        obj["noise"], MultiIndex(*obj.get("nodeDecoration", (0, 0))),
        tuple((ParamIndex(ch.get("h", 0), MultiIndex(*ch["st"])), tree_from_json(ch["tree"]))
              for ch in obj.get("children", ())),
    )


# ----------------------------------------------------------------- parsing

_TREE_TOKEN = re.compile(
    r"\s*(?:(?P<noise>Xi|One)|(?P<mono>X\^\(\s*(?P<mt>\d+)\s*,\s*(?P<mx>\d+)\s*\))"
    r"|(?P<edge>Ix|I_\(\s*(?P<et>\d+)\s*,\s*(?P<ex>\d+)\s*\)|I)(?:\{\s*(?P<h>\d+)\s*\})?"
    r"|(?P<punct>[\[\](),*]))"
)


class _TreeParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip()
        if self.pos >= len(self.text):
            return None
        return _TREE_TOKEN.match(self.text, self.pos)

    def take(self, expected):
        m = self.peek()
        if m is None:
            raise ParseError("unexpected end of input", len(self.text), expected)
        self.pos = m.end()
        return m

    def expect_punct(self, ch):
        m = self.peek()
        if m is None or m.group("punct") != ch:
            raise ParseError("unexpected input", self._at(), {repr(ch)})
        self.pos = m.end()

    def _at(self):
        self._skip()
        return self.pos

    def tree(self) -> DecoratedTree:
        out = self.node()
        while True:
            m = self.peek()
            if m is None or m.group("punct") != "*":
                return out
            self.pos = m.end()
            rhs = self.node()
            try:
                out = tree_product(out, rhs)
            except IncompatibleNoise as exc:
                raise ParseError(str(exc), self._at()) from exc

    def node(self) -> DecoratedTree:
        start = self._at()
        m = self.peek()
        node_start = {"Xi", "One", "X^(t,x)"}
        if m is None:
            raise ParseError("unexpected end of input", start, node_start)
        if m.group("mono"):
            self.pos = m.end()
            deco = MultiIndex(int(m.group("mt")), int(m.group("mx")))
            noise = ONE
            m2 = self.peek()
            if m2 is not None and m2.group("noise"):
                self.pos = m2.end()
                noise = m2.group("noise")
        elif m.group("noise"):
            self.pos = m.end()
            deco, noise = ZERO_MI, m.group("noise")
        else:
            raise ParseError("expected a node", start, node_start)
        children = []
        m = self.peek()
        if m is not None and m.group("punct") == "[":
            self.pos = m.end()
            while True:
                children.append(self.child())
                m = self.peek()
                if m is not None and m.group("punct") == ",":
                    self.pos = m.end()
                    continue
                if m is not None and m.group("punct") == "]":
                    self.pos = m.end()
                    break
                raise ParseError("unterminated child list", self._at(), {"','", "']'"})
        return DecoratedTree(noise, deco, children)

    def child(self):
        start = self._at()
        m = self.peek()
        if m is None or not m.group("edge"):
            raise ParseError("expected an edge", start, {"I", "Ix", "I_(t,x)"})
        self.pos = m.end()
        name = m.group("edge")
        if name == "I":
            st = MultiIndex(0, 0)
        elif name == "Ix":
            st = MultiIndex(0, 1)
        else:
            st = MultiIndex(int(m.group("et")), int(m.group("ex")))
        h = int(m.group("h")) if m.group("h") else 0
        self.expect_punct("(")
        sub = self.tree()
        self.expect_punct(")")
        return ParamIndex(h, st), sub


def parse_tree(text: str) -> DecoratedTree:
    """Parse the bracket grammar, e.g. ``"One[Ix(Xi), Ix{1}(Xi)]"``.

    Besides the basic grammar, ``I_(t,x)`` denotes a general space-time
    index and ``A * B`` is the tree product.
    """
    p = _TreeParser(text)
    out = p.tree()
    if p.peek() is not None or p._at() < len(text):
        raise ParseError("trailing input", p._at(), {"'*'", "end of input"})
    return out


def as_tree(x) -> DecoratedTree:
    return parse_tree(x) if isinstance(x, str) else x


def rewrite_at_nodes(tree: DecoratedTree, fn) -> list:
    """Apply ``fn(node) -> iterable of (coeff, new_node)`` at every node.

    Returns the list of ``(coeff, new_tree)`` obtained by replacing one node
    at a time (each occurrence of identical subtrees is a separate node).
    """
    out = [(c, t) for c, t in fn(tree)]
    kids = tree.children
    for i, (a, c) in enumerate(kids):
        for coeff, new_c in rewrite_at_nodes(c, fn):
            new_kids = kids[:i] + ((a, new_c),) + kids[i + 1:]
            out.append((coeff, DecoratedTree(tree.noise, tree.deco, new_kids)))
    return out
