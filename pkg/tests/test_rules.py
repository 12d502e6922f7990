from __future__ import annotations

from fractions import Fraction

import pytest

from oracles.brute_trees import negative
from qkpz.errors import NotSubcritical
from qkpz.renorm import sector2_trees
from qkpz.rules import (
    EnumConfig, RuleSet, conforms, enumerate_negative, is_negative, max_nodes,
    parametrise, unparametrise,
)
from qkpz.trees import parse_tree, sort_key


def _enum(n, strategy="recursive", rules=None, **kw):
    return enumerate_negative(rules, EnumConfig(noise_counts={n}, **kw), strategy)


@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 6), (4, 23)])
def test_counts_by_noise(n, count):
    assert len(_enum(n)) == count


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_matches_brute_force(n):
    assert set(_enum(n)) == {parse_tree(s) for s in negative(n)}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_strategies_agree(n):
    assert _enum(n, "recursive") == _enum(n, "growth")


def test_output_is_sorted_and_conformal():
    out = enumerate_negative()
    assert out == sorted(out, key=sort_key)
    assert len(out) == 25
    sat = RuleSet.saturated()
    assert all(conforms(t, sat) and is_negative(t) for t in out)


def test_full_rule_contains_saturated():
    full = set(_enum(2, rules=RuleSet.full()))
    assert set(_enum(2)) <= full
    assert parse_tree("One[Ix(Xi), I(Xi)]") in full
    assert all(conforms(t, RuleSet.full()) for t in full)


def test_rougher_noise_gives_more_trees():
    assert _enum(6) == []
    rough = _enum(6, noise_degree=Fraction(-7, 4))
    assert rough
    assert all(is_negative(t, EnumConfig(Fraction(-7, 4))) for t in rough)


def test_supercritical_rejected():
    with pytest.raises(NotSubcritical):
        enumerate_negative(cfg=EnumConfig(noise_degree=-2))


def test_kappa_must_be_positive():
    with pytest.raises(ValueError):
        EnumConfig(kappa=0)


def test_max_nodes_bound():
    cfg = EnumConfig()
    for n in (2, 4):
        assert all(t.node_count() <= max_nodes(n, cfg) for t in _enum(n))


def test_parametrise_sector2():
    base = _enum(2)
    assert len(parametrise(base, 1)) == 6
    assert set(parametrise(base, 1, max_total=1)) == set(sector2_trees())
    for t in parametrise(base, 2):
        assert unparametrise(t) in base


def test_named_rules():
    assert RuleSet.named("sat") == RuleSet.saturated()
    assert RuleSet.named("full") == RuleSet.full()
    with pytest.raises(ValueError):
        RuleSet.named("nope")
