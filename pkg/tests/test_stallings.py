from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.stallings import (
    CoreGraph,
    SubgroupPredicate,
    canonical_coset,
    conjugate,
    coset_members,
    coset_partition,
    fold,
    height,
    intersect,
    intersect_conjugate,
    is_malnormal,
    trivial_subgroup,
    width,
)
from coarsekit.words import free_reduce, inverse, multiply, reduced_words, shortlex_key

import oracles

letters = st.sampled_from([1, -1, 2, -2])
words = st.lists(letters, max_size=8).map(lambda w: free_reduce(w))

SUBGROUPS = [["a"], ["aa"], ["ab"], ["a", "bb"], ["a", "baB"], ["aab", "abb"]]


def _core(gens):
    return fold([oracles.from_str(g) for g in gens], 2)


@pytest.mark.parametrize("gens", SUBGROUPS)
def test_membership_against_enumeration(gens):
    h = _core(gens)
    members = oracles.subgroup_elements(gens, 5)
    for n in range(6):
        for w in reduced_words(2, n):
            assert h.accepts(w) == (oracles.to_str(w) in members)


def test_fold_is_canonical():
    assert _core(["a", "baB"]) == _core(["baB", "a", "aa"])
    assert _core(["aa", "aaa"]) == _core(["a"])
    assert trivial_subgroup(2).is_trivial


def test_generators_regenerate_subgroup():
    h = _core(["aab", "abb"])
    assert fold(h.generators(), 2) == h


def test_core_json_round_trip():
    h = _core(["a", "baB"])
    assert CoreGraph.from_json(h.to_json()) == h


def test_intersection():
    # <a^2> ∩ <a^3> = <a^6>
    assert intersect(_core(["aa"]), _core(["aaa"])) == _core(["aaaaaa"])
    assert intersect(_core(["a"]), _core(["b"])).is_trivial


@settings(max_examples=40, deadline=None)
@given(words)
def test_conjugate_membership(g):
    h = _core(["a", "bb"])
    c = conjugate(h, g)
    for w in (oracles.from_str("a"), oracles.from_str("bb"), oracles.from_str("abb")):
        assert c.accepts(multiply(g, w, inverse(g)))


def test_intersect_conjugate_of_a_squared():
    h = _core(["aa"])
    assert not intersect_conjugate(h, (1,)).is_trivial
    assert intersect_conjugate(h, (2,)).is_trivial


@settings(max_examples=60, deadline=None)
@given(words, words)
def test_coset_key_decides_equal_cosets(g1, g2):
    for pred in (SubgroupPredicate.of(_core(["a", "bb"])), SubgroupPredicate.abelianization_kernel(2)):
        same = pred.contains(multiply(inverse(g1), g2))
        assert (pred.coset_key(g1) == pred.coset_key(g2)) == same


@settings(max_examples=60, deadline=None)
@given(words)
def test_canonical_coset_is_shortlex_least(g):
    pred = SubgroupPredicate.of(_core(["ab"]))
    c = canonical_coset(pred, g)
    assert pred.contains(multiply(inverse(g), c.representative))
    # brute force over a window that must contain the least element
    bound = len(c.representative)
    for n in range(bound + 1):
        for w in reduced_words(2, n):
            if pred.contains(multiply(inverse(g), w)):
                assert shortlex_key(w) >= shortlex_key(c.representative)


def test_partition_reps_are_canonical(f2_balls):
    ball = f2_balls(4)
    for gens in SUBGROUPS:
        pred = SubgroupPredicate.of(_core(gens))
        cosets, labels = coset_partition(pred, ball)
        for i, c in enumerate(cosets):
            assert canonical_coset(pred, c.representative) == c
            assert set(coset_members(pred, ball, c)) == set(int(v) for v in (labels == i).nonzero()[0])


def test_kernel_canonical_coset():
    pred = SubgroupPredicate.abelianization_kernel(2)
    assert canonical_coset(pred, oracles.from_str("bAbaa")).representative == (1, 2, 2)


@pytest.mark.parametrize(
    "gens, h, w, maln",
    [(["a"], 1, 1, True), (["aa"], 2, 2, False), (["ab"], 1, 1, True), (["a", "bb"], 2, 2, False)],
)
def test_height_width_malnormal(gens, h, w, maln):
    core = _core(gens)
    assert height(core, 4).value == h
    assert width(core, 4).value == w
    assert is_malnormal(core, 4).answer is maln
    assert height(core, 4).stable


def test_dedupe_collapses_equal_conjugates():
    # a normalises <a^2>, so a<a^2>a^-1 is the same subgroup
    core = _core(["aa"])
    assert width(core, 3).value == 2
    assert width(core, 3, dedupe=True).value == 1
