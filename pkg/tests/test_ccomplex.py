from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.ccomplex import (
    CComplex,
    build_coarse,
    build_exact,
    coarse_overlaps,
    dimension_report,
    isomorphic_under,
    stats,
)
from coarsekit.patterns import coset_pattern
from coarsekit.stallings import SubgroupPredicate, enumerate_cosets, fold, height, intersect, conjugate

import oracles


def _core(*gens):
    return fold([oracles.from_str(g) for g in gens], 2)


simplex_sets = st.lists(st.lists(st.integers(0, 6), min_size=1, max_size=4), max_size=6)


@settings(max_examples=50, deadline=None)
@given(simplex_sets)
def test_complex_is_downward_closed(simps):
    c = CComplex(list(range(7)), {tuple(s) for s in simps}, "exact")
    for s in c.simplices:
        for k in range(1, len(s)):
            for face in combinations(s, k):
                assert face in c.simplices
    assert all((i,) in c.simplices for i in range(7))


def test_bad_complexes():
    with pytest.raises(ValueError):
        CComplex([0, 1], {(0, 2)}, "exact")
    with pytest.raises(ValueError):
        CComplex([0], set(), "approx")


def test_exact_against_pairwise_intersections(f2_balls):
    h = _core("aa")
    cosets = enumerate_cosets(h, f2_balls(2))
    c = build_exact(h, 2, cosets)
    conj = [conjugate(h, x.representative) for x in cosets]
    for i, j in combinations(range(len(cosets)), 2):
        infinite = not intersect(conj[i], conj[j]).is_trivial
        assert ((i, j) in c.simplices) == infinite


def test_exact_stats_for_cyclic_subgroups(f2_balls):
    assert stats(build_exact(_core("a"), 3)) == (0, 1)
    assert stats(build_exact(_core("aa"), 3)) == (1, 2)
    assert stats(build_exact(_core("ab"), 3)) == (0, 1)
    assert stats(CComplex([], set(), "exact")) == (0, 0)


def test_dimension_report_both_readings():
    h = _core("aa")
    c = build_exact(h, 2)
    rep = dimension_report(c, height(h, 4).value)
    assert rep.literal == 1 and rep.height_plus_one == 3


def test_coarse_band_separates_edges(f2_balls):
    h = _core("a", "bb")
    pred = SubgroupPredicate.of(h)
    cosets = enumerate_cosets(pred, f2_balls(2))
    p = coset_pattern(f2_balls(7), pred).subpattern(cosets)
    diam, _ = coarse_overlaps(p, 2)
    exact = build_exact(h, 2, cosets)
    edges = set(exact.edges())
    for i, j in combinations(range(len(cosets)), 2):
        if (i, j) in edges:
            assert diam[i, j] >= 10
        else:
            assert diam[i, j] <= 4
    assert build_coarse(p, 6).simplices == exact.simplices


def test_isomorphism_witness():
    c1 = CComplex(["x", "y", "z"], {(0, 1)}, "exact")
    c2 = CComplex(["X", "Y", "Z"], {(0, 1)}, "exact")
    assert isomorphic_under({"x": "X", "y": "Y", "z": "Z"}, c1, c2) == (True, None)
    ok, witness = isomorphic_under({"x": "X", "y": "Z", "z": "Y"}, c1, c2)
    assert not ok and witness == ("x", "y")
    with pytest.raises(ValueError):
        isomorphic_under({"x": "X", "y": "X", "z": "Z"}, c1, c2)
    with pytest.raises(ValueError):
        isomorphic_under({"x": "X"}, c1, c2)


def test_exports():
    c = CComplex(["x", "y", "z"], {(0, 1, 2)}, "coarse")
    assert c.to_json()["maximal_simplices"] == [[0, 1, 2]]
    dot = c.to_dot()
    assert dot.startswith("graph ccomplex {") and "0 -- 1;" in dot
    sub = c.restrict(["z", "x"])
    assert sub.vertices == ["z", "x"] and (0, 1) in sub.simplices
    assert c.skeleton().number_of_edges() == 3
