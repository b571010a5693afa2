from __future__ import annotations

import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.cayley import generate_ball, z2_presentation
from coarsekit.graphs import grid_graph
from coarsekit.patterns import (
    PatternSpace,
    coset_join,
    coset_joins,
    coset_pattern,
    discreteness_profile,
    grid_lines_pattern,
    nearest_point_projection,
    projection_diameter,
    projection_diameters,
    _join_vertices,
    set_distance,
    translate_pattern,
)
from coarsekit.serialize import pattern_from_json
from coarsekit.stallings import CosetId, SubgroupPredicate, coset_partition, fold

import oracles


def _pred(*gens):
    return SubgroupPredicate.of(fold([oracles.from_str(g) for g in gens], 2))


def _join_oracle(ball, members, far):
    """Union of all geodesics between far pairs, via networkx."""
    g = oracles.nx_graph(ball)
    out = set()
    for i, u in enumerate(members):
        for v in members[i + 1 :]:
            if nx.shortest_path_length(g, int(u), int(v)) >= far:
                for path in nx.all_shortest_paths(g, int(u), int(v)):
                    out.update(path)
    return out


@pytest.mark.parametrize("gens", [["a"], ["ab"], ["aa"], ["a", "bb"]])
def test_tree_joins_match_geodesic_union(f2_balls, gens):
    ball = f2_balls(4)
    pred = _pred(*gens)
    cosets, labels = coset_partition(pred, ball)
    for k, j in enumerate(coset_joins(ball, pred)):
        members = np.flatnonzero(labels == k)
        want = _join_oracle(ball, members, j.far_threshold)
        if j.degenerate:
            assert not want
            assert set(j.vertices.tolist()) == set(members.tolist())
        else:
            assert set(j.vertices.tolist()) == want


def test_generic_joins_match_geodesic_union():
    # in Z^2 geodesics branch, so the non-tree path is exercised
    ball = generate_ball(z2_presentation(), 3)
    diag = np.array([ball.index[w] for w in ball.words if w in {(), (1, 2), (-1, -2), (1,), (-1,)}])
    got = _join_vertices(ball, diag, 3)
    assert set(got.tolist()) == _join_oracle(ball, diag, 3)
    assert len(got) > len(diag)


def test_cyclic_join_is_the_axis(f2, f2_balls):
    ball = f2_balls(4)
    j = coset_join(ball, _pred("a"), CosetId.of(()))
    assert sorted(ball.words[v] for v in j.vertices) == sorted(
        [tuple([1] * k) for k in range(5)] + [tuple([-1] * k) for k in range(1, 5)]
    )
    jb = coset_join(ball, _pred("a"), CosetId.of((2,)))
    assert len(jb) == 7 and not jb.degenerate


def test_projection_is_nearest_points(f2, f2_balls):
    ball = f2_balls(3)
    axis = [ball.index[tuple([1] * k)] for k in range(4)]
    x = ball.index[f2.parse("a a b")]
    assert nearest_point_projection(ball, x, axis).tolist() == [ball.index[(1, 1)]]
    with pytest.raises(ValueError):
        nearest_point_projection(ball, x, [])


def _scalar_projection_diameter(g, Ji, Jj):
    rows = {int(u): nx.single_source_shortest_path_length(g, int(u)) for u in Jj}
    hit = set()
    for x in Ji:
        d = {u: rows[u][int(x)] for u in rows}
        m = min(d.values())
        hit.update(u for u, v in d.items() if v == m)
    return max((rows[u][w] for u in hit for w in hit), default=0)


def test_projection_diameters_match_scalar_oracle(f2_balls):
    ball = f2_balls(5)
    g = oracles.nx_graph(ball)
    joins = [j.vertices for j in coset_joins(ball, _pred("ab"))][:12]
    P = projection_diameters(ball, joins)
    rng = random.Random(3)
    for _ in range(20):
        i, j = rng.randrange(len(joins)), rng.randrange(len(joins))
        assert P[i, j] == projection_diameter(ball, joins[i], joins[j])
        assert P[i, j] == _scalar_projection_diameter(g, joins[i], joins[j])


def test_projection_diameters_large_target_path():
    g = grid_graph(5)
    big = list(range(70))
    small = [100, 101]
    P = projection_diameters(g, [big, small])
    assert P[1, 0] == projection_diameter(g, small, big)
    assert P[0, 1] == projection_diameter(g, big, small)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 120), min_size=1, max_size=5), st.lists(st.integers(0, 120), min_size=1, max_size=5))
def test_set_distance_against_networkx(A, B):
    g = grid_graph(5)
    want = min(nx.multi_source_dijkstra_path_length(oracles.nx_graph(g), set(A))[b] for b in B)
    assert set_distance(g, A, B) == want


def test_profiles_small_radii():
    assert discreteness_profile(_pred("a"), 2, [4, 5, 6]) == [9, 9, 9]
    kernel = discreteness_profile(SubgroupPredicate.abelianization_kernel(2), 2, [4, 5])
    assert kernel[0] < kernel[1]
    with pytest.raises(ValueError):
        discreteness_profile(_pred("a"), 0, [4])


def test_profile_counts_by_brute_force(f2_balls):
    # recount at R=5 straight from the definition using networkx distances
    ball = f2_balls(5)
    pred = _pred("a")
    g = oracles.nx_graph(ball)
    d = dict(nx.all_pairs_shortest_path_length(g))
    cosets, labels = coset_partition(pred, ball)
    near = [v for v in range(ball.n) if ball.lengths[v] <= 2]
    far = (2 * 5) // 3
    count = 0
    for k in range(len(cosets)):
        mem = np.flatnonzero(labels == k).tolist()
        hit = any(
            d[u][v] >= far and d[w][u] >= 1 and d[w][v] >= 1 and d[w][u] + d[w][v] == d[u][v]
            for u in mem
            for v in mem
            for w in near
        )
        count += hit
    assert discreteness_profile(pred, 2, [5]) == [count]


def test_translate_pattern_moves_members(f2, f2_balls):
    p = coset_pattern(f2_balls(3), _pred("a"))
    q = translate_pattern(p, f2.parse("b"), f2_balls(4))
    assert len(q) == len(p)
    moved = {f2_balls(4).words[v] for v in q.family[0]}
    assert moved == {(2,) + p.graph.words[v] for v in p.family[0]}
    assert q.labels[0] == CosetId.of((2,))


def test_pattern_json_round_trip(f2_balls):
    p = coset_pattern(f2_balls(3), _pred("a", "bb"))
    again = pattern_from_json(p.to_json())
    assert [s.tolist() for s in again.family] == [s.tolist() for s in p.family]
    assert again.labels == p.labels
    lines = grid_lines_pattern(6)
    again = pattern_from_json(lines.to_json())
    assert again.labels == lines.labels
    assert [s.tolist() for s in again.family] == [s.tolist() for s in lines.family]


def test_member_distance_cache_is_bounded(f2_balls):
    p = coset_pattern(f2_balls(3), _pred("a"))
    p.cache_size = 2
    for i in range(5):
        p.member_distances(i)
    assert len(p._dist) == 2
    with pytest.raises(ValueError):
        p.member_distances(0).__setitem__(0, 5)


def test_pattern_validation(f2_balls):
    with pytest.raises(ValueError):
        PatternSpace(f2_balls(1), [[]])
    with pytest.raises(ValueError):
        PatternSpace(f2_balls(1), [[0]], labels=["x", "y"])
