from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.graphs import grid_graph
from coarsekit.patterns import PatternSpace, coset_pattern, grid_lines_pattern, translate_pattern
from coarsekit.rigidity import (
    KTooSmall,
    Pairing,
    check_axioms,
    construct_q,
    interior_vertices,
    label_pairing,
    map_displacement,
    minimal_meeting_ball,
    qi_envelope,
    set_distance_table,
    tie_break_discrepancy,
    translation_pairing,
    verify_qi,
    verify_uniform_properness,
)
from coarsekit.stallings import SubgroupPredicate, canonical_coset, fold
from coarsekit.words import multiply

import oracles


def _pred(*gens):
    return SubgroupPredicate.of(fold([oracles.from_str(g) for g in gens], 2))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(0, 120), min_size=1, max_size=3), min_size=1, max_size=4))
def test_meeting_ball_against_brute_force(sets):
    g = grid_graph(5)
    p = PatternSpace(g, sets)
    assert minimal_meeting_ball(p, range(len(sets))) == oracles.meeting_ball_brute(oracles.nx_graph(g), sets)


def test_meeting_ball_order_breaks_ties():
    g = grid_graph(3)
    p = PatternSpace(g, [[g.index[(-1, 0)]], [g.index[(1, 1)]]])
    centre, r = minimal_meeting_ball(p, [0, 1])
    ties = [v for v in range(g.n) if max(p.member_distances(0)[v], p.member_distances(1)[v]) == r]
    assert r == 2 and len(ties) > 1 and centre == min(ties)
    order = np.zeros(g.n, dtype=np.int64)
    order[max(ties)] = -1
    assert minimal_meeting_ball(p, [0, 1], order) == (max(ties), 2)
    with pytest.raises(ValueError):
        minimal_meeting_ball(p, [])


def test_pairing_validation_and_json():
    with pytest.raises(ValueError):
        Pairing({0: 1, 1: 1})
    phi = Pairing({0: 2, 1: 0, 2: 1})
    assert Pairing.from_json(phi.to_json()).map == phi.map
    assert phi.inverse().inverse().map == phi.map


def test_translation_pairing_by_labels(f2, f2_balls):
    pred = _pred("a")
    p1 = coset_pattern(f2_balls(4), pred)
    p2 = coset_pattern(f2_balls(6), pred)
    t = f2.parse("b")
    phi = translation_pairing(p1, p2, t, pred)
    for i, j in phi.map.items():
        assert p2.labels[j] == canonical_coset(pred, (2,) + p1.labels[i].representative)
    with pytest.raises(ValueError):
        label_pairing(p2, p1, lambda c: c)


def test_q_for_identity_pairing_is_identity(f2_balls):
    p = coset_pattern(f2_balls(5), _pred("a"))
    q = construct_q(p, p, Pairing.identity(len(p)), K=1, w2=1)
    assert set(q) == set(interior_vertices(p.graph, 1).tolist())
    assert map_displacement(p.graph, q, {g: g for g in q}) == 0
    assert tie_break_discrepancy(p, p, Pairing.identity(len(p)), 1, 1, seeds=(0, 1)) == 0


def test_k_too_small_names_vertex(f2_balls):
    p = coset_pattern(f2_balls(4), _pred("a"))
    with pytest.raises(KTooSmall) as err:
        construct_q(p, p, Pairing.identity(len(p)), K=1, w2=4)
    assert err.value.vertex in set(interior_vertices(p.graph, 1).tolist())


def test_qi_envelope_selection():
    d = np.array([1, 2, 3, 4])
    assert qi_envelope(d, d) == (Fraction(1), Fraction(0))
    lam, eps = qi_envelope(d, 2 * d)
    assert lam == 2 and eps == 0
    lam, eps = qi_envelope(d, d + 3)
    assert (lam, eps) == (Fraction(1), Fraction(3))


def test_verify_qi_on_translation(f2, f2_balls):
    p1 = coset_pattern(f2_balls(5), _pred("a"))
    t = f2.parse("b")
    p2 = translate_pattern(p1, t, f2_balls(6))
    phi = Pairing.identity(len(p1))
    q = construct_q(p1, p2, phi, 1, 1)
    net = [f2_balls(6).index[multiply(t, f2_balls(5).words[g])] for g in q]
    rep = verify_qi(q, p1, p2, phi, net=net, sample_count=500)
    assert (rep.lam, rep.epsilon, rep.surjectivity_gap) == (1, 0, 0)
    assert all(h == n for n, h in rep.pairing_bound.items())
    assert rep.to_json()["lambda"] == {"num": 1, "den": 1}


def test_uniform_properness_detects_blowup():
    lines = grid_lines_pattern(6, spacing=3)
    env = verify_uniform_properness(lines, lines, Pairing.identity(len(lines)))
    assert not env.blowup and all(f <= n for n, f in env.forward.items())
    # swapping a vertical line with a horizontal one: disjoint lines become crossing
    # and crossing lines become far apart
    n = len(lines)
    swap = {i: i for i in range(n)}
    swap[0], swap[n - 1] = n - 1, 0
    env = verify_uniform_properness(lines, lines, Pairing(swap), scale=1, offset=0)
    assert env.blowup and env.witness is not None


def test_set_distance_table_is_symmetric():
    lines = grid_lines_pattern(6, spacing=3)
    D = set_distance_table(lines)
    assert np.array_equal(D, D.T)
    assert D[0, 1] == 3 and D[0, len(lines) // 2] == 0


def test_axioms_on_cyclic_pattern(f2_balls):
    rep = check_axioms(coset_pattern(f2_balls(6), _pred("a")), [1, 2], [1, 2, 3])
    assert rep.M_of_k == {1: 3, 2: 9}
    assert rep.axiom4.N == 2
    assert rep.axiom4.K_of_k == {1: 1, 2: 3}
    assert not rep.violations1 and not rep.violations3
    assert rep.K_of_kn[(2, 2)] == 1
    js = rep.to_json()
    assert js["axiom4"]["violationsFromN"] == 0


def test_axioms_duplicate_member():
    lines = grid_lines_pattern(10)
    dup = PatternSpace(lines.graph, lines.family + [lines.family[3]])
    rep = check_axioms(dup, [1], [1, 2])
    assert any(set(c) == {3, len(lines)} for _, c, _ in rep.axiom4.violations_from(2))
    with pytest.raises(ValueError):
        check_axioms(dup, [], [1])
