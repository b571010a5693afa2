"""The eleven end-to-end acceptance checks, one test each.

Every test prints a single PASS/FAIL line and records it for the summary
at the end of the run.  Expected numbers come either from independent
brute-force oracles in ``oracles.py`` or from the frozen constants file.
"""
from __future__ import annotations

import random
from contextlib import contextmanager
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from coarsekit.boundary import (
    boundary_model,
    compare_crossratio_distance,
    cross_ratio,
    cross_ratio_chain,
    discrete_in_Cc0,
    limit_set_approx,
    shadow_annuli,
    verify_chain,
)
from coarsekit.cayley import Presentation, estimate_delta, generate_ball, z2_presentation
from coarsekit.ccomplex import build_coarse, build_exact, isomorphic_under, stats
from coarsekit.graphs import grid_graph
from coarsekit.patterns import (
    PatternSpace,
    coset_joins,
    coset_pattern,
    discreteness_profile,
    grid_lines_pattern,
    projection_diameters,
    translate_pattern,
)
from coarsekit.pipeline import dynamics_report
from coarsekit.rigidity import (
    Pairing,
    check_axioms,
    construct_q,
    map_displacement,
    minimal_meeting_ball,
    set_distance_table,
    verify_qi,
)
from coarsekit.serialize import bundled_subgroups, from_rational
from coarsekit.stallings import (
    SubgroupPredicate,
    as_predicate,
    canonical_coset,
    contains,
    enumerate_cosets,
    fold,
    height,
    is_malnormal,
    width,
)
from coarsekit.words import inverse, multiply, reduced_words

import oracles
from conftest import record_criterion


@contextmanager
def criterion(number: int, note: str = ""):
    ok = False
    try:
        yield
        ok = True
    finally:
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {note}")
        record_criterion(number, ok, note)


def core(f2, *gens):
    return fold([f2.parse(g) for g in gens], 2)


def test_1_ball_sizes(constants, f2_balls):
    with criterion(1, "ball sizes against breadth-first oracles"):
        for r in range(1, 7):
            oracle = oracles.free_ball_bfs(r)
            ball = f2_balls(r)
            assert ball.n == len(oracle) == constants["ball_sizes_f2"][str(r)]
            assert {oracles.to_str(w) for w in ball.words} == set(oracle)
        z = generate_ball(z2_presentation(), 4)
        assert z.n == len(oracles.z2_ball_bfs(4)) == constants["ball_size_z2_r4"] == 41


def test_2_hyperbolicity(constants, f2_balls):
    with criterion(2, "four-point delta: F2 zero, Z2 positive and growing"):
        est = estimate_delta(f2_balls(4))
        assert est.exhaustive and est.delta == 0 == constants["delta_f2_r4"]
        z4 = estimate_delta(generate_ball(z2_presentation(), 4))
        z6 = estimate_delta(generate_ball(z2_presentation(), 6))
        assert z4.exhaustive and z6.exhaustive
        assert 0 < z4.delta < z6.delta
        assert z4.delta == from_rational(constants["delta_z2"]["4"])
        assert z6.delta == from_rational(constants["delta_z2"]["6"])
        assert z4.delta == Fraction(oracles.four_point_delta(oracles.nx_graph(generate_ball(z2_presentation(), 4))))


def test_3_stallings(f2):
    with criterion(3, "membership against enumeration; height, width, malnormality"):
        data = {"cyclic_a": ["a"], "cyclic_a2": ["aa"], "cyclic_ab": ["ab"], "a_b2": ["a", "bb"], "a_bab": ["a", "baB"]}
        subs = bundled_subgroups()
        assert set(subs) == set(data)
        words = [w for n in range(7) for w in reduced_words(2, n)]
        for name, gens in data.items():
            members = oracles.subgroup_elements(gens, 6)
            mismatches = [w for w in words if contains(subs[name], w) != (oracles.to_str(w) in members)]
            assert mismatches == [], name
        a, a2 = core(f2, "a"), core(f2, "a^2")
        for r in (4, 6):
            assert height(a, r).value == 1 and width(a, r).value == 1
            assert is_malnormal(a, r).answer is True
            assert height(a2, r).value == 2 and width(a2, r).value == 2
            m = is_malnormal(a2, r)
            assert m.answer is False and m.witness == (1,)


def test_4_discreteness(constants, f2):
    with criterion(4, "join profiles and Hausdorff discreteness of limit sets"):
        radii = [4, 5, 6, 7, 8]
        a = as_predicate(core(f2, "a"))
        kernel = SubgroupPredicate.abelianization_kernel(2)
        prof_a = discreteness_profile(a, 2, radii)
        prof_k = discreteness_profile(kernel, 2, radii)
        assert prof_a == [constants["profile_a_N2"][str(r)] for r in radii]
        assert prof_k == [constants["profile_kernel_N2"][str(r)] for r in radii]
        assert len(set(prof_a)) == 1
        assert all(x < y for x, y in zip(prof_k, prof_k[1:]))

        depth = 6
        sep = Fraction(1, 2 ** (depth - 1))
        cosets = enumerate_cosets(a, generate_ball(f2, 3))
        disc = discrete_in_Cc0([limit_set_approx(a, c, depth) for c in cosets], sep)
        assert disc.answer and not disc.collision
        kcos = enumerate_cosets(kernel, generate_ball(f2, 2))
        kd = discrete_in_Cc0([limit_set_approx(kernel, c, depth) for c in kcos], sep)
        assert not kd.answer and kd.collision


def test_5_coboundedness(constants, f2_balls):
    with criterion(5, "projection diameters between distinct joins, radius 8 and 10"):
        a = as_predicate(fold([(1,)], 2))
        found = {}
        for r in (8, 10):
            joins = [j for j in coset_joins(f2_balls(r), a) if not j.degenerate]
            D = projection_diameters(f2_balls(r), [j.vertices for j in joins])
            off = D[~np.eye(len(joins), dtype=bool)]
            found[r] = int(off.max())
        assert found[8] == constants["projection_diameter_a"]["8"]
        assert found[8] <= 2
        assert found[10] <= found[8]
        assert found[10] == constants["projection_diameter_a"]["10"]


def _random_config(rng: random.Random, n: int) -> list[list[int]]:
    k = rng.randint(2, 5)
    return [rng.sample(range(n), rng.randint(1, 4)) for _ in range(k)]


def test_6_meeting_ball_oracle(f2_balls):
    with criterion(6, "minimal meeting ball against exhaustive search, 100 configurations"):
        rng = random.Random(20240601)
        graphs = [f2_balls(6), grid_graph(10)]
        assert graphs[1].n == 21 * 21
        agree = 0
        for t in range(100):
            g = graphs[t % 2]
            sets = _random_config(rng, g.n)
            p = PatternSpace(g, sets)
            got = minimal_meeting_ball(p, range(len(sets)))
            want = oracles.meeting_ball_brute(oracles.nx_graph(g), sets)
            agree += got == want
        assert agree == 100


def test_7_q_construction(constants, f2, f2_balls):
    with criterion(7, "q from identity and b-translation pairings; QI envelope"):
        a = as_predicate(core(f2, "a"))
        C = constants["q_displacement"]
        ball = f2_balls(6)
        p1 = coset_pattern(ball, a)
        phi = Pairing.identity(len(p1))
        q = construct_q(p1, p1, phi, K=1, w2=1)
        assert map_displacement(ball, q, {g: g for g in q}) <= C

        t = f2.parse("b")
        big = f2_balls(7)
        p2 = translate_pattern(p1, t, big)
        qt = construct_q(p1, p2, phi, K=1, w2=1)
        assert set(qt) == set(q)
        shift = {g: big.index[multiply(t, ball.words[g])] for g in qt}
        assert map_displacement(big, qt, shift) <= C

        back = f2_balls(8)
        p3 = translate_pattern(p2, inverse(t), back)
        qb = construct_q(p2, p3, phi, K=1, w2=1, domain=set(qt.values()))
        trip = {g: qb[h] for g, h in qt.items()}
        assert map_displacement(back, trip, {g: back.index[ball.words[g]] for g in trip}) <= C

        rep = verify_qi(qt, p1, p2, phi, net=np.unique(list(shift.values())))
        assert rep.lam == from_rational(constants["qi_envelope"]["lambda"])
        assert rep.epsilon == from_rational(constants["qi_envelope"]["epsilon"])
        assert rep.surjectivity_gap <= C + 1


def test_8_ccomplex(constants, f2, f2_balls):
    with criterion(8, "exact and coarse complexes agree; clique size equals width; pairing isomorphism"):
        window = constants["ccx_window"]
        big = f2_balls(8)
        t = f2.parse("b")
        rejected = 0
        for gens in (["a"], ["a^2"], ["a b"], ["a", "b^2"]):
            h = core(f2, *gens)
            pred = as_predicate(h)
            cosets = enumerate_cosets(pred, f2_balls(window))
            exact = build_exact(h, window, cosets)
            p = coset_pattern(big, pred).subpattern(cosets)
            coarse = build_coarse(p, constants["coarse_threshold"], constants["coarse_k"])
            assert exact.simplices == coarse.simplices, gens
            assert stats(exact).max_clique_size == width(h, 4).value, gens

            moved = [canonical_coset(pred, multiply(t, c.representative)) for c in cosets]
            image = build_exact(h, window, moved)
            phi = dict(zip(cosets, moved))
            ok, witness = isomorphic_under(phi, exact, image)
            assert ok and witness is None
            edges = exact.edges()
            if edges:
                # swap the image of an edge endpoint with that of a vertex not adjacent to it
                i, _ = edges[0]
                nbrs = {j for e in edges for j in e if i in e}
                j = next(v for v in range(len(cosets)) if v not in nbrs)
                bad = dict(phi)
                bad[cosets[i]], bad[cosets[j]] = phi[cosets[j]], phi[cosets[i]]
                ok, witness = isomorphic_under(bad, exact, image)
                assert not ok and witness is not None and len(witness) >= 2
                rejected += 1
        assert rejected >= 2


def _zero_violations(rep) -> bool:
    n = rep.axiom4.N
    return not rep.violations1 and not rep.violations3 and n is not None and not rep.axiom4.violations_from(n)


def test_9_axioms(constants, f2, f2_balls):
    with criterion(9, "pattern conditions on F2/<a> and Z2 lines; duplicate member flagged"):
        a = as_predicate(core(f2, "a"))
        k_grid, n_grid = [1, 2], [1, 2, 3]
        r6 = check_axioms(coset_pattern(f2_balls(6), a), k_grid, n_grid)
        r8 = check_axioms(coset_pattern(f2_balls(8), a), k_grid, n_grid)
        assert _zero_violations(r6) and _zero_violations(r8)
        assert r6.axiom4.N == 2
        assert r6.tables() == r8.tables()
        frozen = constants["axioms_f2_a"]
        assert {str(k): v for k, v in r6.M_of_k.items()} == frozen["M_of_k"]
        assert {str(k): v for k, v in r6.axiom4.K_of_k.items()} == frozen["K4_of_k"]

        g10 = check_axioms(grid_lines_pattern(10), k_grid, n_grid)
        g15 = check_axioms(grid_lines_pattern(15), k_grid, n_grid)
        assert _zero_violations(g10) and _zero_violations(g15)
        assert g10.axiom4.N == 2
        assert g10.tables() == g15.tables()
        frozen = constants["axioms_z2_lines"]
        assert {str(k): v for k, v in g10.M_of_k.items()} == frozen["M_of_k"]

        lines = grid_lines_pattern(10)
        dup = PatternSpace(lines.graph, lines.family + [lines.family[0]])
        rd = check_axioms(dup, k_grid, n_grid)
        assert rd.axiom4.violations_from(2)
        assert any(set(c) == {0, len(lines.family)} for _, c, _ in rd.axiom4.violations_from(2))


def test_10_crossratio(constants, f2, f2_balls):
    with criterion(10, "cross-ratio against coset distance over 50 translate pairs"):
        a = as_predicate(core(f2, "a"))
        model = boundary_model(2, 8)
        ball = f2_balls(6)
        system = shadow_annuli(ball, model, [1, 2, 3])
        smaller = shadow_annuli(ball, model, [1, 2])
        cosets = enumerate_cosets(a, f2_balls(3))
        limits = [limit_set_approx(a, c, 8) for c in cosets]
        pat = coset_pattern(ball, a)
        D = set_distance_table(pat, [pat.labels.index(c) for c in cosets])
        pos = {s: i for i, s in enumerate(limits)}
        pairs = random.Random(0).sample(list(combinations(range(len(cosets)), 2)), 50)
        env = compare_crossratio_distance(
            system, [(limits[i], limits[j]) for i, j in pairs], lambda K, L: int(D[pos[K], pos[L]])
        )
        assert not env.degenerate
        assert env.a == from_rational(constants["crossratio_envelope"]["a"])
        assert env.b == from_rational(constants["crossratio_envelope"]["b"])
        for i, j in pairs:
            K, L = limits[i], limits[j]
            assert cross_ratio(K, L, smaller) <= cross_ratio(K, L, system)
            assert verify_chain(K, L, cross_ratio_chain(K, L, system), system)


def test_11_integration():
    with criterion(11, "limit sets, pairing, q and complexes on the b-translation of (F2, <a>)"):
        rep = dynamics_report()
        assert rep.quasiconvex
        assert rep.pairing_is_proper
        assert rep.complexes_isomorphic
        assert rep.ok
