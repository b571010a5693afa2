"""End-to-end run: limit sets, discreteness, a translation pairing, q, complexes."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .boundary import boundary_model, cross_ratio, discrete_in_Cc0, limit_set_approx, shadow_annuli
from .cayley import Presentation, generate_ball
from .ccomplex import build_exact, isomorphic_under
from .patterns import coset_pattern, discreteness_profile, translate_pattern
from .rigidity import (
    Pairing,
    construct_q,
    map_displacement,
    verify_qi,
    verify_uniform_properness,
)
from .stallings import as_predicate, canonical_coset, enumerate_cosets, fold
from .words import inverse, multiply


@dataclass
class DynamicsReport:
    subgroup: list[str]
    translation: str
    quasiconvex: bool
    pairing_is_proper: bool
    complexes_isomorphic: bool
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.quasiconvex and self.pairing_is_proper and self.complexes_isomorphic

    def to_json(self) -> dict:
        return {
            "subgroup": self.subgroup,
            "translation": self.translation,
            "conclusions": {
                "quasiconvex": self.quasiconvex,
                "pairingUniformlyProper": self.pairing_is_proper,
                "complexesIsomorphic": self.complexes_isomorphic,
            },
            "ok": self.ok,
            "details": self.details,
        }


def _cr_envelope(before: list[int], after: list[int]) -> dict[int, int]:
    env, best = {}, 0
    for n in range(max(before, default=-1) + 1):
        hit = [y for x, y in zip(before, after) if x <= n]
        if hit:
            best = max(best, max(hit))
        env[n] = best
    return env


def dynamics_report(
    generators: Sequence[str] = ("a",),
    translation: str = "b",
    radius: int = 6,
    window: int = 2,
    depth: int = 8,
    shadows: Sequence[int] = (1, 2, 3),
    K: int = 1,
    w2: int = 1,
    profile_radii: Sequence[int] = (4, 5, 6),
    profile_N: int = 2,
) -> DynamicsReport:
    """Run the three checks on the self-pairing of (F2, H) given by left translation.

    1. The H-translates in the window have limit sets that are pairwise
       separated in the Hausdorff metric, and the discreteness profile of H
       stays constant.
    2. q built from the translated pattern moves each vertex g within C of
       t·g, is a quasi-isometry, pairs members as the translation does with
       bounded distortion, and distorts cross-ratios of limit sets boundedly.
    3. The induced coset bijection is an isomorphism of C-complexes.
    """
    pres = Presentation.free(2)

    core = fold([pres.parse(w) for w in generators], 2)
    pred = as_predicate(core)
    t = pres.parse(translation)
    details: dict = {}

    # 1. limit sets and discreteness
    wball = generate_ball(pres, window)
    cosets = enumerate_cosets(pred, wball)
    limits = [limit_set_approx(pred, c, depth) for c in cosets]
    separation = Fraction(1, 2 ** (depth - 1))
    disc = discrete_in_Cc0(limits, separation)
    profile = discreteness_profile(pred, profile_N, profile_radii)
    constant = len(set(profile)) == 1
    details["discreteness"] = {
        "cosets": len(cosets),
        "nearestHausdorff": disc.distance,
        "separation": separation,
        "collision": disc.collision,
        "profile": profile,
    }
    quasiconvex = disc.answer and constant

    # 2. pairing, q, and boundary distortion
    ball = generate_ball(pres, radius)
    big = generate_ball(pres, radius + len(t))
    p1 = coset_pattern(ball, pred)
    p2 = translate_pattern(p1, t, big)
    phi = Pairing.identity(len(p1))
    q = construct_q(p1, p2, phi, K, w2)
    shift = {g: big.index[multiply(t, ball.words[g])] for g in q}
    C = map_displacement(big, q, shift)

    back_ball = generate_ball(pres, radius + 2 * len(t))
    p_back = translate_pattern(p2, inverse(t), back_ball)
    q_back = construct_q(p2, p_back, phi, K, w2, domain=set(q.values()))
    round_trip = {g: q_back[h] for g, h in q.items()}
    home = {g: back_ball.index[ball.words[g]] for g in round_trip}
    C_round = map_displacement(back_ball, round_trip, home)

    net = np.unique([shift[g] for g in q])
    qi = verify_qi(q, p1, p2, phi, net=net)

    window_members = [i for i, lab in enumerate(p1.labels) if lab in set(cosets)]
    pairs = list(combinations(window_members, 2))
    proper = verify_uniform_properness(p1, p2, phi, pairs)

    model = boundary_model(2, depth)
    sys = shadow_annuli(generate_ball(pres, radius), model, shadows)
    moved = [canonical_coset(pred, multiply(t, c.representative)) for c in cosets]
    moved_limits = [limit_set_approx(pred, c, depth) for c in moved]
    cr_before, cr_after = [], []
    for i, j in combinations(range(len(cosets)), 2):
        cr_before.append(cross_ratio(limits[i], limits[j], sys))
        cr_after.append(cross_ratio(moved_limits[i], moved_limits[j], sys))
    fwd, bwd = _cr_envelope(cr_before, cr_after), _cr_envelope(cr_after, cr_before)
    cr_blowup = any(y > 2 * x + 2 or x > 2 * y + 2 for x, y in zip(cr_before, cr_after))

    finite_qi = qi.lam is not None and qi.epsilon is not None
    pairing_bound_ok = all(h <= n + C for n, h in qi.pairing_bound.items())
    pairing_is_proper = finite_qi and pairing_bound_ok and not proper.blowup and not cr_blowup
    details["pairing"] = {
        "domain": len(q),
        "displacement": C,
        "roundTrip": C_round,
        "lambda": qi.lam,
        "epsilon": qi.epsilon,
        "pairingBound": qi.pairing_bound,
        "surjectivityGap": qi.surjectivity_gap,
        "properForward": proper.forward,
        "properBackward": proper.backward,
        "crossRatioForward": fwd,
        "crossRatioBackward": bwd,
        "crossRatioPairs": len(cr_before),
    }

    # 3. complexes
    c1 = build_exact(core, window, cosets)
    c2 = build_exact(core, window, moved)
    iso, witness = isomorphic_under(dict(zip(cosets, moved)), c1, c2)
    details["complex"] = {
        "vertices": len(c1.vertices),
        "edges": len(c1.edges()),
        "witness": None if witness is None else [pres.format(c.representative) for c in witness],
    }
    return DynamicsReport(list(generators), translation, quasiconvex, pairing_is_proper, iso, details)
