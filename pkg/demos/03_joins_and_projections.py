"""Coset joins, projections between them, and the discreteness profile.

A quasiconvex subgroup like <a> has only finitely many translates whose
join passes near the identity; the abelianisation kernel is not
quasiconvex and the count keeps growing with the window.
"""
from __future__ import annotations

import numpy as np

from coarsekit.cayley import Presentation, generate_ball
from coarsekit.patterns import coset_joins, discreteness_profile, projection_diameters
from coarsekit.stallings import SubgroupPredicate, fold

f2 = Presentation.free(2)
a = SubgroupPredicate.of(fold([f2.parse("a")]))
kernel = SubgroupPredicate.abelianization_kernel(2)

print("profile <a>, N=2, R=4..7:", discreteness_profile(a, 2, range(4, 8)))
print("profile kernel, N=2, R=4..7:", discreteness_profile(kernel, 2, range(4, 8)))

ball = generate_ball(f2, 6)
joins = [j for j in coset_joins(ball, a) if not j.degenerate]
P = projection_diameters(ball, [j.vertices for j in joins])
off = P[~np.eye(len(joins), dtype=bool)]
print(f"{len(joins)} joins at R=6; largest projection diameter between distinct joins: {off.max()}")
