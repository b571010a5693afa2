"""Limit sets on the boundary of F2 and annular cross-ratios between them."""
from __future__ import annotations

from fractions import Fraction

from coarsekit.boundary import (
    boundary_model,
    cross_ratio_chain,
    discrete_in_Cc0,
    four_point_zeros,
    limit_set_approx,
    shadow_annuli,
    verify_chain,
)
from coarsekit.cayley import Presentation, generate_ball
from coarsekit.stallings import SubgroupPredicate, enumerate_cosets, fold

f2 = Presentation.free(2)
a = SubgroupPredicate.of(fold([f2.parse("a")]))
depth = 8
model = boundary_model(2, depth)

cosets = enumerate_cosets(a, generate_ball(f2, 2))
limits = [limit_set_approx(a, c, depth) for c in cosets]
print("limit set of b<a>:", [f2.format(w) for w in limits[1].points])
print("translates discrete:", discrete_in_Cc0(limits, Fraction(1, 2 ** (depth - 1))))

system = shadow_annuli(generate_ball(f2, 6), model, [1, 2, 3])
print(f"shadow system: {len(system)} annuli")
for word in ("b", "b^2", "b^3"):
    L = limit_set_approx(a, f2.parse(word), depth)
    chain = cross_ratio_chain(limits[0], L, system)
    print(f"(<a> | {word}<a>) = {chain.length}, certificate verifies: {verify_chain(limits[0], L, chain, system)}")

print(four_point_zeros(system, sample=100))
