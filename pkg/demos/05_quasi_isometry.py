"""Recovering a map of the group from a pairing of coset joins.

Left translation by b sends each coset cH to bcH.  Feeding only that
pairing into the barycentre construction gives back, vertex by vertex,
the translation itself.
"""
from __future__ import annotations

import numpy as np

from coarsekit.cayley import Presentation, generate_ball
from coarsekit.patterns import coset_pattern, translate_pattern
from coarsekit.rigidity import Pairing, check_axioms, construct_q, map_displacement, verify_qi
from coarsekit.stallings import SubgroupPredicate, fold
from coarsekit.words import multiply

f2 = Presentation.free(2)
a = SubgroupPredicate.of(fold([f2.parse("a")]))
ball, big = generate_ball(f2, 5), generate_ball(f2, 6)
b = f2.parse("b")

p1 = coset_pattern(ball, a)
p2 = translate_pattern(p1, b, big)
phi = Pairing.identity(len(p1))
q = construct_q(p1, p2, phi, K=1, w2=1)
shift = {g: big.index[multiply(b, ball.words[g])] for g in q}
print(f"q defined on {len(q)} vertices; sup d(q(g), b g) = {map_displacement(big, q, shift)}")
rep = verify_qi(q, p1, p2, phi, net=np.unique(list(shift.values())))
print(f"quasi-isometry constants: lambda = {rep.lam}, epsilon = {rep.epsilon}")

axioms = check_axioms(p1, [1, 2], [1, 2, 3])
print("pattern tables:", axioms.tables())
