"""Balls in Cayley graphs, and how thin their triangles are.

The free group F2 has a tree as Cayley graph, so every four points satisfy
the four-point condition with delta = 0.  The plane lattice Z^2 does not:
its delta grows with the ball.
"""
from __future__ import annotations

from coarsekit.cayley import Presentation, cone_off, estimate_delta, generate_ball, z2_presentation

f2 = Presentation.free(2)
for r in range(1, 6):
    print(f"F2 ball of radius {r}: {generate_ball(f2, r).n} elements")

print("delta(F2, R=4) =", estimate_delta(generate_ball(f2, 4)).delta)
for r in (3, 4, 5):
    print(f"delta(Z2, R={r}) =", estimate_delta(generate_ball(z2_presentation(), r)).delta)

# coning off the a-axis makes its far ends one step apart
ball = generate_ball(f2, 4)
axis = [f2.parse(f"a^{k}") for k in range(-4, 5)]
electric = cone_off(ball, [axis])
print("d(a^4, a^-4) before:", ball.distance(f2.parse("a^4"), f2.parse("a^-4")),
      "after coning:", electric.distance(f2.parse("a^4"), f2.parse("a^-4")))
