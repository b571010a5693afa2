"""C-complexes built two ways: from subgroup intersections, and from coarse overlaps."""
from __future__ import annotations

from coarsekit.cayley import Presentation, generate_ball
from coarsekit.ccomplex import build_coarse, build_exact, stats
from coarsekit.patterns import coset_pattern
from coarsekit.stallings import SubgroupPredicate, enumerate_cosets, fold, width

f2 = Presentation.free(2)
big = generate_ball(f2, 7)
for gens in (["a"], ["a^2"], ["a b"], ["a", "b^2"]):
    h = fold([f2.parse(g) for g in gens])
    pred = SubgroupPredicate.of(h)
    cosets = enumerate_cosets(pred, generate_ball(f2, 2))
    exact = build_exact(h, 2, cosets)
    coarse = build_coarse(coset_pattern(big, pred).subpattern(cosets), diameter_threshold=6)
    print(f"<{', '.join(gens)}>: {len(cosets)} cosets, {len(exact.edges())} edges,"
          f" stats {tuple(stats(exact))}, width {width(h, 4).value},"
          f" coarse agrees: {coarse.simplices == exact.simplices}")

print(build_exact(fold([f2.parse("a^2")]), 1).to_dot())
