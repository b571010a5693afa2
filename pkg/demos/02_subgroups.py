"""Folding subgroups of F2, and counting how their conjugates overlap."""
from __future__ import annotations

from coarsekit.cayley import Presentation
from coarsekit.stallings import fold, height, intersect_conjugate, is_malnormal, width

f2 = Presentation.free(2)
for gens in (["a"], ["a^2"], ["a b"], ["a", "b^2"], ["a", "b a b^-1"]):
    h = fold([f2.parse(g) for g in gens])
    m = is_malnormal(h, 4)
    witness = f2.format(m.witness) if m.witness is not None else "-"
    print(f"<{', '.join(gens)}>: core has {h.n_vertices} vertices;"
          f" height {height(h, 4).value}, width {width(h, 4).value}, malnormal {m.answer} (witness {witness})")

h = fold([f2.parse("a^2")])
print("a<a^2>a^-1 meets <a^2> in generators",
      [f2.format(w) for w in intersect_conjugate(h, f2.parse("a")).generators()])
