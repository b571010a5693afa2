"""Union-find on edge-labelled graphs with Stallings folding.

Shared by the subgroup core graphs (free groups) and by the relator-closure
construction of Cayley balls for non-free presentations.  Every edge is
stored in both directions: ``u --x--> v`` implies ``v --(-x)--> u``.
"""
from __future__ import annotations


class FoldingGraph:
    def __init__(self) -> None:
        self.parent: list[int] = []
        self.out: list[dict[int, int]] = []

    def add_vertex(self) -> int:
        v = len(self.parent)
        self.parent.append(v)
        self.out.append({})
        return v

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def target(self, v: int, letter: int) -> int | None:
        t = self.out[self.find(v)].get(letter)
        return None if t is None else self.find(t)

    def add_edge(self, u: int, letter: int, v: int) -> None:
        pending = [(u, letter, v)]
        while pending:
            a, x, b = pending.pop()
            a, b = self.find(a), self.find(b)
            for src, lab, dst in ((a, x, b), (b, -x, a)):
                old = self.out[src].get(lab)
                if old is None:
                    self.out[src][lab] = dst
                elif self.find(old) != self.find(dst):
                    pending.extend(self._merge(old, dst))

    def merge(self, u: int, v: int) -> None:
        pending = self._merge(u, v)
        for a, x, b in pending:
            self.add_edge(a, x, b)

    def _merge(self, u: int, v: int) -> list[tuple[int, int, int]]:
        u, v = self.find(u), self.find(v)
        if u == v:
            return []
        if v < u:
            u, v = v, u
        # the smaller id survives so basepoint 0 stays the representative
        self.parent[v] = u
        moved = self.out[v]
        self.out[v] = {}
        return [(u, x, t) for x, t in moved.items()]

    def classes(self) -> list[int]:
        return sorted({self.find(v) for v in range(len(self.parent))})

    def edges_of(self, v: int) -> dict[int, int]:
        r = self.find(v)
        return {x: self.find(t) for x, t in self.out[r].items()}
