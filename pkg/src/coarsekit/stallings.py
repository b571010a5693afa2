"""Finitely generated subgroups of free groups via Stallings core graphs.

Also hosts the commutator subgroup (the kernel of abelianisation), which is
not finitely generated and is handled through exponent sums instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .cayley import CayleyBall, Presentation, generate_ball
from .folding import FoldingGraph
from .words import (
    IDENTITY,
    Word,
    exponent_sums,
    free_reduce,
    inverse,
    letter_key,
    multiply,
    shortlex_key,
)


@dataclass(frozen=True)
class CoreGraph:
    """Folded core graph with basepoint 0.

    ``edges`` are ``(u, g, v)`` meaning ``u --g--> v`` for the positive
    generator ``g`` (1-based); reading ``-g`` traverses the edge backwards.
    Vertices are numbered canonically (breadth first from the basepoint in
    shortlex letter order), so equal subgroups give equal objects.
    """

    rank: int
    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        table = np.full((self.n_vertices, 2 * self.rank), -1, dtype=np.int64)
        for u, g, v in self.edges:
            for src, lab, dst in ((u, g, v), (v, -g, u)):
                col = letter_key(lab)
                if table[src, col] not in (-1, dst):
                    raise ValueError("graph is not folded")
                table[src, col] = dst
        object.__setattr__(self, "_table", table)

    @property
    def is_trivial(self) -> bool:
        return not self.edges

    def step(self, v: int, letter: int) -> int:
        return int(self._table[v, letter_key(letter)])

    def read(self, word: Sequence[int], start: int = 0) -> tuple[int, int]:
        """Follow ``word`` from ``start``; returns (last state, letters read)."""
        v = start
        for i, x in enumerate(word):
            t = self.step(v, x)
            if t < 0:
                return v, i
            v = t
        return v, len(word)

    def accepts(self, word: Sequence[int]) -> bool:
        v, k = self.read(free_reduce(word))
        return k == len(word) and v == 0

    def generators(self) -> list[Word]:
        """A free basis read off a breadth-first spanning tree."""
        path: dict[int, Word] = {0: IDENTITY}
        queue = [0]
        tree = set()
        while queue:
            u = queue.pop(0)
            for col in range(2 * self.rank):
                v = int(self._table[u, col])
                if v >= 0 and v not in path:
                    lab = col // 2 + 1
                    lab = -lab if col % 2 else lab
                    path[v] = path[u] + (lab,)
                    tree.add((u, lab, v) if lab > 0 else (v, -lab, u))
                    queue.append(v)
        out = []
        for u, g, v in self.edges:
            if (u, g, v) not in tree:
                out.append(multiply(path[u], (g,), inverse(path[v])))
        return sorted(out, key=shortlex_key)

    def to_json(self, names: Sequence[str] | None = None) -> dict:
        names = names or [chr(ord("a") + i) for i in range(self.rank)]
        return {
            "rank": self.rank,
            "generators": list(names),
            "vertices": list(range(self.n_vertices)),
            "edges": [[u, names[g - 1], v] for u, g, v in self.edges],
            "basepoint": 0,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CoreGraph":
        names = data["generators"]
        lookup = {n: i + 1 for i, n in enumerate(names)}
        if data.get("basepoint", 0) != 0:
            raise ValueError("basepoint must be vertex 0")
        g = FoldingGraph()
        for _ in data["vertices"]:
            g.add_vertex()
        for u, lab, v in data["edges"]:
            g.add_edge(u, lookup[lab], v)
        return _canonical(g, len(names))


def _canonical(g: FoldingGraph, rank: int) -> CoreGraph:
    # trim hanging trees (never the basepoint), then renumber breadth first
    adj: dict[int, dict[int, int]] = {c: g.edges_of(c) for c in g.classes()}
    base = g.find(0)
    reach = {base}
    queue = [base]
    while queue:
        u = queue.pop()
        for t in adj[u].values():
            if t not in reach:
                reach.add(t)
                queue.append(t)
    adj = {c: {x: t for x, t in e.items() if t in reach} for c, e in adj.items() if c in reach}
    changed = True
    while changed:
        changed = False
        for c in list(adj):
            if c != base and len(adj[c]) <= 1:
                for x, t in adj[c].items():
                    if t != c:
                        adj[t].pop(-x, None)
                del adj[c]
                changed = True
    order = {base: 0}
    queue = [base]
    alphabet = sorted([x for g_ in range(1, rank + 1) for x in (g_, -g_)], key=letter_key)
    while queue:
        u = queue.pop(0)
        for x in alphabet:
            t = adj[u].get(x)
            if t is not None and t not in order:
                order[t] = len(order)
                queue.append(t)
    edges = set()
    for u, e in adj.items():
        for x, t in e.items():
            if x > 0:
                edges.add((order[u], x, order[t]))
    return CoreGraph(rank, len(order), tuple(sorted(edges)))


def fold(generator_words: Iterable[Sequence[int]], rank: int = 2) -> CoreGraph:
    """Core graph of the subgroup generated by the given words."""
    g = FoldingGraph()
    base = g.add_vertex()
    for w in generator_words:
        w = free_reduce(w)
        if any(abs(x) > rank for x in w):
            raise ValueError(f"word {w} uses a generator beyond rank {rank}")
        if not w:
            continue
        prev = base
        for i, x in enumerate(w):
            nxt = base if i == len(w) - 1 else g.add_vertex()
            g.add_edge(prev, x, nxt)
            prev = nxt
    return _canonical(g, rank)


def trivial_subgroup(rank: int = 2) -> CoreGraph:
    return CoreGraph(rank, 1, ())


def intersect(h1: CoreGraph, h2: CoreGraph) -> CoreGraph:
    """Core graph of H1 ∩ H2 from the product automaton at (base, base)."""
    if h1.rank != h2.rank:
        raise ValueError("rank mismatch")
    g = FoldingGraph()
    ids = {(0, 0): g.add_vertex()}
    queue = [(0, 0)]
    while queue:
        u1, u2 = queue.pop()
        for x in range(1, h1.rank + 1):
            for lab in (x, -x):
                v1, v2 = h1.step(u1, lab), h2.step(u2, lab)
                if v1 < 0 or v2 < 0:
                    continue
                if (v1, v2) not in ids:
                    ids[(v1, v2)] = g.add_vertex()
                    queue.append((v1, v2))
                if lab > 0:
                    g.add_edge(ids[(u1, u2)], lab, ids[(v1, v2)])
    return _canonical(g, h1.rank)


def conjugate(h: CoreGraph, g: Sequence[int]) -> CoreGraph:
    """Core graph of g H g^-1."""
    g = free_reduce(g)
    return fold([multiply(g, w, inverse(g)) for w in h.generators()], h.rank)


def intersect_conjugate(h: CoreGraph, g: Sequence[int]) -> CoreGraph:
    """Core graph of g H g^-1 ∩ H."""
    return intersect(conjugate(h, g), h)


# --------------------------------------------------------------- predicates


@dataclass(frozen=True)
class SubgroupPredicate:
    """Membership oracle: a core graph, or the abelianisation kernel."""

    kind: str
    rank: int
    core: CoreGraph | None = field(default=None)

    def __post_init__(self):
        if self.kind not in ("coreGraph", "abelianizationKernel"):
            raise ValueError(f"unknown predicate kind {self.kind!r}")
        if self.kind == "coreGraph" and self.core is None:
            raise ValueError("coreGraph predicate needs a core graph")

    @classmethod
    def of(cls, core: CoreGraph) -> "SubgroupPredicate":
        return cls("coreGraph", core.rank, core)

    @classmethod
    def abelianization_kernel(cls, rank: int = 2) -> "SubgroupPredicate":
        return cls("abelianizationKernel", rank)

    def contains(self, w: Sequence[int]) -> bool:
        w = free_reduce(w)
        if self.kind == "abelianizationKernel":
            return not any(exponent_sums(w, self.rank))
        return self.core.accepts(w)

    def coset_key(self, g: Sequence[int]):
        """Equal keys iff ``g1 H == g2 H``."""
        g = free_reduce(g)
        if self.kind == "abelianizationKernel":
            return exponent_sums(g, self.rank)
        # the Schreier vertex H g^-1: core state plus the part hanging off it
        ginv = inverse(g)
        v, k = self.core.read(ginv)
        return v, ginv[k:]


def as_predicate(s) -> SubgroupPredicate:
    return s if isinstance(s, SubgroupPredicate) else SubgroupPredicate.of(s)


def contains(s, w: Sequence[int]) -> bool:
    return as_predicate(s).contains(w)


@dataclass(frozen=True, order=True)
class CosetId:
    """Left coset gH named by its shortlex-least element in the ball."""

    sort_key: tuple = field(repr=False)
    representative: Word = field(compare=False)

    @classmethod
    def of(cls, word: Sequence[int]) -> "CosetId":
        w = tuple(word)
        return cls(shortlex_key(w), w)


def canonical_coset(s, g: Sequence[int]) -> CosetId:
    """The coset gH named by its shortlex-least element (over the whole group)."""
    pred = as_predicate(s)
    g = free_reduce(g)
    if pred.kind == "abelianizationKernel":
        word: list[int] = []
        for i, e in enumerate(exponent_sums(g, pred.rank)):
            word.extend([i + 1 if e > 0 else -(i + 1)] * abs(e))
        return CosetId.of(word)
    core = pred.core
    ginv = inverse(g)
    v, k = core.read(ginv)
    # shortest elements are rem^-1 q^-1 with q a core geodesic 0 -> v;
    # walk from v back to 0 greedily in letter order
    depth = _core_depths(core)
    tail: list[int] = []
    while v != 0:
        for col in range(2 * core.rank):
            t = int(core._table[v, col])
            if t >= 0 and depth[t] == depth[v] - 1:
                lab = col // 2 + 1
                tail.append(-lab if col % 2 else lab)
                v = t
                break
    return CosetId.of(inverse(ginv[k:]) + tuple(tail))


def _core_depths(core: CoreGraph) -> list[int]:
    depth = [-1] * core.n_vertices
    depth[0] = 0
    queue = [0]
    for u in queue:
        for t in core._table[u]:
            if t >= 0 and depth[t] < 0:
                depth[t] = depth[u] + 1
                queue.append(int(t))
    return depth


def coset_partition(s, ball: CayleyBall) -> tuple[list[CosetId], np.ndarray]:
    """Cosets meeting the ball and, per vertex, the index of its coset."""
    if ball.presentation.kind != "free":
        raise ValueError("coset enumeration needs a free-group ball")
    pred = as_predicate(s)
    first: dict = {}
    labels = np.empty(ball.n, dtype=np.int64)
    for i, w in enumerate(ball.words):
        key = pred.coset_key(w)
        if key not in first:
            first[key] = len(first)
        labels[i] = first[key]
    reps = [None] * len(first)
    for i, w in enumerate(ball.words):
        if reps[labels[i]] is None:
            reps[labels[i]] = w
    # ball order is shortlex, so representatives already appear sorted
    return [CosetId.of(w) for w in reps], labels


def enumerate_cosets(s, ball: CayleyBall) -> list[CosetId]:
    return coset_partition(s, ball)[0]


def coset_members(s, ball: CayleyBall, c: CosetId) -> np.ndarray:
    pred = as_predicate(s)
    key = pred.coset_key(c.representative)
    return np.array([i for i, w in enumerate(ball.words) if pred.coset_key(w) == key], dtype=np.int64)


# ------------------------------------------------------ height, width, malnormal


@dataclass(frozen=True)
class ConjugateScan:
    value: int
    certificate: tuple[CosetId, ...]
    radius: int
    stable: bool


@dataclass(frozen=True)
class Malnormality:
    answer: bool
    witness: Word | None
    radius: int
    stable: bool


def _conjugators(h: CoreGraph, radius: int) -> list[CosetId]:
    ball = generate_ball(Presentation.free(h.rank), radius)
    return [c for c in enumerate_cosets(h, ball) if c.representative]


def _infinite_partners(h: CoreGraph, radius: int, dedupe: bool) -> list[tuple[CosetId, CoreGraph, CoreGraph]]:
    """Cosets gH (g ∉ H, |g| <= radius) with gHg^-1 ∩ H infinite."""
    out = []
    seen = {h}
    for c in _conjugators(h, radius):
        conj = conjugate(h, c.representative)
        if dedupe and conj in seen:
            continue
        seen.add(conj)
        meet = intersect(conj, h)
        if not meet.is_trivial:
            out.append((c, conj, meet))
    return out


def _height_at(h: CoreGraph, radius: int, dedupe: bool) -> tuple[int, tuple[CosetId, ...]]:
    if h.is_trivial:
        return 0, ()
    partners = _infinite_partners(h, radius, dedupe)
    best: list = [()]

    def grow(chosen: tuple, meet: CoreGraph, start: int):
        if len(chosen) > len(best[0]):
            best[0] = chosen
        for k in range(start, len(partners)):
            c, conj, _ = partners[k]
            m = intersect(meet, conj)
            if not m.is_trivial:
                grow(chosen + (c,), m, k + 1)

    grow((), h, 0)
    return 1 + len(best[0]), (CosetId.of(IDENTITY),) + best[0]


def _width_at(h: CoreGraph, radius: int, dedupe: bool) -> tuple[int, tuple[CosetId, ...]]:
    if h.is_trivial:
        return 0, ()
    partners = _infinite_partners(h, radius, dedupe)
    graph = nx.Graph()
    graph.add_nodes_from(range(len(partners)))
    for i in range(len(partners)):
        for j in range(i + 1, len(partners)):
            if not intersect(partners[i][1], partners[j][1]).is_trivial:
                graph.add_edge(i, j)
    best: tuple = ()
    for clique in nx.find_cliques(graph):
        clique = tuple(sorted(clique))
        if len(clique) > len(best) or (len(clique) == len(best) and clique < best):
            best = clique
    if not partners:
        best = ()
    return 1 + len(best), (CosetId.of(IDENTITY),) + tuple(partners[i][0] for i in best)


def _scan(fn, h: CoreGraph, radius: int, dedupe: bool) -> ConjugateScan:
    value, cert = fn(h, radius, dedupe)
    earlier = [fn(h, r, dedupe)[0] for r in (radius - 2, radius - 1) if r >= 0]
    stable = len(earlier) == 2 and all(v == value for v in earlier)
    return ConjugateScan(value, cert, radius, stable)


def height(h: CoreGraph, conjugator_radius: int, dedupe: bool = False) -> ConjugateScan:
    """Largest family of essentially distinct conjugates with infinite intersection.

    Families contain H itself plus conjugators of length at most
    ``conjugator_radius``; this is a lower bound for the true height.
    ``stable`` is set when the radius-2 and radius-1 scans agree with it.
    """
    return _scan(_height_at, h, conjugator_radius, dedupe)


def width(h: CoreGraph, conjugator_radius: int, dedupe: bool = False) -> ConjugateScan:
    """As :func:`height`, with only pairwise intersections required infinite."""
    return _scan(_width_at, h, conjugator_radius, dedupe)


def is_malnormal(h: CoreGraph, conjugator_radius: int) -> Malnormality:
    def witness_at(r: int):
        for c in _conjugators(h, r):
            if not intersect_conjugate(h, c.representative).is_trivial:
                return c.representative
        return None

    w = witness_at(conjugator_radius)
    if w is not None:
        return Malnormality(False, w, conjugator_radius, True)
    stable = conjugator_radius >= 2 and all(witness_at(r) is None for r in (conjugator_radius - 2, conjugator_radius - 1))
    return Malnormality(True, None, conjugator_radius, stable)
