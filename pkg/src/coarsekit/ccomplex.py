"""Simplicial complexes of cosets: exact and coarse constructions."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

import networkx as nx
import numpy as np

from .cayley import Presentation, generate_ball
from .patterns import PatternSpace
from .stallings import CoreGraph, CosetId, conjugate, enumerate_cosets, intersect


@dataclass
class CComplex:
    """A downward-closed family of vertex subsets, stored as sorted tuples of indices."""

    vertices: list[Hashable]
    simplices: set[tuple[int, ...]]
    provenance: str

    def __post_init__(self):
        if self.provenance not in ("exact", "coarse"):
            raise ValueError("provenance is 'exact' or 'coarse'")
        closed = set()
        for s in self.simplices:
            s = tuple(sorted(set(s)))
            if not s:
                continue
            if s[0] < 0 or s[-1] >= len(self.vertices):
                raise ValueError(f"simplex {s} uses an unknown vertex")
            closed.add(s)
        closed.update((i,) for i in range(len(self.vertices)))
        for s in list(closed):
            for k in range(1, len(s)):
                for sub in combinations(s, k):
                    closed.add(sub)
        self.simplices = closed

    def edges(self) -> list[tuple[int, int]]:
        return sorted(s for s in self.simplices if len(s) == 2)

    def maximal_simplices(self) -> list[tuple[int, ...]]:
        out = []
        by_size = sorted(self.simplices, key=lambda s: (-len(s), s))
        for s in by_size:
            if not any(set(s) < set(t) for t in out):
                out.append(s)
        return sorted(out, key=lambda s: (len(s), s))

    def skeleton(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(len(self.vertices)))
        g.add_edges_from(self.edges())
        return g

    def restrict(self, keep: Iterable[Hashable]) -> "CComplex":
        """Induced subcomplex on the given vertices (in the given order)."""
        keep = list(keep)
        pos = {v: i for i, v in enumerate(self.vertices)}
        idx = [pos[v] for v in keep]
        new = {old: new for new, old in enumerate(idx)}
        simp = {tuple(sorted(new[i] for i in s)) for s in self.simplices if all(i in new for i in s)}
        return CComplex(keep, simp, self.provenance)

    def to_json(self, fmt=None) -> dict:
        fmt = fmt or _vertex_name
        return {
            "provenance": self.provenance,
            "vertices": [fmt(v) for v in self.vertices],
            "maximal_simplices": [list(s) for s in self.maximal_simplices()],
        }

    def to_dot(self, fmt=None) -> str:
        fmt = fmt or _vertex_name
        lines = ["graph ccomplex {"]
        for i, v in enumerate(self.vertices):
            lines.append(f'  {i} [label="{fmt(v)}"];')
        for i, j in self.edges():
            lines.append(f"  {i} -- {j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _vertex_name(v) -> str:
    if isinstance(v, CosetId):
        names = "abcdefghijklmnopqrstuvwxyz"
        text = "".join(names[x - 1] if x > 0 else names[-x - 1].upper() for x in v.representative)
        return text or "1"
    return str(v)


# ----------------------------------------------------------------- builds


def build_exact(h: CoreGraph, conjugator_radius: int, cosets: Sequence[CosetId] | None = None) -> CComplex:
    """Cosets gH with |g| <= radius; a tuple spans a simplex iff the
    conjugates g_i H g_i^-1 have infinite (nontrivial) common intersection.
    """
    if cosets is None:
        ball = generate_ball(Presentation.free(h.rank), conjugator_radius)
        cosets = enumerate_cosets(h, ball)
    cosets = list(cosets)
    conj = [conjugate(h, c.representative) for c in cosets]
    n = len(cosets)
    # pairwise test via g_i^-1 g_j would be cheaper, but the conjugates are
    # reused by the higher intersections anyway
    g = nx.Graph()
    g.add_nodes_from(range(n))
    pair: dict[tuple[int, int], CoreGraph] = {}
    for i in range(n):
        for j in range(i + 1, n):
            meet = intersect(conj[i], conj[j])
            if not meet.is_trivial:
                g.add_edge(i, j)
                pair[(i, j)] = meet
    simplices = {(i,) for i in range(n)} | set(pair)
    meets: dict[tuple[int, ...], CoreGraph] = dict(pair)
    for clique in nx.enumerate_all_cliques(g):
        if len(clique) < 3:
            continue
        s = tuple(sorted(clique))
        base = meets.get(s[:-1])
        if base is None:
            continue
        meet = intersect(base, conj[s[-1]])
        if not meet.is_trivial:
            meets[s] = meet
            simplices.add(s)
    return CComplex(cosets, simplices, "exact")


def coarse_overlaps(p: PatternSpace, k: int = 2) -> tuple[np.ndarray, list[np.ndarray]]:
    """Pairwise overlap diameters of k-neighbourhoods (-1 where disjoint)."""
    masks = [(p.member_distances(i) >= 0) & (p.member_distances(i) <= k) for i in range(len(p))]
    M = np.stack(masks).astype(np.int32) if masks else np.zeros((0, p.graph.n), dtype=np.int32)
    touch = M @ M.T > 0
    n = len(p)
    diam = np.full((n, n), -1, dtype=np.int64)
    for i in range(n):
        for j in range(i, n):
            if touch[i, j]:
                d = _diameter(p, masks[i] & masks[j])
                diam[i, j] = diam[j, i] = d
    return diam, masks


def _diameter(p: PatternSpace, mask: np.ndarray) -> int:
    vs = np.flatnonzero(mask)
    if vs.size <= 1:
        return 0
    return int(p.graph.pair_distances(vs, vs).max())


def build_coarse(p: PatternSpace, diameter_threshold: int, k: int = 2) -> CComplex:
    """A tuple of members spans a simplex iff the intersection of their
    k-neighbourhoods has diameter at least ``diameter_threshold``.
    """
    diam, masks = coarse_overlaps(p, k)
    n = len(p)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if diam[i, j] >= diameter_threshold:
                g.add_edge(i, j)
    simplices = {(i,) for i in range(n)} | {tuple(sorted(e)) for e in g.edges}
    inter: dict[tuple[int, ...], np.ndarray] = {s: masks[s[0]] & masks[s[1]] for s in simplices if len(s) == 2}
    for clique in nx.enumerate_all_cliques(g):
        if len(clique) < 3:
            continue
        s = tuple(sorted(clique))
        base = inter.get(s[:-1])
        if base is None:
            continue
        m = base & masks[s[-1]]
        if _diameter(p, m) >= diameter_threshold:
            inter[s] = m
            simplices.add(s)
    return CComplex(list(p.labels), simplices, "coarse")


# ------------------------------------------------------------------ stats


class ComplexStats(NamedTuple):
    max_cell_dimension: int
    max_clique_size: int


def stats(c: CComplex) -> ComplexStats:
    """Largest simplex cardinality minus one, and the largest clique of the 1-skeleton."""
    if not c.vertices:
        return ComplexStats(0, 0)
    top = max(len(s) for s in c.simplices)
    clique = max(len(q) for q in nx.find_cliques(c.skeleton()))
    return ComplexStats(top - 1, clique)


@dataclass(frozen=True)
class DimensionReport:
    literal: int
    height_plus_one: int
    height: int


def dimension_report(c: CComplex, height_value: int) -> DimensionReport:
    """Both readings of the dimension: from the cells, and height + 1."""
    return DimensionReport(stats(c).max_cell_dimension, height_value + 1, height_value)


def isomorphic_under(
    phi: Mapping[Hashable, Hashable], c1: CComplex, c2: CComplex
) -> tuple[bool, tuple[Hashable, ...] | None]:
    """Does the vertex bijection ``phi`` carry simplices onto simplices?

    The witness is the first simplex (as vertex labels) whose image is
    missing in ``c2`` or whose preimage is missing in ``c1``.
    """
    if set(phi) != set(c1.vertices):
        raise ValueError("pairing must be defined on every vertex of the first complex")
    image = [phi[v] for v in c1.vertices]
    if len(set(image)) != len(image) or set(image) != set(c2.vertices):
        raise ValueError("pairing is not a bijection onto the second complex's vertices")
    pos2 = {v: i for i, v in enumerate(c2.vertices)}
    fwd = [pos2[phi[v]] for v in c1.vertices]
    back = {j: i for i, j in enumerate(fwd)}
    for s in sorted(c1.simplices, key=lambda s: (len(s), s)):
        if tuple(sorted(fwd[i] for i in s)) not in c2.simplices:
            return False, tuple(c1.vertices[i] for i in s)
    for s in sorted(c2.simplices, key=lambda s: (len(s), s)):
        if tuple(sorted(back[j] for j in s)) not in c1.simplices:
            return False, tuple(c1.vertices[back[j]] for j in s)
    return True, None
