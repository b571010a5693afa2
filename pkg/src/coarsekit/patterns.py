"""Joins of coset limit sets, nearest-point projections and set distances."""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .cayley import CayleyBall, Presentation, generate_ball
from .graphs import MetricGraph, grid_graph
from .stallings import CosetId, as_predicate, coset_partition
from .words import multiply


@dataclass
class JoinSet:
    coset: CosetId
    vertices: np.ndarray
    far_threshold: int
    degenerate: bool = False

    def __len__(self) -> int:
        return int(self.vertices.size)


@dataclass
class PatternSpace:
    """A finite metric graph with an indexed family of vertex sets."""

    graph: MetricGraph
    family: list[np.ndarray]
    labels: list[Hashable] = field(default_factory=list)
    degenerate: list[bool] = field(default_factory=list)

    cache_size = 1024

    def __post_init__(self):
        fam = []
        for s in self.family:
            arr = np.unique(np.asarray(s, dtype=np.int64))
            if arr.size == 0:
                raise ValueError("pattern members must be nonempty")
            fam.append(arr)
        self.family = fam
        if not self.labels:
            self.labels = list(range(len(fam)))
        if len(self.labels) != len(fam):
            raise ValueError("one label per family member")
        if not self.degenerate:
            self.degenerate = [False] * len(fam)
        self._dist: OrderedDict[int, np.ndarray] = OrderedDict()

    def __len__(self) -> int:
        return len(self.family)

    def member_distances(self, i: int) -> np.ndarray:
        """Distance from every vertex to member ``i`` (cached)."""
        row = self._dist.get(i)
        if row is None:
            row = self.graph.distances_from_set(self.family[i])
            row.setflags(write=False)
            self._dist[i] = row
            if len(self._dist) > self.cache_size:
                self._dist.popitem(last=False)
        else:
            self._dist.move_to_end(i)
        return row

    def subpattern(self, labels: Iterable[Hashable]) -> "PatternSpace":
        """The members with the given labels, in that order."""
        pos = {lab: i for i, lab in enumerate(self.labels)}
        idx = [pos[lab] for lab in labels]
        return PatternSpace(self.graph, [self.family[i] for i in idx], [self.labels[i] for i in idx], [self.degenerate[i] for i in idx])

    def distance_table(self) -> np.ndarray:
        return np.stack([self.member_distances(i) for i in range(len(self))])

    def to_json(self) -> dict:
        g = self.graph
        if isinstance(g, CayleyBall):
            p = g.presentation
            ref = {
                "kind": "cayley_ball",
                "radius": g.radius,
                "presentation": {"generators": list(p.generators), "relators": [p.format(r) for r in p.relators], "kind": p.kind},
            }
            name = lambda v: p.format(g.words[v])
        else:
            ref = {"kind": "graph", "vertices": [_jsonable(x) for x in g.names], "edges": [list(e) for e in g.edge_list()]}
            name = lambda v: _jsonable(g.names[v])
        return {
            "graph": ref,
            "family": [[name(int(v)) for v in s] for s in self.family],
            "labels": [_label_json(g, lab) for lab in self.labels],
            "degenerate": list(self.degenerate),
        }


def _jsonable(x):
    return list(x) if isinstance(x, tuple) else x


def _label_json(g, lab):
    if isinstance(lab, CosetId) and isinstance(g, CayleyBall):
        return g.presentation.format(lab.representative)
    return _jsonable(lab)


# ----------------------------------------------------------------- joins


def default_far_threshold(radius: int) -> int:
    return (2 * radius) // 3


def _join_vertices(ball: CayleyBall, members: np.ndarray, far: int) -> np.ndarray | None:
    if members.size < 2:
        return None
    D = ball.pair_distances(members, members)
    far_pairs = D >= max(far, 1)
    if not far_pairs.any():
        return None
    if ball.presentation.kind == "free":
        # geodesic [u, v] in a tree = prefixes of u and of v below their meet
        out = set()
        lengths = ball.lengths[members]
        for a, u in enumerate(members):
            partners = np.flatnonzero(far_pairs[a])
            if partners.size == 0:
                continue
            # lcp(u, v) = (|u| + |v| - d(u, v)) / 2
            meet = int(((lengths[a] + lengths[partners] - D[a, partners]) // 2).min())
            w = ball.words[int(u)]
            out.update(ball.index[w[:t]] for t in range(meet, len(w) + 1))
        return np.array(sorted(out), dtype=np.int64)
    rows = np.stack([ball.distances_from(int(u)) for u in members])
    hit = np.zeros(ball.n, dtype=bool)
    for a in range(members.size):
        for b in np.flatnonzero(far_pairs[a]):
            if b > a:
                hit |= rows[a] + rows[b] == D[a, b]
    return np.flatnonzero(hit)


def coset_join(ball: CayleyBall, s, c: CosetId, far_threshold: int | None = None) -> JoinSet:
    """Union of geodesics between elements of ``cH`` at distance >= threshold.

    Far pairs of the coset stand in for pairs of limit points.  Without any
    far pair the coset trace itself is returned and flagged degenerate.
    """
    pred = as_predicate(s)
    far = default_far_threshold(ball.radius) if far_threshold is None else far_threshold
    key = pred.coset_key(c.representative)
    members = np.array([i for i, w in enumerate(ball.words) if pred.coset_key(w) == key], dtype=np.int64)
    if members.size == 0:
        raise ValueError(f"coset {c.representative} does not meet the ball")
    verts = _join_vertices(ball, members, far)
    if verts is None:
        return JoinSet(c, members, far, True)
    return JoinSet(c, verts, far, False)


def coset_joins(ball: CayleyBall, s, far_threshold: int | None = None) -> list[JoinSet]:
    """Joins for every coset meeting the ball, in canonical coset order."""
    far = default_far_threshold(ball.radius) if far_threshold is None else far_threshold
    cosets, labels = coset_partition(s, ball)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(len(cosets) + 1))
    out = []
    for k, c in enumerate(cosets):
        members = order[bounds[k] : bounds[k + 1]]
        verts = _join_vertices(ball, members, far)
        out.append(JoinSet(c, members, far, True) if verts is None else JoinSet(c, verts, far, False))
    return out


def coset_pattern(ball: CayleyBall, s, far_threshold: int | None = None, nondegenerate_only: bool = False) -> PatternSpace:
    joins = coset_joins(ball, s, far_threshold)
    if nondegenerate_only:
        joins = [j for j in joins if not j.degenerate]
    return PatternSpace(ball, [j.vertices for j in joins], [j.coset for j in joins], [j.degenerate for j in joins])


def translate_pattern(p: PatternSpace, t: Sequence[int], target: CayleyBall) -> PatternSpace:
    """Left-translate every member of a Cayley-ball pattern into ``target``."""
    src = p.graph
    fam = []
    for s in p.family:
        fam.append([target.index[multiply(t, src.words[int(v)])] for v in s])
    labels = [CosetId.of(multiply(t, lab.representative)) if isinstance(lab, CosetId) else lab for lab in p.labels]
    return PatternSpace(target, fam, labels, list(p.degenerate))


def grid_lines_pattern(radius: int, spacing: int = 5) -> PatternSpace:
    """Axis-parallel lines ``x = c`` and ``y = c`` (c a multiple of spacing)."""
    g = grid_graph(radius)
    fam, labels = [], []
    cs = [c for c in range(-radius, radius + 1) if c % spacing == 0]
    for c in cs:
        fam.append([g.index[(c, y)] for y in range(-radius, radius + 1)])
        labels.append(("x", c))
    for c in cs:
        fam.append([g.index[(x, c)] for x in range(-radius, radius + 1)])
        labels.append(("y", c))
    return PatternSpace(g, fam, labels)


# ------------------------------------------------------------ projections


def _vertices(graph: MetricGraph, J) -> np.ndarray:
    if isinstance(J, JoinSet):
        return J.vertices
    return np.unique(np.array([graph.vertex(v) for v in J], dtype=np.int64))


def nearest_point_projection(graph: MetricGraph, x, J) -> np.ndarray:
    """All points of J at minimal distance from x (ties are all kept)."""
    verts = _vertices(graph, J)
    if verts.size == 0:
        raise ValueError("cannot project onto an empty set")
    d = graph.distances_from(x)[verts]
    return verts[d == d.min()]


def projection_diameter(graph: MetricGraph, Ji, Jj) -> int:
    """Diameter of the union of projections of the points of Ji onto Jj."""
    src, dst = _vertices(graph, Ji), _vertices(graph, Jj)
    D = graph.distance_matrix(list(dst), src)
    hit = (D == D.min(axis=0)).any(axis=1)
    return graph.diameter_of(dst[hit])


def _nearest_masks(graph: MetricGraph, target: np.ndarray) -> np.ndarray:
    # multi-source BFS carrying, per vertex, the bitmask of nearest targets
    dist = np.full(graph.n, -1, dtype=np.int64)
    mask = np.zeros(graph.n, dtype=np.uint64)
    dist[target] = 0
    mask[target] = np.left_shift(np.uint64(1), np.arange(target.size, dtype=np.uint64))
    frontier = target
    level = 0
    while frontier.size:
        level += 1
        nb = graph.neighbors[frontier].ravel()
        nb = nb[nb >= 0]
        fresh = np.unique(nb[dist[nb] == -1])
        if fresh.size == 0:
            break
        dist[fresh] = level
        around = graph.neighbors[fresh]
        prev = (around >= 0) & (dist[around] == level - 1)
        mask[fresh] = np.bitwise_or.reduce(np.where(prev, mask[around], np.uint64(0)), axis=1)
        frontier = fresh
    return mask


def projection_diameters(graph: MetricGraph, sets: Sequence) -> np.ndarray:
    """Matrix P[i, j] = projection_diameter(sets[i], sets[j]) for all pairs."""
    verts = [_vertices(graph, s) for s in sets]
    if any(v.size == 0 for v in verts):
        raise ValueError("cannot project onto an empty set")
    k = len(verts)
    out = np.zeros((k, k), dtype=np.int64)
    if k == 0:
        return out
    flat = np.concatenate(verts)
    starts = np.cumsum([0] + [v.size for v in verts[:-1]])
    for j, tgt in enumerate(verts):
        DJ = graph.pair_distances(tgt, tgt)
        if tgt.size <= 63:
            masks = _nearest_masks(graph, tgt)
            proj = np.bitwise_or.reduceat(masks[flat], starts)
            bits = ((proj[:, None] >> np.arange(tgt.size, dtype=np.uint64)) & np.uint64(1)).astype(bool)
        else:
            D = graph.distance_matrix(list(tgt), flat)
            near = D == D.min(axis=0)[None, :]
            bits = np.logical_or.reduceat(near.T, starts, axis=0)
        both = bits[:, :, None] & bits[:, None, :]
        out[:, j] = np.where(both, DJ[None, :, :], 0).max(axis=(1, 2))
    return out


def set_distance(graph: MetricGraph, A, B) -> int:
    a, b = _vertices(graph, A), _vertices(graph, B)
    if a.size == 0 or b.size == 0:
        raise ValueError("set distance needs nonempty sets")
    return int(graph.distances_from_set(a)[b].min())


# ------------------------------------------------------------- discreteness


def discreteness_profile(
    s,
    N: int,
    radii: Iterable[int],
    arm: int = 1,
    far_threshold=None,
) -> list[int]:
    """Count cosets whose join passes within N of the identity, per radius.

    A coset counts at radius R when two of its elements u, v at distance at
    least the far threshold have a geodesic through some w with |w| <= N and
    both d(w, u), d(w, v) >= ``arm``.  Larger ``arm`` demands a wider visual
    angle at the basepoint.  ``far_threshold`` is an int or a function of R.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    pred = as_predicate(s)
    out = []
    for R in radii:
        ball = generate_ball(Presentation.free(pred.rank), R)
        if far_threshold is None:
            far = default_far_threshold(R)
        elif callable(far_threshold):
            far = far_threshold(R)
        else:
            far = far_threshold
        far = max(far, 1)
        cosets, labels = coset_partition(pred, ball)
        near = np.flatnonzero(ball.lengths <= N)
        count = 0
        for k in range(len(cosets)):
            members = np.flatnonzero(labels == k)
            if members.size < 2:
                continue
            Duv = ball.pair_distances(members, members)
            far_pairs = Duv >= far
            if not far_pairs.any():
                continue
            Dw = ball.pair_distances(near, members)
            for A in Dw:
                ok = A >= arm
                through = (A[:, None] + A[None, :] == Duv) & far_pairs & ok[:, None] & ok[None, :]
                if through.any():
                    count += 1
                    break
        out.append(count)
    return out
