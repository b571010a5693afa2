"""Coarse barycentres, the quasi-isometry induced by a pattern pairing, and
finite-window checks of the pattern-space axioms."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np
from scipy import sparse

from .cayley import CayleyBall
from .graphs import MetricGraph
from .patterns import PatternSpace
from .stallings import as_predicate, canonical_coset
from .words import multiply


class KTooSmall(ValueError):
    """Raised when N_K(g) meets too few pattern members at some vertex."""

    def __init__(self, vertex: int, count: int, needed: int):
        super().__init__(f"N_K of vertex {vertex} meets {count} members, need more than {needed}")
        self.vertex = vertex
        self.count = count
        self.needed = needed


# ------------------------------------------------------------------ pairing


@dataclass
class Pairing:
    """Bijection between member indices of two pattern spaces."""

    map: dict[int, int]
    properness_samples: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        self.map = {int(i): int(j) for i, j in self.map.items()}
        if len(set(self.map.values())) != len(self.map):
            raise ValueError("pairing is not injective")

    @classmethod
    def identity(cls, n: int) -> "Pairing":
        return cls({i: i for i in range(n)})

    def inverse(self) -> "Pairing":
        return Pairing({j: i for i, j in self.map.items()})

    def __getitem__(self, i: int) -> int:
        return self.map[i]

    def to_json(self) -> dict:
        return {"map": [[i, j] for i, j in sorted(self.map.items())]}

    @classmethod
    def from_json(cls, data: dict) -> "Pairing":
        return cls({int(i): int(j) for i, j in data["map"]})


def label_pairing(p1: PatternSpace, p2: PatternSpace, relabel) -> Pairing:
    """Pair member i of p1 with the member of p2 labelled ``relabel(label_i)``."""
    pos = {lab: j for j, lab in enumerate(p2.labels)}
    out = {}
    for i, lab in enumerate(p1.labels):
        new = relabel(lab)
        if new not in pos:
            raise ValueError(f"no member labelled {new!r} in the target pattern")
        out[i] = pos[new]
    return Pairing(out)


def translation_pairing(p1: PatternSpace, p2: PatternSpace, t: Sequence[int], s) -> Pairing:
    """Coset pairing cH -> t·cH between coset patterns of the subgroup ``s``."""
    pred = as_predicate(s)
    return label_pairing(p1, p2, lambda c: canonical_coset(pred, multiply(t, c.representative)))


# ----------------------------------------------------------- meeting balls


def minimal_meeting_ball(p: PatternSpace, indices: Sequence[int], order: np.ndarray | None = None) -> tuple[int, int]:
    """Vertex minimising the largest distance to the chosen members.

    Ties go to the lowest vertex index, or to the lowest ``order`` rank.
    """
    indices = list(indices)
    if not indices:
        raise ValueError("need at least one member")
    worst = np.max([p.member_distances(i) for i in indices], axis=0)
    worst = np.where(worst < 0, np.iinfo(np.int64).max, worst)
    r = int(worst.min())
    cands = np.flatnonzero(worst == r)
    if order is not None:
        cands = cands[np.argsort(order[cands], kind="stable")]
    return int(cands[0]), r


def edge_depth(graph: MetricGraph) -> np.ndarray:
    """Distance to the nearest vertex of less than maximal degree."""
    deg = (graph.neighbors >= 0).sum(axis=1)
    edge = np.flatnonzero(deg < deg.max())
    if edge.size == 0:
        return np.full(graph.n, np.iinfo(np.int64).max // 2, dtype=np.int64)
    return graph.distances_from_set(edge)


def interior_vertices(graph: MetricGraph, depth: int) -> np.ndarray:
    """Vertices whose ``depth``-ball sits inside the window.

    For Cayley balls of radius R this is ``|g| <= R - depth``.
    """
    if isinstance(graph, CayleyBall):
        return np.flatnonzero(graph.lengths <= graph.radius - depth)
    return np.flatnonzero(edge_depth(graph) >= depth)


def construct_q(
    p1: PatternSpace,
    p2: PatternSpace,
    phi: Pairing,
    K: int,
    w2: int,
    domain: Iterable[int] | None = None,
    order: np.ndarray | None = None,
) -> dict[int, int]:
    """q(g) = centre of a minimal ball meeting the images of the members near g.

    The members considered are those meeting N_K(g).  More than ``w2`` of
    them are required, else KTooSmall names the offending vertex.
    """
    dom = interior_vertices(p1.graph, K) if domain is None else np.asarray(sorted(set(int(v) for v in domain)))
    near = _members_near(p1, dom, K)
    q = {}
    for g, members in zip(dom, near):
        if len(members) <= w2:
            raise KTooSmall(int(g), len(members), w2)
        q[int(g)] = minimal_meeting_ball(p2, [phi[i] for i in members], order)[0]
    return q


def _members_near(p: PatternSpace, vertices: np.ndarray, k: int) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(len(vertices))]
    for i in range(len(p)):
        d = p.member_distances(i)[vertices]
        for a in np.flatnonzero((d >= 0) & (d <= k)):
            out[a].append(i)
    return out


def map_displacement(graph: MetricGraph, q: Mapping[int, int], target: Mapping[int, int]) -> int:
    """sup over the domain of d(q(g), target(g)), both in ``graph``."""
    worst = 0
    for g, v in q.items():
        worst = max(worst, graph.distance(v, target[g]))
    return worst


def tie_break_discrepancy(p1, p2, phi, K, w2, seeds: Iterable[int] = (0, 1, 2), domain=None) -> int:
    """Largest movement of q(g) when the centre tie-break order is shuffled."""
    base = construct_q(p1, p2, phi, K, w2, domain)
    worst = 0
    for seed in seeds:
        order = np.random.default_rng(seed).permutation(p2.graph.n)
        other = construct_q(p1, p2, phi, K, w2, domain, order)
        worst = max(worst, map_displacement(p2.graph, base, other))
    return worst


# --------------------------------------------------------- verification


@dataclass
class ProperEnvelope:
    forward: dict[int, int]
    backward: dict[int, int]
    blowup: bool
    witness: tuple[int, int] | None
    sample_count: int


def _envelope(d_from: np.ndarray, d_to: np.ndarray) -> dict[int, int]:
    env = {}
    best = 0
    for n in range(int(d_from.max()) + 1 if d_from.size else 0):
        hit = d_to[d_from <= n]
        if hit.size:
            best = max(best, int(hit.max()))
        env[n] = best
    return env


def set_distance_table(p: PatternSpace, indices: Sequence[int] | None = None) -> np.ndarray:
    idx = list(range(len(p))) if indices is None else list(indices)
    D = np.zeros((len(idx), len(idx)), dtype=np.int64)
    for a, i in enumerate(idx):
        row = p.member_distances(i)
        for b, j in enumerate(idx):
            D[a, b] = row[p.family[j]].min()
    return D


def verify_uniform_properness(
    p1: PatternSpace,
    p2: PatternSpace,
    phi: Pairing,
    sample_pairs: Sequence[tuple[int, int]] | None = None,
    scale: int = 2,
    offset: int = 2,
) -> ProperEnvelope:
    """Observed envelopes f with d(J_i, J_j) <= n  =>  d(phi J_i, phi J_j) <= f(n).

    ``blowup`` is raised when either envelope exceeds ``scale * n + offset``;
    the witness is the first offending sample pair.
    """
    if sample_pairs is None:
        sample_pairs = list(combinations(sorted(phi.map), 2))
    left = sorted({i for pair in sample_pairs for i in pair})
    pos = {i: a for a, i in enumerate(left)}
    D1 = set_distance_table(p1, left)
    D2 = set_distance_table(p2, [phi[i] for i in left])
    a = np.array([pos[i] for i, _ in sample_pairs], dtype=np.int64)
    b = np.array([pos[j] for _, j in sample_pairs], dtype=np.int64)
    d1, d2 = D1[a, b], D2[a, b]
    fwd, bwd = _envelope(d1, d2), _envelope(d2, d1)
    witness = None
    for k, (x, y) in enumerate(zip(d1, d2)):
        if y > scale * x + offset or x > scale * y + offset:
            witness = tuple(sample_pairs[k])
            break
    return ProperEnvelope(fwd, bwd, witness is not None, witness, len(sample_pairs))


@dataclass
class QiReport:
    lam: Fraction
    epsilon: Fraction
    pairing_bound: dict[int, int]
    sample_count: int
    surjectivity_gap: int

    def to_json(self) -> dict:
        return {
            "lambda": _frac(self.lam),
            "epsilon": _frac(self.epsilon),
            "pairingBound": {str(n): h for n, h in self.pairing_bound.items()},
            "sampleCount": self.sample_count,
            "surjectivityGap": self.surjectivity_gap,
        }


def _frac(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator}


LAMBDA_CANDIDATES = (Fraction(1), Fraction(5, 4), Fraction(4, 3), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(4))


def qi_envelope(d1: np.ndarray, d2: np.ndarray, candidates=LAMBDA_CANDIDATES) -> tuple[Fraction, Fraction]:
    """(lambda, eps) with d1/lambda - eps <= d2 <= lambda*d1 + eps on all samples.

    Picks the candidate lambda minimising lambda + eps(lambda), smaller lambda on ties.
    """
    best = None
    for lam in candidates:
        eps = Fraction(0)
        if d1.size:
            up = max(Fraction(int(y)) - lam * int(x) for x, y in zip(d1, d2))
            down = max(Fraction(int(x)) / lam - int(y) for x, y in zip(d1, d2))
            eps = max(eps, up, down)
        key = (lam + eps, lam)
        if best is None or key < best[0]:
            best = (key, lam, eps)
    return best[1], best[2]


def verify_qi(
    q: Mapping[int, int],
    p1: PatternSpace,
    p2: PatternSpace,
    phi: Pairing | None = None,
    sample_pairs: Sequence[tuple[int, int]] | None = None,
    sample_count: int = 2000,
    seed: int = 0,
    net: Iterable[int] | None = None,
) -> QiReport:
    """Quasi-isometry constants of ``q`` on sampled vertex pairs.

    The pairing bound h(n) is the largest d(q(x), phi J) over sampled
    vertices x with d(x, J) <= n.  The surjectivity gap is measured over
    ``net`` (default: the interior of p2 at the depth of q's domain in p1).
    """
    dom = sorted(q)
    if sample_pairs is None:
        pairs = list(combinations(dom, 2))
        if len(pairs) > sample_count:
            pairs = random.Random(seed).sample(pairs, sample_count)
        sample_pairs = sorted(pairs)
    g1, g2 = p1.graph, p2.graph
    d1 = np.array([g1.distance(x, y) for x, y in sample_pairs], dtype=np.int64)
    d2 = np.array([g2.distance(q[x], q[y]) for x, y in sample_pairs], dtype=np.int64)
    lam, eps = qi_envelope(d1, d2)

    bound: dict[int, int] = {}
    if phi is not None:
        xs = np.array(dom, dtype=np.int64)
        qx = np.array([q[x] for x in dom], dtype=np.int64)
        pts = []
        for i in sorted(phi.map):
            pts.append((p1.member_distances(i)[xs], p2.member_distances(phi[i])[qx]))
        a = np.concatenate([u for u, _ in pts])
        b = np.concatenate([v for _, v in pts])
        bound = _envelope(a, b)

    image = np.unique(np.array(list(q.values()), dtype=np.int64))
    if net is None:
        if isinstance(g1, CayleyBall):
            depth = g1.radius - int(g1.lengths[dom].max())
        else:
            depth = int(edge_depth(g1)[dom].min())
        net_arr = interior_vertices(g2, depth)
    else:
        net_arr = np.asarray(list(net), dtype=np.int64)
    gap = int(g2.distances_from_set(image)[net_arr].max()) if net_arr.size else 0
    return QiReport(lam, eps, bound, len(sample_pairs), gap)


# ----------------------------------------------------------------- axioms


@dataclass
class Axiom4:
    N: int | None
    K_of_k: dict[int, int]
    violations: list[tuple[int, tuple[int, ...], int]]

    def violations_from(self, n: int) -> list[tuple[int, tuple[int, ...], int]]:
        """Violations among collections of at least ``n`` members."""
        return [v for v in self.violations if len(v[1]) >= n]


@dataclass
class AxiomReport:
    M_of_k: dict[int, int]
    k_of_K: dict[int, int | None]
    K_of_kn: dict[tuple[int, int], int]
    axiom4: Axiom4
    violations1: list[tuple[int, int, int]]
    violations3: list[tuple[int, tuple[int, ...]]]
    window_limited_K: int

    def tables(self) -> dict:
        """The measured tables, for comparing windows."""
        return {
            "M_of_k": dict(self.M_of_k),
            "k_of_K": dict(self.k_of_K),
            "K_of_kn": dict(self.K_of_kn),
            "N": self.axiom4.N,
            "K4_of_k": dict(self.axiom4.K_of_k),
        }

    def to_json(self) -> dict:
        return {
            "M_of_k": {str(k): v for k, v in self.M_of_k.items()},
            "k_of_K": {str(k): v for k, v in self.k_of_K.items()},
            "K_of_kn": {f"{k},{n}": v for (k, n), v in self.K_of_kn.items()},
            "axiom4": {
                "N": self.axiom4.N,
                "K_of_k": {str(k): v for k, v in self.axiom4.K_of_k.items()},
                "violations": [{"k": k, "members": list(c), "diameter": d} for k, c, d in self.axiom4.violations],
                "violationsFromN": 0 if self.axiom4.N is None else len(self.axiom4.violations_from(self.axiom4.N)),
            },
            "violations1": [{"k": k, "vertex": x, "count": c} for k, x, c in self.violations1],
            "violations3": [{"k": k, "members": list(c)} for k, c in self.violations3],
            "windowLimitedK": self.window_limited_K,
        }


class _Near:
    """Per-member vertex lists within distance ``reach``, with distances."""

    def __init__(self, p: PatternSpace, reach: int):
        self.p, self.reach, self.n = p, reach, p.graph.n
        self.verts, self.dists = [], []
        for s in p.family:
            d = p.graph.distances_from_set(s)
            v = np.flatnonzero((d >= 0) & (d <= reach))
            self.verts.append(v)
            self.dists.append(d[v])

    def matrix(self, k: int) -> sparse.csr_matrix:
        rows, cols = [], []
        for i, (v, d) in enumerate(zip(self.verts, self.dists)):
            keep = v[d <= k]
            rows.append(np.full(keep.size, i))
            cols.append(keep)
        r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
        return sparse.csr_matrix((np.ones(r.size, dtype=np.int32), (r, c)), shape=(len(self.verts), self.n))

    def _worst(self, c: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        count = np.zeros(self.n, dtype=np.int32)
        worst = np.zeros(self.n, dtype=np.int64)
        for i in c:
            v = self.verts[i]
            count[v] += 1
            np.maximum.at(worst, v, self.dists[i])
        return count == len(c), worst

    def common(self, c: Sequence[int], k: int) -> np.ndarray:
        """Vertices within k of every member of c."""
        hit, worst = self._worst(c)
        return np.flatnonzero(hit & (worst <= k))

    def meeting_radius(self, c: Sequence[int]) -> int:
        hit, worst = self._worst(c)
        if hit.any():
            return int(worst[hit].min())
        return minimal_meeting_ball(self.p, c)[1]


def _member_matrix(p: PatternSpace) -> sparse.csr_matrix:
    r = np.concatenate([np.full(s.size, i) for i, s in enumerate(p.family)])
    c = np.concatenate(p.family)
    return sparse.csr_matrix((np.ones(r.size, dtype=np.int32), (r, c)), shape=(len(p), p.graph.n))


def _cliques(adj: sparse.spmatrix, n: int) -> list[tuple[int, ...]]:
    g = nx.Graph()
    g.add_nodes_from(range(adj.shape[0]))
    coo = sparse.triu(adj, k=1).tocoo()
    g.add_edges_from(zip(coo.row.tolist(), coo.col.tolist()))
    if n == 1:
        return [(i,) for i in range(adj.shape[0])]
    out = []
    for c in nx.enumerate_all_cliques(g):
        if len(c) == n:
            out.append(tuple(sorted(c)))
        elif len(c) > n:
            break
    return sorted(out)


def check_axioms(p: PatternSpace, k_grid: Sequence[int], n_grid: Sequence[int]) -> AxiomReport:
    """Measure the four pattern-space conditions on a finite window.

    (1) M(k): most members met by N_k(x) over interior x.  A violation is an
        interior vertex beating the count seen in the central half of the
        window, i.e. counts that keep growing towards the edge.
    (2) k(K): least k in the grid with every interior N_k(x) meeting K
        members; None once K exceeds what the window can show.
    (3) K(k, n): largest minimal meeting radius over n members pairwise
        within k.  Violations are collections with no meeting ball at all.
    (4) For each k, collections of n members whose k-neighbourhoods share
        points.  A violation is a collection whose shared region swallows a
        whole member of diameter > 4k.  N is the least n in the grid from
        which no violations occur; K(k) is the largest shared diameter.
    """
    if not k_grid or not n_grid:
        raise ValueError("grids must be nonempty")
    g = p.graph
    depth = edge_depth(g) if not isinstance(g, CayleyBall) else g.radius - g.lengths
    core_depth = int(depth.max() + 1) // 2
    member_diam = np.array([g.diameter_of(s) for s in p.family], dtype=np.int64)
    members = _member_matrix(p)

    M_of_k, min_count, v1 = {}, {}, []
    reach = 2 * max(k_grid) + 2
    lists = _Near(p, reach)
    near_k: dict[int, sparse.csr_matrix] = {}
    for k in sorted(k_grid):
        near = lists.matrix(k)
        near_k[k] = near
        counts = np.asarray(near.sum(axis=0)).ravel()
        inner = depth >= k
        M_of_k[k] = int(counts[inner].max()) if inner.any() else 0
        min_count[k] = int(counts[inner].min()) if inner.any() else 0
        core = depth >= max(k, core_depth)
        cap = int(counts[core].max()) if core.any() else M_of_k[k]
        for x in np.flatnonzero(inner & (counts > cap)):
            v1.append((k, int(x), int(counts[x])))

    top = max(min_count.values())
    k_of_K = {}
    for K in range(1, top + 2):
        ks = [k for k in sorted(k_grid) if min_count[k] >= K]
        k_of_K[K] = ks[0] if ks else None

    K_of_kn, v3 = {}, []
    for k in sorted(k_grid):
        close = (near_k[k] @ members.T) > 0
        close = close.maximum(close.T)
        for n in sorted(n_grid):
            worst = 0
            for c in _cliques(close, n):
                r = lists.meeting_radius(c)
                if r == np.iinfo(np.int64).max:
                    v3.append((k, c))
                    continue
                worst = max(worst, r)
            K_of_kn[(k, n)] = worst

    sizes = np.array([f.size for f in p.family], dtype=np.int64)
    v4, diam_kn = [], {}
    for k in sorted(k_grid):
        near = near_k[k]
        share = (near @ near.T) > 0
        big = member_diam > 4 * k
        for n in sorted(n_grid):
            worst = 0
            for c in _cliques(share, n):
                verts = lists.common(c, k)
                if verts.size == 0:
                    continue
                d = int(g.pair_distances(verts, verts).max())
                worst = max(worst, d)
                if d <= 4 * k:
                    # too small to contain any member of diameter > 4k
                    continue
                region = np.zeros(g.n, dtype=np.int32)
                region[verts] = 1
                if (big & (members @ region == sizes)).any():
                    v4.append((k, c, d))
            diam_kn[(k, n)] = worst
    ns = sorted(n_grid)
    bad_n = {len(c) for _, c, _ in v4}
    N = next((n for n in ns if not any(m in bad_n for m in ns if m >= n)), None)
    K4 = {k: max((d for (kk, n), d in diam_kn.items() if kk == k and N is not None and n >= N), default=0) for k in sorted(k_grid)}
    return AxiomReport(M_of_k, k_of_K, K_of_kn, Axiom4(N, K4, v4), v1, v3, top)
