"""Presentations, word normal forms, Cayley balls and their coarse geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .folding import FoldingGraph
from .graphs import MetricGraph
from .words import (
    IDENTITY,
    Word,
    cyclic_reduce,
    exponent_sums,
    format_word,
    free_reduce,
    inverse,
    letters,
    multiply,
    parse_word,
    shortlex_key,
)

KINDS = ("free", "dehn", "generic")
DEFAULT_VERTEX_CAP = 2_000_000


class BallTooLarge(RuntimeError):
    """Raised when a ball would exceed its vertex cap."""


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...] = ()
    kind: str = "free"

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(set(gens)) != len(gens):
            raise ValueError("generator names must be distinct")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        rels = tuple(tuple(r) for r in self.relators)
        for r in rels:
            if any(not 1 <= abs(x) <= len(gens) for x in r):
                raise ValueError(f"relator {r} uses an unknown generator")
            if free_reduce(r) != r:
                raise ValueError(f"relator {r} is not freely reduced")
        if self.kind == "free" and rels:
            raise ValueError("a free presentation has no relators")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", rels)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @classmethod
    def free(cls, rank: int = 2) -> "Presentation":
        names = "abcdefghijklmnopqrstuvwxyz"
        if rank > len(names):
            names = [f"x{i}" for i in range(rank)]
        return cls(tuple(names[:rank]))

    @classmethod
    def from_strings(cls, generators: Sequence[str], relators: Sequence[str] = (), kind: str | None = None):
        gens = tuple(generators)
        rels = tuple(parse_word(r, gens) for r in relators)
        if kind is None:
            kind = "generic" if rels else "free"
        return cls(gens, rels, kind)

    def parse(self, text: str) -> Word:
        return reduce_word(self, parse_word(text, self.generators))

    def format(self, word: Sequence[int]) -> str:
        return format_word(word, self.generators)

    def to_text(self) -> str:
        lines = [f"# kind: {self.kind}", " ".join(self.generators)]
        lines += [self.format(r) for r in self.relators]
        return "\n".join(lines) + "\n"


def z2_presentation() -> Presentation:
    return Presentation.from_strings(["a", "b"], ["a b a^-1 b^-1"], kind="generic")


def surface_presentation(genus: int = 2) -> Presentation:
    """Closed orientable surface group, declared Dehn for genus >= 2."""
    names = []
    rel = []
    for i in range(genus):
        x, y = f"a{i + 1}", f"b{i + 1}"
        names += [x, y]
        rel += [x, y, f"{x}^-1", f"{y}^-1"]
    if genus == 2:
        names = ["a", "b", "c", "d"]
        rel = ["a", "b", "a^-1", "b^-1", "c", "d", "c^-1", "d^-1"]
    return Presentation.from_strings(names, [" ".join(rel)], kind="dehn" if genus >= 2 else "generic")


def read_presentation(path: str | Path) -> Presentation:
    """Read the text format: one generator line, then one relator per line.

    Blank lines are ignored.  A comment line ``# kind: dehn`` declares the
    presentation kind; otherwise it is ``free`` without relators and
    ``generic`` with them.
    """
    kind = None
    body = []
    for line in Path(path).read_text().splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            key, _, val = s[1:].partition(":")
            if key.strip() == "kind":
                kind = val.strip()
            continue
        body.append(s)
    if not body:
        raise ValueError(f"{path}: no generator line")
    gens = body[0].replace(",", " ").split()
    return Presentation.from_strings(gens, body[1:], kind)


def write_presentation(p: Presentation, path: str | Path) -> None:
    Path(path).write_text(p.to_text())


# ---------------------------------------------------------------- normal forms


def _relator_pieces(p: Presentation) -> list[Word]:
    pieces = set()
    for r in p.relators:
        r = cyclic_reduce(r)
        for w in (r, inverse(r)):
            for i in range(len(w)):
                pieces.add(w[i:] + w[:i])
    return sorted(pieces, key=shortlex_key)


def dehn_reduce(p: Presentation, word: Sequence[int]) -> Word:
    """Dehn's algorithm: replace any subword longer than half a relator."""
    pieces = _relator_pieces(p)
    w = free_reduce(word)
    changed = True
    while changed:
        changed = False
        for r in pieces:
            m = len(r) // 2 + 1
            head = r[:m]
            for i in range(len(w) - m + 1):
                if w[i : i + m] == head:
                    w = free_reduce(w[:i] + inverse(r[m:]) + w[i + m :])
                    changed = True
                    break
            if changed:
                break
    return w


def reduce_word(p: Presentation, letters_: Iterable[int]) -> Word:
    """Free reduction, followed by Dehn reduction for ``kind='dehn'``."""
    raw = tuple(int(x) for x in letters_)
    for x in raw:
        if x == 0 or abs(x) > p.rank:
            raise ValueError(f"letter {x} does not index a generator of {p.generators}")
    w = free_reduce(raw)
    if p.kind == "dehn":
        w = dehn_reduce(p, w)
    return w


# ----------------------------------------------------------------------- balls


class CayleyBall(MetricGraph):
    """Radius-R ball about the identity in a Cayley graph.

    Vertices are shortlex-minimal geodesic words, listed in shortlex order, so
    index 0 is the identity.  ``edges`` holds ``(i, j, g)`` with
    ``words[j] == words[i] * generator g`` (g is 0-based).
    """

    def __init__(self, presentation: Presentation, radius: int, words: Sequence[Word], edges: Sequence[tuple[int, int, int]]):
        super().__init__(words, [(i, j) for i, j, _ in edges])
        self.presentation = presentation
        self.radius = radius
        self.words: list[Word] = list(words)
        self.edges = sorted(set(edges))
        self.lengths = np.array([len(w) for w in self.words], dtype=np.int64)
        self.caveat = None
        if presentation.kind == "generic":
            self.caveat = (
                "relator closure was run on a bounded window; identifications needing "
                "longer relator chains would be missed"
            )
        if presentation.kind == "free":
            width = max(radius, 1)
            mat = np.zeros((len(self.words), width), dtype=np.int64)
            for i, w in enumerate(self.words):
                mat[i, : len(w)] = w
            self._letters = mat

    def _compute_row(self, i: int) -> np.ndarray:
        if self.presentation.kind != "free":
            return super()._compute_row(i)
        # trees: d(u, v) = |u| + |v| - 2 * lcp(u, v); balls in trees are convex
        w = self._letters[i]
        same = self._letters == w
        lcp = np.cumprod(same, axis=1).sum(axis=1)
        lcp = np.minimum(lcp, np.minimum(self.lengths, self.lengths[i]))
        return self.lengths + self.lengths[i] - 2 * lcp

    def pair_distances(self, rows, cols) -> np.ndarray:
        if self.presentation.kind != "free":
            return super().pair_distances(rows, cols)
        r = np.asarray(rows, dtype=np.int64)
        c = np.asarray(cols, dtype=np.int64)
        out = np.empty((r.size, c.size), dtype=np.int64)
        lc = self._letters[c]
        step = max(1, 2_000_000 // max(1, c.size * max(1, self.radius)))
        for lo in range(0, r.size, step):
            rr = r[lo : lo + step]
            same = self._letters[rr][:, None, :] == lc[None, :, :]
            lcp = np.cumprod(same, axis=2).sum(axis=2)
            lcp = np.minimum(lcp, np.minimum.outer(self.lengths[rr], self.lengths[c]))
            out[lo : lo + step] = self.lengths[rr][:, None] + self.lengths[c][None, :] - 2 * lcp
        return out

    def contains_word(self, w: Word) -> bool:
        return w in self.index

    def word(self, x) -> Word:
        return self.words[self.vertex(x)]

    def vertex(self, x) -> int:
        if isinstance(x, str):
            x = self.presentation.parse(x)
        return super().vertex(x)

    def sphere(self, r: int) -> np.ndarray:
        return np.flatnonzero(self.lengths == r)

    def geodesic_vertices(self, x, y) -> np.ndarray:
        """All vertices lying on some geodesic from x to y inside the ball."""
        i, j = self.vertex(x), self.vertex(y)
        if self.presentation.kind == "free":
            u, v = self.words[i], self.words[j]
            k = 0
            while k < min(len(u), len(v)) and u[k] == v[k]:
                k += 1
            ws = {u[:t] for t in range(k, len(u) + 1)} | {v[:t] for t in range(k, len(v) + 1)}
            return np.array(sorted(self.index[w] for w in ws), dtype=np.int64)
        di, dj = self.distances_from(i), self.distances_from(j)
        return np.flatnonzero(di + dj == di[j])

    def to_json(self) -> dict:
        p = self.presentation
        return {
            "radius": self.radius,
            "presentation": {
                "generators": list(p.generators),
                "relators": [p.format(r) for r in p.relators],
                "kind": p.kind,
            },
            "vertices": [p.format(w) for w in self.words],
            "edges": [[i, j, p.generators[g]] for i, j, g in self.edges],
        }


def generate_ball(p: Presentation, radius: int, vertex_cap: int = DEFAULT_VERTEX_CAP, window: int | None = None) -> CayleyBall:
    """Elements of word length at most ``radius`` and the edges between them.

    ``window`` only applies to ``kind='generic'``: the relator closure runs on
    the tree of reduced words up to that length (default ``radius`` plus the
    longest relator length).
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if p.kind == "free":
        words = _free_ball_words(p.rank, radius, vertex_cap)
    elif p.kind == "dehn":
        words = _dehn_ball_words(p, radius, vertex_cap)
    else:
        return _closure_ball(p, radius, vertex_cap, window)
    return _assemble(p, radius, words)


def _free_ball_words(rank: int, radius: int, cap: int) -> list[Word]:
    if rank == 0:
        return [IDENTITY]
    size = 1 + sum(2 * rank * (2 * rank - 1) ** (k - 1) for k in range(1, radius + 1))
    if size > cap:
        raise BallTooLarge(f"ball of radius {radius} in F{rank} has {size} vertices > cap {cap}")
    out = [IDENTITY]
    layer = [IDENTITY]
    alphabet = letters(rank)
    for _ in range(radius):
        layer = [w + (x,) for w in layer for x in alphabet if not w or x != -w[-1]]
        out.extend(layer)
    return out


def _dehn_ball_words(p: Presentation, radius: int, cap: int) -> list[Word]:
    # BFS over elements; equality decided by Dehn's algorithm within
    # abelianisation buckets (a group invariant, so buckets never split a class)
    buckets: dict[tuple[int, ...], list[Word]] = {exponent_sums((), p.rank): [IDENTITY]}
    out = [IDENTITY]
    layer = [IDENTITY]
    alphabet = letters(p.rank)
    for _ in range(radius):
        nxt = []
        for w in layer:
            for x in alphabet:
                cand = free_reduce(w + (x,))
                if len(cand) <= len(w):
                    continue
                key = exponent_sums(cand, p.rank)
                bucket = buckets.setdefault(key, [])
                if any(not dehn_reduce(p, multiply(inverse(cand), u)) for u in bucket):
                    continue
                bucket.append(cand)
                nxt.append(cand)
                if len(out) + len(nxt) > cap:
                    raise BallTooLarge(f"more than {cap} vertices")
        nxt.sort(key=shortlex_key)
        out.extend(nxt)
        layer = nxt
    return out


def _closure_quotient(p: Presentation, window: int, cap: int):
    tree_words = _free_ball_words(p.rank, window, cap)
    g = FoldingGraph()
    index: dict[Word, int] = {}
    for w in tree_words:
        v = g.add_vertex()
        index[w] = v
        if w:
            g.add_edge(index[w[:-1]], w[-1], v)
    loops = _relator_pieces(p)
    changed = True
    while changed:
        changed = False
        for root in g.classes():
            for r in loops:
                v = root
                for x in r:
                    v = g.target(v, x)
                    if v is None:
                        break
                if v is not None and g.find(v) != g.find(root):
                    g.merge(v, root)
                    changed = True
    return g, index


def _closure_ball(p: Presentation, radius: int, cap: int, window: int | None) -> CayleyBall:
    longest = max((len(r) for r in p.relators), default=0)
    window = radius + longest if window is None else window
    g, index = _closure_quotient(p, window, cap * 64)
    # shortlex geodesic representatives: BFS in the quotient from the identity
    best: dict[int, Word] = {g.find(0): IDENTITY}
    layer = [IDENTITY]
    alphabet = letters(p.rank)
    for _ in range(radius):
        nxt = []
        for w in layer:
            c = g.find(index[w])
            for x in alphabet:
                t = g.target(c, x)
                if t is None or t in best:
                    continue
                best[t] = w + (x,)
                nxt.append(w + (x,))
        if len(best) > cap:
            raise BallTooLarge(f"more than {cap} vertices")
        layer = nxt
    words = sorted(best.values(), key=shortlex_key)
    pos = {g.find(index[w]): i for i, w in enumerate(words)}
    edges = []
    for i, w in enumerate(words):
        c = g.find(index[w])
        for gen in range(1, p.rank + 1):
            t = g.target(c, gen)
            if t is not None and t in pos:
                edges.append((i, pos[t], gen - 1))
    return CayleyBall(p, radius, words, edges)


def _assemble(p: Presentation, radius: int, words: list[Word]) -> CayleyBall:
    words = sorted(words, key=shortlex_key)
    index = {w: i for i, w in enumerate(words)}
    buckets: dict[tuple[int, ...], list[int]] = {}
    if p.kind == "dehn":
        for i, w in enumerate(words):
            buckets.setdefault(exponent_sums(w, p.rank), []).append(i)
    edges = []
    for i, w in enumerate(words):
        for gen in range(1, p.rank + 1):
            v = free_reduce(w + (gen,))
            j = index.get(v)
            if j is None and p.kind == "dehn":
                for k in buckets.get(exponent_sums(v, p.rank), ()):
                    if not dehn_reduce(p, multiply(inverse(v), words[k])):
                        j = k
                        break
            if j is not None:
                edges.append((i, j, gen - 1))
    return CayleyBall(p, radius, words, edges)


# ------------------------------------------------------------ coarse geometry


def gromov_product(ball: MetricGraph, x, y, z) -> Fraction:
    """(x|y)_z = (d(x,z) + d(y,z) - d(x,y)) / 2."""
    dz = ball.distances_from(z)
    i, j = ball.vertex(x), ball.vertex(y)
    return Fraction(int(dz[i]) + int(dz[j]) - ball.distance(i, j), 2)


@dataclass(frozen=True)
class DeltaEstimate:
    delta: Fraction
    exhaustive: bool
    seed: int | None
    quadruples: int
    witness: tuple[int, int, int, int] | None = field(default=None, compare=False)


def _four_point(d01, d23, d02, d13, d03, d12):
    s = np.stack([d01 + d23, d02 + d13, d03 + d12])
    s.sort(axis=0)
    return s[2] - s[1]


def estimate_delta(
    ball: MetricGraph,
    sample_count: int = 100_000,
    seed: int = 0,
    exhaustive_threshold: int = 50_000_000,
) -> DeltaEstimate:
    """Four-point hyperbolicity constant of the ball.

    The defect of a quadruple is half the gap between the two largest of the
    three pairwise-sum pairings.  When the number of quadruples is at most
    ``exhaustive_threshold`` every quadruple is scanned and the result is
    exact; otherwise ``sample_count`` quadruples are drawn with ``seed``.
    """
    n = ball.n
    if n < 4:
        return DeltaEstimate(Fraction(0), True, None, 0)
    total = math.comb(n, 4)
    if total <= exhaustive_threshold:
        D = ball.all_pairs()
        best = 0
        witness = None
        for i in range(n - 3):
            for j in range(i + 1, n - 2):
                ks = np.arange(j + 1, n)
                kk, ll = np.triu_indices(ks.size, k=1)
                k, l = ks[kk], ks[ll]
                if k.size == 0:
                    continue
                gap = _four_point(D[i, j], D[k, l], D[i, k], D[j, l], D[i, l], D[j, k])
                m = int(gap.max())
                if m > best:
                    best = m
                    t = int(gap.argmax())
                    witness = (i, j, int(k[t]), int(l[t]))
        return DeltaEstimate(Fraction(best, 2), True, None, total, witness)
    rng = np.random.default_rng(seed)
    best = 0
    witness = None
    for _ in range(sample_count):
        q = [int(v) for v in rng.choice(n, 4, replace=False)]
        r0, r1, r2 = (ball.distances_from(v) for v in q[:3])
        sums = sorted((r0[q[1]] + r2[q[3]], r0[q[2]] + r1[q[3]], r0[q[3]] + r1[q[2]]))
        gap = int(sums[2] - sums[1])
        if gap > best:
            best, witness = gap, tuple(q)
    return DeltaEstimate(Fraction(best, 2), False, seed, sample_count, witness)


# ------------------------------------------------------------------ coning off


class ElectricBall:
    """A ball with each chosen subset joined to a fresh cone vertex.

    Weights are doubled so that cone edges (length 1/2) are integers: base
    edges weigh 2, cone edges 1.
    """

    def __init__(self, base: MetricGraph, subsets: Sequence[Iterable]):
        self.base = base
        self.subsets = []
        for s in subsets:
            idx = sorted({base.vertex(v) for v in s})
            if not idx:
                raise ValueError("cannot cone off an empty subset")
            self.subsets.append(np.array(idx, dtype=np.int64))
        n = base.n
        rows, cols, vals = [], [], []
        for u, v in base.edge_list():
            rows += [u, v]
            cols += [v, u]
            vals += [2, 2]
        for c, s in enumerate(self.subsets):
            cone = n + c
            for v in s:
                rows += [int(v), cone]
                cols += [cone, int(v)]
                vals += [1, 1]
        size = n + len(self.subsets)
        self._matrix = coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()
        self._cache: dict[int, np.ndarray] = {}

    @property
    def cone_vertices(self) -> list[int]:
        return [self.base.n + c for c in range(len(self.subsets))]

    def doubled_distances_from(self, x) -> np.ndarray:
        i = self.base.vertex(x)
        if i not in self._cache:
            d = dijkstra(self._matrix, directed=False, indices=i)
            self._cache[i] = np.rint(d[: self.base.n]).astype(np.int64)
        return self._cache[i]

    def distance(self, x, y) -> Fraction:
        return Fraction(int(self.doubled_distances_from(x)[self.base.vertex(y)]), 2)


def cone_off(ball: MetricGraph, subsets: Sequence[Iterable]) -> ElectricBall:
    return ElectricBall(ball, subsets)
