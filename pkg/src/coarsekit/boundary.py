"""Depth-D cylinder models of the free-group boundary, limit sets,
annulus systems and annular cross-ratios."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable, Sequence

import networkx as nx
import numpy as np

from .cayley import CayleyBall
from .folding import FoldingGraph
from .stallings import CosetId, as_predicate
from .words import Word, reduced_words

# kept for the interface; finite systems never produce it
INFINITE = float("inf")


class BoundaryModel:
    """All reduced words of length ``depth``; each stands for a cylinder of rays.

    ``d(x, y) = 2 ** -lcp(x, y)`` for distinct points.
    """

    def __init__(self, rank: int, depth: int):
        if depth < 1:
            raise ValueError("depth must be at least 1")
        self.rank, self.depth = rank, depth
        self.points: list[Word] = reduced_words(rank, depth)
        self.index = {w: i for i, w in enumerate(self.points)}
        self.letters = np.array(self.points, dtype=np.int64).reshape(len(self.points), depth)
        # codes[i, l] identifies the length-l prefix of point i
        codes = np.zeros((len(self.points), depth + 1), dtype=np.int64)
        for l in range(1, depth + 1):
            _, codes[:, l] = np.unique(self.letters[:, :l], axis=0, return_inverse=True)
        self.codes = codes

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, BoundaryModel) and (self.rank, self.depth) == (other.rank, other.depth)

    def __hash__(self) -> int:
        return hash((self.rank, self.depth))

    def lcp_with(self, word: Sequence[int]) -> np.ndarray:
        """Common prefix length of ``word`` with every point."""
        w = np.zeros(self.depth, dtype=np.int64)
        k = min(len(word), self.depth)
        w[:k] = word[:k]
        same = self.letters[:, :k] == w[:k]
        return np.cumprod(same, axis=1).sum(axis=1) if k else np.zeros(len(self), dtype=np.int64)

    def cylinder(self, prefix: Sequence[int]) -> np.ndarray:
        return self.lcp_with(prefix) >= len(prefix)

    def set_of(self, words: Iterable[Sequence[int]]) -> "ClosedSet":
        mask = np.zeros(len(self), dtype=bool)
        for w in words:
            mask[self.index[tuple(w)]] = True
        return ClosedSet(self, mask)


@lru_cache(maxsize=8)
def boundary_model(rank: int, depth: int) -> BoundaryModel:
    return BoundaryModel(rank, depth)


@dataclass(frozen=True, eq=False)
class ClosedSet:
    model: BoundaryModel
    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (len(self.model),):
            raise ValueError("mask does not match the model")
        if not m.any():
            raise ValueError("closed sets are nonempty")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def points(self) -> list[Word]:
        return [self.model.points[i] for i in np.flatnonzero(self.mask)]

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, ClosedSet) and self.model == other.model and bool((self.mask == other.mask).all())

    def __hash__(self) -> int:
        return hash((self.model.depth, self.mask.tobytes()))


# -------------------------------------------------------------- limit sets


def _coset_automaton(core, c: Sequence[int]) -> tuple[FoldingGraph, int]:
    # core graph of H plus a hair reading c into the basepoint, folded;
    # reduced words read from the hair's start to 0 are exactly cH
    g = FoldingGraph()
    for _ in range(core.n_vertices):
        g.add_vertex()
    for u, x, v in core.edges:
        g.add_edge(u, x, v)
    start = g.add_vertex()
    prev = start
    for i, x in enumerate(c):
        nxt = 0 if i == len(c) - 1 else g.add_vertex()
        g.add_edge(prev, x, nxt)
        prev = nxt
    if not c:
        g.merge(start, 0)
    return g, g.find(start)


def _infinite_states(g: FoldingGraph) -> set[tuple[int, int]]:
    """States (vertex, last letter) admitting arbitrarily long accepted reduced continuations."""
    states = nx.DiGraph()
    verts = g.classes()
    for v in verts:
        for last in [-y for y in g.edges_of(v)] + [0]:
            for x, t in g.edges_of(v).items():
                if x != -last:
                    states.add_edge((v, last), (t, x))
    accept = {s for s in states if s[0] == g.find(0)}
    live = set()
    rev = states.reverse(copy=False)
    for s in accept:
        if s not in live:
            live |= {s} | nx.descendants(rev, s)
    sub = states.subgraph(live)
    cyclic = set()
    for comp in nx.strongly_connected_components(sub):
        if len(comp) > 1 or any(sub.has_edge(s, s) for s in comp):
            cyclic |= comp
    out = set()
    for s in cyclic:
        out |= {s} | nx.descendants(sub.reverse(copy=False), s)
    return out & live


def limit_set_approx(s, c: CosetId | Sequence[int], depth: int) -> ClosedSet:
    """Depth-``depth`` cylinders containing infinitely many elements of cH."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    pred = as_predicate(s)
    model = boundary_model(pred.rank, depth)
    rep = c.representative if isinstance(c, CosetId) else tuple(c)
    if pred.kind == "abelianizationKernel":
        # in rank >= 2 every reduced prefix extends to infinitely many
        # reduced words with any prescribed exponent sums
        if pred.rank < 2:
            raise ValueError("kernel of the abelianisation of Z is trivial")
        return ClosedSet(model, np.ones(len(model), dtype=bool))
    g, start = _coset_automaton(pred.core, rep)
    good = _infinite_states(g)
    hits = []
    stack = [(start, 0, ())]
    while stack:
        v, last, word = stack.pop()
        if len(word) == depth:
            if (v, last) in good:
                hits.append(word)
            continue
        for x, t in g.edges_of(v).items():
            if x != -last:
                stack.append((t, x, word + (x,)))
    if not hits:
        raise ValueError(f"coset {rep} has no deep elements")
    return model.set_of(hits)


# ------------------------------------------------------- hausdorff distance


def _nearest_lcp(A: ClosedSet, B: ClosedSet) -> np.ndarray:
    """For each point of A, the longest common prefix with some point of B."""
    codes = A.model.codes
    a, b = codes[A.mask], codes[B.mask]
    best = np.zeros(a.shape[0], dtype=np.int64)
    for l in range(1, A.model.depth + 1):
        best[np.isin(a[:, l], b[:, l])] = l
    return best


def hausdorff_distance(A: ClosedSet, B: ClosedSet) -> Fraction:
    if A.model != B.model:
        raise ValueError("sets live on different models")
    D = A.model.depth

    def one_way(X, Y) -> Fraction:
        lcp = _nearest_lcp(X, Y)
        # a point of X lying in Y has lcp == depth, distance 0
        far = lcp[lcp < D]
        if far.size == 0:
            return Fraction(0)
        return Fraction(1, 2 ** int(far.min()))

    return max(one_way(A, B), one_way(B, A))


@dataclass(frozen=True)
class Discreteness:
    answer: bool
    nearest_pair: tuple[int, int] | None
    distance: Fraction | None
    collision: bool


def discrete_in_Cc0(family: Sequence[ClosedSet], separation: Fraction) -> Discreteness:
    """All pairwise Hausdorff distances at least ``separation``?

    Two members that are equal as sets are reported at once as a collision.
    """
    for i, s in enumerate(family):
        if len(s) < 2:
            raise ValueError(f"member {i} is a singleton")
    seen: dict[ClosedSet, int] = {}
    for j, s in enumerate(family):
        if s in seen:
            return Discreteness(False, (seen[s], j), Fraction(0), True)
        seen[s] = j
    best, pair = None, None
    for i, j in combinations(range(len(family)), 2):
        d = hausdorff_distance(family[i], family[j])
        if best is None or d < best:
            best, pair = d, (i, j)
    ok = best is None or best >= separation
    return Discreteness(ok, pair, best, False)


# ---------------------------------------------------------------- annuli


@dataclass(frozen=True, eq=False)
class Annulus:
    minus: ClosedSet
    plus: ClosedSet

    def __post_init__(self):
        if self.minus.model != self.plus.model:
            raise ValueError("annulus sides on different models")
        if (self.minus.mask & self.plus.mask).any():
            raise ValueError("annulus sides must be disjoint")
        if (self.minus.mask | self.plus.mask).all():
            raise ValueError("annulus must leave a nonempty gap")

    @property
    def model(self) -> BoundaryModel:
        return self.minus.model

    def __neg__(self) -> "Annulus":
        return Annulus(self.plus, self.minus)

    def __eq__(self, other) -> bool:
        return isinstance(other, Annulus) and self.minus == other.minus and self.plus == other.plus

    def __hash__(self) -> int:
        return hash((self.minus, self.plus))


def nested(A: Annulus, B: Annulus, model: BoundaryModel | None = None) -> bool:
    """A < B: the outer side of A and the inner side of B cover the model."""
    if A.model != B.model or (model is not None and model != A.model):
        raise ValueError("annuli live on different models")
    return bool((A.plus.mask | B.minus.mask).all())


def below(K: ClosedSet, A: Annulus) -> bool:
    """K < A: K lies inside the inner side of A."""
    return bool((A.minus.mask[K.mask]).all())


def above(A: Annulus, L: ClosedSet) -> bool:
    """A < L, i.e. L < -A."""
    return bool((A.plus.mask[L.mask]).all())


@dataclass
class AnnulusSystem:
    model: BoundaryModel
    annuli: list[Annulus] = field(default_factory=list)
    symmetric: bool = False

    def __post_init__(self):
        for a in self.annuli:
            if a.model != self.model:
                raise ValueError("annulus on a different model")
        if self.symmetric:
            have = set(self.annuli)
            for a in list(self.annuli):
                if -a not in have:
                    raise ValueError("system marked symmetric is not closed under negation")
        self._stack()

    def _stack(self) -> None:
        P = len(self.model)
        self.minus = np.array([a.minus.mask for a in self.annuli], dtype=bool).reshape(len(self.annuli), P)
        self.plus = np.array([a.plus.mask for a in self.annuli], dtype=bool).reshape(len(self.annuli), P)

    def __len__(self) -> int:
        return len(self.annuli)

    def subsystem(self, keep: Iterable[int]) -> "AnnulusSystem":
        return AnnulusSystem(self.model, [self.annuli[i] for i in sorted(set(keep))], False)

    def to_json(self) -> dict:
        fmt = lambda s: ["".join(_letter_name(x) for x in w) for w in s.points]
        return {
            "depth": self.model.depth,
            "rank": self.model.rank,
            "symmetric": self.symmetric,
            "annuli": [{"minus": fmt(a.minus), "plus": fmt(a.plus)} for a in self.annuli],
        }


def _letter_name(x: int) -> str:
    c = "abcdefghijklmnopqrstuvwxyz"[abs(x) - 1]
    return c if x > 0 else c.upper()


def shadow_annuli(ball: CayleyBall, model: BoundaryModel, radii: Sequence[int]) -> AnnulusSystem:
    """Annuli from shadows of balls seen from the identity.

    For a vertex v and radius r the inner side holds the rays through
    B_r(v) and the outer side the rays avoiding B_{r+1}(v).  Pairs the model
    depth cannot resolve (|v| - r > depth) are skipped, as are degenerate
    ones; duplicates are merged and the system is closed under negation.
    """
    radii = list(radii)
    if radii != sorted(set(radii)):
        raise ValueError("radii must be strictly increasing")
    if radii and radii[-1] >= ball.radius:
        raise ValueError("radii must stay below the ball radius")
    if ball.presentation.kind != "free" or ball.presentation.rank != model.rank:
        raise ValueError("shadows need a free-group ball of the model's rank")
    out: list[Annulus] = []
    seen: set[Annulus] = set()
    cache: dict[Word, np.ndarray] = {}
    for r in radii:
        for v in ball.words:
            if len(v) - r > model.depth:
                continue
            lcp = cache.get(v)
            if lcp is None:
                lcp = model.lcp_with(v)
                cache[v] = lcp
            gap = len(v) - lcp
            inner, outer = gap <= r, gap > r + 1
            if not inner.any() or not outer.any():
                continue
            a = Annulus(ClosedSet(model, inner), ClosedSet(model, outer))
            for b in (a, -a):
                if b not in seen:
                    seen.add(b)
                    out.append(b)
    return AnnulusSystem(model, out, True)


@dataclass(frozen=True)
class Chain:
    length: int
    annuli: tuple[int, ...]


def cross_ratio_chain(K: ClosedSet, L: ClosedSet, sys: AnnulusSystem) -> Chain:
    """Longest chain K < A_1 < ... < A_n < L, with the annulus indices."""
    if len(sys) == 0:
        return Chain(0, ())
    # every chain member separates K from L, so filter first
    sep = np.flatnonzero(sys.minus[:, K.mask].all(axis=1) & sys.plus[:, L.mask].all(axis=1))
    if sep.size == 0:
        return Chain(0, ())
    # A < B forces |A-| < |B-|, so increasing size is a topological order
    sizes = sys.minus[sep].sum(axis=1)
    order = sep[np.lexsort((sep, sizes))]
    comp_plus = ~sys.plus[order]
    mins = sys.minus[order]
    # nest[i, j]: order[i] < order[j]  iff  no point outside both A+ and B-
    nest = (comp_plus.astype(np.int32) @ (~mins).astype(np.int32).T) == 0
    best = np.ones(order.size, dtype=np.int64)
    prev = np.full(order.size, -1, dtype=np.int64)
    for j in range(order.size):
        cand = np.flatnonzero(nest[:j, j])
        if cand.size:
            i = cand[np.argmax(best[cand])]
            best[j], prev[j] = best[i] + 1, i
    j = int(np.argmax(best))
    chain = []
    while j >= 0:
        chain.append(int(order[j]))
        j = int(prev[j])
    chain.reverse()
    return Chain(int(best.max()), tuple(chain))


def cross_ratio(K: ClosedSet, L: ClosedSet, sys: AnnulusSystem) -> int:
    return cross_ratio_chain(K, L, sys).length


def verify_chain(K: ClosedSet, L: ClosedSet, chain: Chain, sys: AnnulusSystem) -> bool:
    """Re-check a chain certificate annulus by annulus."""
    if chain.length != len(chain.annuli):
        return False
    if not chain.annuli:
        return True
    a = [sys.annuli[i] for i in chain.annuli]
    if not below(K, a[0]) or not above(a[-1], L):
        return False
    return all(nested(x, y) for x, y in zip(a, a[1:]))


# ------------------------------------------------------------- comparison


@dataclass
class CrossRatioEnvelope:
    a: Fraction
    b: Fraction
    max_residual: int
    degenerate: bool
    samples: list[tuple[int, int]]

    def to_json(self) -> dict:
        return {
            "a": {"num": self.a.numerator, "den": self.a.denominator},
            "b": {"num": self.b.numerator, "den": self.b.denominator},
            "maxResidual": self.max_residual,
            "degenerate": self.degenerate,
            "samples": [list(s) for s in self.samples],
        }


A_CANDIDATES = (Fraction(1), Fraction(5, 4), Fraction(4, 3), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(4))


def compare_crossratio_distance(
    sys: AnnulusSystem,
    pairs: Sequence[tuple[ClosedSet, ClosedSet]],
    distance: Callable[[ClosedSet, ClosedSet], int],
    candidates: Sequence[Fraction] = A_CANDIDATES,
) -> CrossRatioEnvelope:
    """Smallest (a, b) with cr <= a d + b and d <= a cr + b over the pairs.

    ``a`` is chosen from ``candidates`` minimising a + b (smaller a on ties).
    A system giving cross-ratio 0 on every pair is flagged degenerate.
    """
    samples = [(cross_ratio(K, L, sys), int(distance(K, L))) for K, L in pairs]
    best = None
    for a in candidates:
        b = Fraction(0)
        for cr, d in samples:
            b = max(b, cr - a * d, d - a * cr)
        key = (a + b, a)
        if best is None or key < best[0]:
            best = (key, a, b)
    _, a, b = best
    resid = max((abs(cr - d) for cr, d in samples), default=0)
    degenerate = all(cr == 0 for cr, _ in samples)
    return CrossRatioEnvelope(a, b, resid, degenerate, samples)


@dataclass
class FourPointReport:
    quadruples: int
    at_least_two_zero: int
    witness: tuple[Word, Word, Word, Word] | None


def four_point_zeros(sys: AnnulusSystem, sample: int = 200, seed: int = 0) -> FourPointReport:
    """How often at least two of (xy|zw), (xz|yw), (xw|zy) vanish.

    Measured only; the first quadruple where fewer than two vanish is kept.
    """
    model = sys.model
    rng = random.Random(seed)
    n = len(model)
    good, witness = 0, None
    for _ in range(sample):
        x, y, z, w = rng.sample(range(n), 4)
        pts = [model.points[i] for i in (x, y, z, w)]
        vals = []
        for (p, q), (r, s) in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (2, 1))):
            K = model.set_of([pts[p], pts[q]])
            L = model.set_of([pts[r], pts[s]])
            vals.append(cross_ratio(K, L, sys))
        if sum(v == 0 for v in vals) >= 2:
            good += 1
        elif witness is None:
            witness = tuple(pts)
    return FourPointReport(sample, good, witness)
