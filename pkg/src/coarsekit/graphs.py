"""Finite unit-length metric graphs with cached breadth-first distances."""
from __future__ import annotations

from collections import OrderedDict
from typing import Hashable, Iterable, Sequence

import numpy as np

UNREACHED = -1


class MetricGraph:
    """Undirected graph, edge length 1, vertices ``0..n-1`` in canonical order.

    ``names`` holds one hashable label per vertex (words for Cayley balls,
    coordinates for grids).  Distances are computed on demand by BFS over a
    padded neighbour table and memoised per source.
    """

    cache_size = 4096

    def __init__(self, names: Sequence[Hashable], edges: Iterable[tuple[int, int]]):
        self.names = list(names)
        self.index = {name: i for i, name in enumerate(self.names)}
        if len(self.index) != len(self.names):
            raise ValueError("vertex names must be distinct")
        n = len(self.names)
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        width = max((len(a) for a in adj), default=0)
        table = np.full((n, max(width, 1)), -1, dtype=np.int64)
        for u, a in enumerate(adj):
            table[u, : len(a)] = sorted(a)
        self.neighbors = table
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()

    def __len__(self) -> int:
        return len(self.names)

    @property
    def n(self) -> int:
        return len(self.names)

    def vertex(self, x) -> int:
        """Index of ``x``, which may be an index or a vertex name."""
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            if not 0 <= x < self.n:
                raise KeyError(f"vertex index {x} out of range")
            return int(x)
        try:
            return self.index[x]
        except KeyError:
            raise KeyError(f"vertex {x!r} not in graph") from None

    def edge_list(self) -> list[tuple[int, int]]:
        out = []
        for u in range(self.n):
            for v in self.neighbors[u]:
                if v > u:
                    out.append((u, int(v)))
        return out

    def bfs(self, sources: Iterable[int]) -> np.ndarray:
        dist = np.full(self.n, UNREACHED, dtype=np.int64)
        frontier = np.unique(np.fromiter((self.vertex(s) for s in sources), dtype=np.int64))
        if frontier.size == 0:
            raise ValueError("empty source set")
        dist[frontier] = 0
        level = 0
        while frontier.size:
            level += 1
            nb = self.neighbors[frontier].ravel()
            nb = nb[nb >= 0]
            nb = np.unique(nb[dist[nb] == UNREACHED])
            dist[nb] = level
            frontier = nb
        return dist

    def distances_from(self, x) -> np.ndarray:
        i = self.vertex(x)
        row = self._rows.get(i)
        if row is None:
            row = self._compute_row(i)
            row.setflags(write=False)
            self._rows[i] = row
            if len(self._rows) > self.cache_size:
                self._rows.popitem(last=False)
        else:
            self._rows.move_to_end(i)
        return row

    def _compute_row(self, i: int) -> np.ndarray:
        return self.bfs([i])

    def distances_from_set(self, vertices: Iterable) -> np.ndarray:
        return self.bfs(vertices)

    def distance(self, x, y) -> int:
        d = int(self.distances_from(x)[self.vertex(y)])
        if d == UNREACHED:
            raise ValueError("vertices lie in different components")
        return d

    def distance_matrix(self, rows: Sequence[int], cols: Sequence[int] | None = None) -> np.ndarray:
        cols_arr = np.asarray(rows if cols is None else cols, dtype=np.int64)
        return np.stack([self.distances_from(int(r))[cols_arr] for r in rows]) if len(rows) else np.zeros((0, cols_arr.size), dtype=np.int64)

    def pair_distances(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Distances between two small vertex sets; subclasses may shortcut."""
        return self.distance_matrix(list(rows), cols)

    def all_pairs(self) -> np.ndarray:
        return np.stack([self._compute_row(i) for i in range(self.n)])

    def neighborhood(self, vertices: Iterable, k: int) -> np.ndarray:
        """Boolean mask of vertices within distance ``k`` of the given set."""
        d = self.distances_from_set(vertices)
        return (d >= 0) & (d <= k)

    def diameter_of(self, vertices: Sequence[int]) -> int:
        vs = np.asarray(sorted(set(int(v) for v in vertices)), dtype=np.int64)
        if vs.size <= 1:
            return 0
        return int(self.distance_matrix(list(vs), vs).max())


def grid_graph(radius: int) -> MetricGraph:
    """The square grid ``[-radius, radius]^2`` with names ``(x, y)``.

    Vertices are ordered by ``(x, y)`` lexicographically.
    """
    coords = [(x, y) for x in range(-radius, radius + 1) for y in range(-radius, radius + 1)]
    idx = {c: i for i, c in enumerate(coords)}
    edges = []
    for (x, y), i in idx.items():
        for c in ((x + 1, y), (x, y + 1)):
            j = idx.get(c)
            if j is not None:
                edges.append((i, j))
    return MetricGraph(coords, edges)
