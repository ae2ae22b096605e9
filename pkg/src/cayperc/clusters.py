"""Windows, site configurations and union-find connectivity.

Site convention: ``A <-> B`` needs an open vertex of ``A`` and an open vertex
of ``B`` in the same open cluster, so a closed vertex connects nothing even
when it lies in both sets. The batch kernels are compiled with numba and
release the GIL.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numba
import numpy as np

from .cayley import CayleyBall
from .groups import FreeAbelian, GeneratorSet, to_vector

__all__ = [
    "Window",
    "PercConfig",
    "UnionFind",
    "as_mask",
    "bfs_connected",
    "connected_batch",
    "cluster_labels",
    "closed_pivotal_batch",
    "pivotal_set",
    "pivotal_bruteforce",
    "minimax_thresholds",
]


# --------------------------------------------------------------------------
# windows


@dataclass(eq=False)
class Window:
    """Finite vertex set with padded adjacency (``-1`` = neighbor outside).

    ``shell`` plays the role of the complement of ``Lambda``: the vertices
    with a neighbor outside the window (the outer sphere for balls, the faces
    for boxes). Boxes also carry the two faces orthogonal to the first axis.
    """

    name: str
    neighbors: np.ndarray
    origin: int
    shell: np.ndarray
    dist: np.ndarray
    ball: CayleyBall | None = None
    coords: np.ndarray | None = None
    faces: tuple | None = None
    half_width: int | None = None

    @property
    def size(self) -> int:
        return len(self.neighbors)

    @property
    def degree(self) -> int:
        return self.neighbors.shape[1]

    @property
    def interior(self) -> np.ndarray:
        return ~self.shell

    @classmethod
    def from_ball(cls, ball: CayleyBall) -> "Window":
        return cls(f"{ball.model.name} ball R={ball.radius}", ball.neighbors, ball.origin,
                   ball.dist == ball.radius, ball.dist, ball=ball)

    @classmethod
    def box(cls, gens: GeneratorSet, half_width: int) -> "Window":
        """``{-L..L}^d`` in a free abelian group with the given generators."""
        model = gens.model
        if not isinstance(model, FreeAbelian):
            raise TypeError("box windows need a free abelian group")
        if half_width < 1:
            raise ValueError("half_width must be >= 1")
        d, L = model.d, half_width
        side = 2 * L + 1
        grids = np.meshgrid(*[np.arange(-L, L + 1)] * d, indexing="ij")
        coords = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
        gvec = np.array([to_vector(model, g) for g in gens.elements], dtype=np.int64)
        nb = coords[:, None, :] + gvec[None, :, :]
        ok = np.all(np.abs(nb) <= L, axis=2)
        flat = np.zeros(nb.shape[:2], dtype=np.int64)
        for c in range(d):
            flat = flat * side + (np.clip(nb[:, :, c], -L, L) + L)
        neighbors = np.where(ok, flat, -1)
        origin = int(np.flatnonzero(np.all(coords == 0, axis=1))[0])
        shell = (neighbors < 0).any(axis=1)
        faces = (coords[:, 0] == -L, coords[:, 0] == L)
        dist = _bfs_dist(neighbors, origin)
        return cls(f"{model.name} box L={L}", neighbors, origin, shell, dist, coords=coords, faces=faces,
                   half_width=L)


def _bfs_dist(neighbors: np.ndarray, origin: int) -> np.ndarray:
    dist = np.full(len(neighbors), -1, dtype=np.int64)
    dist[origin] = 0
    frontier = np.array([origin])
    d = 0
    while len(frontier):
        d += 1
        nb = neighbors[frontier].ravel()
        nb = np.unique(nb[nb >= 0])
        nb = nb[dist[nb] < 0]
        dist[nb] = d
        frontier = nb
    return dist


def as_mask(window: Window, vertices) -> np.ndarray:
    """Boolean mask from a mask, an index collection or ``None`` (empty)."""
    m = np.zeros(window.size, dtype=bool)
    if vertices is None:
        return m
    arr = np.asarray(vertices)
    if arr.dtype == bool:
        if arr.shape != (window.size,):
            raise ValueError("mask has the wrong length")
        return arr.copy()
    m[arr.astype(np.int64).ravel()] = True
    return m


# --------------------------------------------------------------------------
# union-find


class UnionFind:
    """Disjoint sets with union by size and path halving."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return int(x)

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


@numba.njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@numba.njit(cache=True, nogil=True)
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return ra
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return ra


@numba.njit(cache=True, nogil=True)
def _roots(open_, nbrs, parent, size):
    V, D = nbrs.shape
    for v in range(V):
        parent[v] = v
        size[v] = 1
    for v in range(V):
        if not open_[v]:
            continue
        for j in range(D):
            w = nbrs[v, j]
            if w > v and open_[w]:
                _union(parent, size, v, w)
    for v in range(V):
        parent[v] = _find(parent, v)


@numba.njit(cache=True, nogil=True)
def _connected_one(open_, nbrs, A, B, parent, size, touch):
    V = nbrs.shape[0]
    _roots(open_, nbrs, parent, size)
    for v in range(V):
        touch[v] = False
    for v in range(V):
        if open_[v] and A[v]:
            touch[parent[v]] = True
    for v in range(V):
        if open_[v] and B[v] and touch[parent[v]]:
            return True
    return False


@numba.njit(cache=True, nogil=True)
def _connected_batch(opens, nbrs, A, B, out):
    S, V = opens.shape
    parent = np.empty(V, np.int64)
    size = np.empty(V, np.int64)
    touch = np.empty(V, np.bool_)
    for s in range(S):
        out[s] = _connected_one(opens[s], nbrs, A, B, parent, size, touch)


@numba.njit(cache=True, nogil=True)
def _closed_pivotal_one(open_, nbrs, A, B, parent, size, ta, tb, piv):
    """Mark closed pivotal vertices; returns the connection indicator."""
    V, D = nbrs.shape
    _roots(open_, nbrs, parent, size)
    for v in range(V):
        ta[v] = False
        tb[v] = False
        piv[v] = False
    for v in range(V):
        if open_[v]:
            if A[v]:
                ta[parent[v]] = True
            if B[v]:
                tb[parent[v]] = True
    for v in range(V):
        if open_[v] and ta[parent[v]] and tb[parent[v]]:
            return True
    for x in range(V):
        if open_[x]:
            continue
        ca = A[x]
        cb = B[x]
        for j in range(D):
            w = nbrs[x, j]
            if w >= 0 and open_[w]:
                r = parent[w]
                if ta[r]:
                    ca = True
                if tb[r]:
                    cb = True
        piv[x] = ca and cb
    return False


@numba.njit(cache=True, nogil=True)
def _closed_pivotal_batch(opens, nbrs, A, B, counts, connected, marks):
    S, V = opens.shape
    parent = np.empty(V, np.int64)
    size = np.empty(V, np.int64)
    ta = np.empty(V, np.bool_)
    tb = np.empty(V, np.bool_)
    piv = np.empty(V, np.bool_)
    keep = marks.shape[0] == S
    for s in range(S):
        connected[s] = _closed_pivotal_one(opens[s], nbrs, A, B, parent, size, ta, tb, piv)
        c = 0
        for v in range(V):
            if piv[v]:
                c += 1
            if keep:
                marks[s, v] = piv[v]
        counts[s] = c


@numba.njit(cache=True, nogil=True)
def _minimax_batch(U, nbrs, src, dst, out):
    """Least ``p`` at which ``{U < p}`` connects ``src`` to ``dst`` (Newman-Ziff order)."""
    S, V = U.shape
    D = nbrs.shape[1]
    parent = np.empty(V + 2, np.int64)
    size = np.empty(V + 2, np.int64)
    active = np.empty(V, np.bool_)
    SRC = V
    DST = V + 1
    for s in range(S):
        for v in range(V + 2):
            parent[v] = v
            size[v] = 1
        for v in range(V):
            active[v] = False
        order = np.argsort(U[s])
        out[s] = np.inf
        for i in range(V):
            v = order[i]
            active[v] = True
            if src[v]:
                _union(parent, size, v, SRC)
            if dst[v]:
                _union(parent, size, v, DST)
            for j in range(D):
                w = nbrs[v, j]
                if w >= 0 and active[w]:
                    _union(parent, size, v, w)
            if _find(parent, SRC) == _find(parent, DST):
                out[s] = U[s, v]
                break


def connected_batch(opens: np.ndarray, neighbors: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``A <-> B`` indicator for each row of a boolean ``(samples, V)`` array."""
    opens = np.ascontiguousarray(np.atleast_2d(opens), dtype=np.bool_)
    out = np.empty(len(opens), dtype=np.bool_)
    _connected_batch(opens, np.ascontiguousarray(neighbors), A.astype(np.bool_), B.astype(np.bool_), out)
    return out


def closed_pivotal_batch(opens: np.ndarray, neighbors: np.ndarray, A: np.ndarray, B: np.ndarray,
                         keep_marks: bool = False):
    """Per-row closed-pivotal counts and connection indicators (and marks)."""
    opens = np.ascontiguousarray(np.atleast_2d(opens), dtype=np.bool_)
    S, V = opens.shape
    counts = np.empty(S, dtype=np.int64)
    conn = np.empty(S, dtype=np.bool_)
    marks = np.empty((S, V) if keep_marks else (0, V), dtype=np.bool_)
    _closed_pivotal_batch(opens, np.ascontiguousarray(neighbors), A.astype(np.bool_), B.astype(np.bool_),
                          counts, conn, marks)
    return (counts, conn, marks) if keep_marks else (counts, conn)


def minimax_thresholds(U: np.ndarray, neighbors: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Per-row crossing thresholds; ``inf`` when even all-open does not connect."""
    U = np.ascontiguousarray(np.atleast_2d(U), dtype=np.float64)
    out = np.empty(len(U))
    _minimax_batch(U, np.ascontiguousarray(neighbors), src.astype(np.bool_), dst.astype(np.bool_), out)
    return out


def cluster_labels(open_: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    """Root index of each open vertex's cluster, ``-1`` for closed vertices."""
    V = len(open_)
    parent = np.empty(V, np.int64)
    size = np.empty(V, np.int64)
    _roots(np.ascontiguousarray(open_, dtype=np.bool_), np.ascontiguousarray(neighbors), parent, size)
    return np.where(open_, parent, -1)


def bfs_connected(open_: np.ndarray, neighbors: np.ndarray, A: np.ndarray, B: np.ndarray) -> bool:
    """Breadth-first reference implementation of ``A <-> B``."""
    seen = np.zeros(len(open_), dtype=bool)
    q = deque(int(v) for v in np.flatnonzero(open_ & A))
    seen[list(q)] = True
    while q:
        v = q.popleft()
        if B[v]:
            return True
        for w in neighbors[v]:
            if w >= 0 and open_[w] and not seen[w]:
                seen[w] = True
                q.append(int(w))
    return False


# --------------------------------------------------------------------------
# configurations


@dataclass(eq=False)
class PercConfig:
    """Open/closed bits on a window with optional provenance.

    ``provenance`` is a bit mask per vertex: bit 0 for the Bernoulli layer,
    bit ``k`` for the field of scale ``k``. Nonzero provenance implies open.
    """

    window: Window
    open: np.ndarray
    provenance: np.ndarray | None = None
    _labels: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.open = np.asarray(self.open, dtype=bool)
        if self.open.shape != (self.window.size,):
            raise ValueError("open bits do not match the window size")
        if self.provenance is not None and np.any((self.provenance != 0) & ~self.open):
            raise ValueError("provenance recorded on a closed vertex")

    @property
    def density(self) -> float:
        return float(self.open.mean())

    def labels(self) -> np.ndarray:
        if self._labels is None:
            self._labels = cluster_labels(self.open, self.window.neighbors)
        return self._labels

    def connected(self, A, B) -> bool:
        A = as_mask(self.window, A)
        B = as_mask(self.window, B)
        lab = self.labels()
        a = set(lab[A & self.open].tolist())
        return bool(a.intersection(lab[B & self.open].tolist()))

    def clusters_and_connectivity(self, A, B) -> tuple[np.ndarray, bool]:
        return self.labels(), self.connected(A, B)

    def opened_by(self, layer: int) -> np.ndarray:
        if self.provenance is None:
            raise ValueError("configuration has no provenance")
        return (self.provenance >> np.uint64(layer)) & np.uint64(1) == 1


def pivotal_set(config: PercConfig, A, B) -> tuple[np.ndarray, np.ndarray]:
    """``(closed pivotal, open pivotal)`` masks for the event ``A <-> B``.

    Closed pivotals come from the cluster structure: a closed ``x`` is pivotal
    iff the event fails and ``x`` touches (or belongs to) both an ``A``-side
    and a ``B``-side. Open pivotals are found by closing each open vertex and
    recomputing.
    """
    w = config.window
    A = as_mask(w, A)
    B = as_mask(w, B)
    counts, conn, marks = closed_pivotal_batch(config.open[None, :], w.neighbors, A, B, keep_marks=True)
    closed = marks[0]
    open_piv = np.zeros(w.size, dtype=bool)
    if conn[0]:
        cand = np.flatnonzero(config.open)
        trial = np.repeat(config.open[None, :], len(cand), axis=0)
        trial[np.arange(len(cand)), cand] = False
        still = connected_batch(trial, w.neighbors, A, B)
        open_piv[cand[~still]] = True
    return closed, open_piv


def pivotal_bruteforce(config: PercConfig, A, B) -> tuple[np.ndarray, np.ndarray]:
    """Definition-level pivotality: flip each vertex and recompute by BFS."""
    w = config.window
    A = as_mask(w, A)
    B = as_mask(w, B)
    base = bfs_connected(config.open, w.neighbors, A, B)
    closed = np.zeros(w.size, dtype=bool)
    opened = np.zeros(w.size, dtype=bool)
    for x in range(w.size):
        up = config.open.copy()
        up[x] = True
        down = config.open.copy()
        down[x] = False
        piv = bfs_connected(up, w.neighbors, A, B) and not bfs_connected(down, w.neighbors, A, B)
        if piv:
            if base:
                opened[x] = True
            else:
                closed[x] = True
    return closed, opened
