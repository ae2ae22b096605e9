"""Balls, boundaries and growth of Cayley graphs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .groups import GeneratorSet, GroupModel, MinimalityVerdict, from_vector, to_vector

__all__ = [
    "BallSizeError",
    "CertificationError",
    "CayleyBall",
    "build_ball",
    "boundaries",
    "GrowthCounter",
    "RadiusFunctions",
    "radius_functions",
    "symmetric_subsets",
    "GrowthReport",
    "growth_constants",
    "check_growth_lower",
]

MAX_BALL_VERTICES = 4_000_000
MAX_SUBSET_DEGREE = 16


class BallSizeError(MemoryError):
    """Ball enumeration would exceed the vertex budget."""

    def __init__(self, radius: int, size: int, budget: int):
        super().__init__(f"ball of radius {radius} exceeds the budget of {budget} vertices (reached {size})")
        self.radius = radius
        self.size = size
        self.budget = budget


class CertificationError(ValueError):
    """A quantity cannot be certified exact on the given ball."""


@dataclass(eq=False)
class CayleyBall:
    """The ball ``B(o, R)`` with BFS indexing.

    ``neighbors[v, j]`` is the index of ``v * gens[j]`` or ``-1`` when that
    element lies outside the ball (only possible on the outer shell).
    """

    model: GroupModel
    gens: GeneratorSet
    radius: int
    elements: list
    index: dict
    neighbors: np.ndarray
    dist: np.ndarray
    origin: int = 0
    _codes: list | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def degree(self) -> int:
        return self.gens.degree

    @property
    def shell_mask(self) -> np.ndarray:
        return self.dist == self.radius

    @property
    def interior_mask(self) -> np.ndarray:
        return self.dist < self.radius

    def locate(self, g) -> int:
        return self.index.get(g, -1)

    def codes(self) -> list[bytes]:
        if self._codes is None:
            self._codes = [self.model.code(g) for g in self.elements]
        return self._codes

    def growth(self) -> np.ndarray:
        """``|B(o, n)|`` for ``n = 0..radius``."""
        return np.cumsum(np.bincount(self.dist, minlength=self.radius + 1))

    def vectors(self) -> np.ndarray:
        """Integer-vector encoding of all elements (vectorizable models)."""
        return np.array([to_vector(self.model, g) for g in self.elements], dtype=np.int64)

    def sub_ball(self, radius: int) -> "CayleyBall":
        """Restriction to ``B(o, radius)``; BFS order makes it a prefix."""
        if radius > self.radius:
            raise ValueError("sub_ball radius exceeds the ball radius")
        n = int(np.searchsorted(self.dist, radius, side="right"))
        nb = self.neighbors[:n].copy()
        nb[nb >= n] = -1
        elements = self.elements[:n]
        return CayleyBall(self.model, self.gens, radius, elements, {g: i for i, g in enumerate(elements)},
                          nb, self.dist[:n].copy())


def build_ball(model: GroupModel, gens: GeneratorSet, radius: int,
               max_vertices: int = MAX_BALL_VERTICES) -> CayleyBall:
    """Breadth-first enumeration of ``B(o, radius)``.

    Vertices are indexed in discovery order, scanning the frontier in index
    order and the generators in their stored order.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if gens.model != model:
        raise TypeError("generator set belongs to a different model")
    if model.vector_width is not None:
        return _build_ball_vectorized(model, gens, radius, max_vertices)
    e = model.identity()
    elements = [e]
    index = {e: 0}
    dist = [0]
    D = gens.degree
    nbrs = []
    head = 0
    while head < len(elements):
        x = elements[head]
        dx = dist[head]
        row = []
        for g in gens.elements:
            y = model.mul(x, g)
            j = index.get(y)
            if j is None:
                if dx < radius:
                    j = len(elements)
                    index[y] = j
                    elements.append(y)
                    dist.append(dx + 1)
                    if j >= max_vertices:
                        raise BallSizeError(dx + 1, j + 1, max_vertices)
                else:
                    j = -1
            row.append(j)
        nbrs.append(row)
        head += 1
    neighbors = np.array(nbrs, dtype=np.int64).reshape(len(elements), D)
    return CayleyBall(model, gens, radius, elements, index, neighbors, np.array(dist, dtype=np.int64))


def _pack(vecs: np.ndarray, lo: np.ndarray, base: np.ndarray) -> np.ndarray:
    keys = np.zeros(len(vecs), dtype=np.int64)
    for c in range(vecs.shape[1]):
        keys = keys * base[c] + (vecs[:, c] - lo[c])
    return keys


def _bounds(*arrays):
    lo = np.min([a.min(axis=0) for a in arrays if len(a)], axis=0)
    hi = np.max([a.max(axis=0) for a in arrays if len(a)], axis=0)
    base = hi - lo + 1
    if np.sum(np.log2(base.astype(float))) > 62:
        raise OverflowError("coordinate range too large for 64-bit packing")
    return lo, base


def _build_ball_vectorized(model, gens, radius, max_vertices):
    w = model.vector_width
    gvec = np.array([to_vector(model, g) for g in gens.elements], dtype=np.int64).reshape(-1, w)
    D = len(gvec)
    layers = [np.zeros((1, w), dtype=np.int64)]
    allv = layers[0]
    frontier = layers[0]
    for r in range(1, radius + 1):
        cand = model.batch_mul(np.repeat(frontier, D, axis=0), np.tile(gvec, (len(frontier), 1)))
        lo, base = _bounds(allv, cand)
        ck = _pack(cand, lo, base)
        seen = np.sort(_pack(allv, lo, base))
        uk, first = np.unique(ck, return_index=True)
        pos = np.searchsorted(seen, uk)
        pos[pos == len(seen)] = 0
        fresh = seen[pos] != uk
        order = np.sort(first[fresh])
        frontier = cand[order]
        if len(frontier) == 0:
            break
        allv = np.concatenate([allv, frontier])
        layers.append(frontier)
        if len(allv) > max_vertices:
            raise BallSizeError(r, len(allv), max_vertices)
    dist = np.concatenate([np.full(len(l), i, dtype=np.int64) for i, l in enumerate(layers)])
    V = len(allv)
    prod = model.batch_mul(np.repeat(allv, D, axis=0), np.tile(gvec, (V, 1)))
    lo, base = _bounds(allv, prod)
    keys = _pack(allv, lo, base)
    order = np.argsort(keys)
    sk = keys[order]
    pk = _pack(prod, lo, base)
    pos = np.searchsorted(sk, pk)
    pos[pos == V] = 0
    hit = sk[pos] == pk
    neighbors = np.where(hit, order[pos], -1).reshape(V, D)
    elements = [from_vector(model, v) for v in allv.tolist()]
    index = {g: i for i, g in enumerate(elements)}
    return CayleyBall(model, gens, radius, elements, index, neighbors, dist)


def boundaries(ball: CayleyBall, K: Iterable[int]) -> tuple[int, int]:
    """Exact ``(|vertex boundary|, |edge boundary|)`` of a vertex set.

    Every vertex of ``K`` must lie strictly inside the ball so that all of
    its neighbors are known.
    """
    K = np.unique(np.fromiter(K, dtype=np.int64))
    if len(K) == 0:
        return 0, 0
    if np.any(ball.dist[K] >= ball.radius):
        raise CertificationError("set touches the outer shell of the ball; boundaries not certified")
    inside = np.zeros(ball.size, dtype=bool)
    inside[K] = True
    out = ~inside[ball.neighbors[K]]
    return int(np.count_nonzero(out.any(axis=1))), int(np.count_nonzero(out))


# --------------------------------------------------------------------------
# growth and radius functions


class GrowthCounter:
    """Lazily grown ball sizes ``|B_H(o, n)|`` for ``H`` generated by a subset."""

    def __init__(self, model: GroupModel, elements: Sequence[tuple]):
        self.model = model
        self.elements = list(elements)
        e = model.identity()
        self._seen = {e}
        self._frontier = [e]
        self.sizes = [1]

    @property
    def finite(self) -> bool:
        return not self._frontier

    def _grow(self):
        new = []
        for x in self._frontier:
            for g in self.elements:
                y = self.model.mul(x, g)
                if y not in self._seen:
                    self._seen.add(y)
                    new.append(y)
        self._frontier = new
        self.sizes.append(len(self._seen))

    def size(self, n: int) -> int:
        while len(self.sizes) <= n:
            if not self._frontier:
                return self.sizes[-1]
            self._grow()
        return self.sizes[n]

    def first_reaching(self, m: float, horizon: int) -> float:
        """Least ``n >= 1`` with ``|B_H(o, n)| >= m``; ``inf`` if none up to ``horizon``."""
        for n in range(1, horizon + 1):
            if self.size(n) >= m:
                return n
            if self.finite:
                return math.inf
        return math.inf


def symmetric_subsets(gens: GeneratorSet) -> list[tuple[int, ...]]:
    """Symmetric subsets ``S'`` with ``|S'| >= D/2`` (unions of inverse classes)."""
    D = gens.degree
    if D > MAX_SUBSET_DEGREE:
        raise CertificationError(f"sub-generating set enumeration is capped at D <= {MAX_SUBSET_DEGREE}, got {D}")
    classes = gens.pair_classes()
    out = []
    for r in range(1, len(classes) + 1):
        for combo in itertools.combinations(classes, r):
            idx = tuple(sorted(i for c in combo for i in c))
            if 2 * len(idx) >= D:
                out.append(idx)
    return out


class RadiusFunctions:
    """``R(m)`` from the growth of ``S`` and ``Rbar(m)`` from its large symmetric subsets.

    ``Rbar(m) = max over S' of R_{S'}(m)``, which equals the least ``n`` with
    ``min_{S'} |B_{S'}(o, n)| >= m``; each subset ball is grown only as far as
    the queried ``m`` requires.
    """

    def __init__(self, gens: GeneratorSet, horizon: int):
        if horizon < 1:
            raise ValueError("horizon must be at least 1")
        self.gens = gens
        self.horizon = horizon
        model = gens.model
        self.full = GrowthCounter(model, gens.elements)
        self.subsets = symmetric_subsets(gens)
        self.counters = [GrowthCounter(model, [gens.elements[i] for i in s]) for s in self.subsets]

    def R(self, m: float) -> float:
        if m < 1:
            raise ValueError("m must be >= 1")
        return self.full.first_reaching(m, self.horizon)

    def Rbar(self, m: float) -> float:
        if m < 1:
            raise ValueError("m must be >= 1")
        return max(c.first_reaching(m, self.horizon) for c in self.counters)

    def script_B(self, n: int) -> int:
        """``min_{S'} |B_{S'}(o, n)|``."""
        return min(c.size(n) for c in self.counters)

    def minimizing_subset(self, n: int) -> tuple[int, ...]:
        sizes = [c.size(n) for c in self.counters]
        return self.subsets[int(np.argmin(sizes))]


def radius_functions(gens: GeneratorSet, m: float, horizon: int) -> tuple[float, float]:
    """``(R(m), Rbar(m))``; entries are ``math.inf`` when not reached within ``horizon``."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    rf = RadiusFunctions(gens, horizon)
    return rf.R(m), rf.Rbar(m)


# --------------------------------------------------------------------------
# growth lower bound for minimal generating sets


def growth_constants(n_max: int) -> list[Fraction]:
    """``[c_1, ..., c_{n_max}]`` with ``t_1 = 1``, ``t_{n+1} = t_n/(4n+4)``,
    ``c_n = min(t_n, (4n)^-n)``."""
    out = []
    t = Fraction(1)
    for n in range(1, n_max + 1):
        if n > 1:
            t = t / (4 * (n - 1) + 4)
        out.append(min(t, Fraction(1, (4 * n) ** n)))
    return out


@dataclass
class GrowthReport:
    sizes: list
    cn_values: list
    verdicts: list
    degree: int

    @property
    def passed(self) -> bool:
        return all(self.verdicts)

    def rows(self):
        yield from zip(range(len(self.sizes)), self.sizes, [None] + self.cn_values, self.verdicts)


def check_growth_lower(ball: CayleyBall, n_max: int, verdict: MinimalityVerdict) -> GrowthReport:
    """Compare ``|B(o, n)|`` with ``c_n D^n`` for ``n <= n_max``."""
    if not verdict.certified:
        raise CertificationError(
            f"growth lower bound needs a certified minimal generating set, got {verdict}")
    if n_max > ball.radius:
        raise CertificationError(f"ball radius {ball.radius} < n_max = {n_max}")
    D = ball.degree
    sizes = [int(s) for s in ball.growth()[: n_max + 1]]
    cn = growth_constants(n_max)
    verdicts = [sizes[0] >= 1] + [sizes[n] >= cn[n - 1] * D**n for n in range(1, n_max + 1)]
    return GrowthReport(sizes, cn, verdicts, D)
