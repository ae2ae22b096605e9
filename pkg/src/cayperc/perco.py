"""Bernoulli and hybrid site percolation experiments on windows.

Every estimator draws its randomness from counter-based streams keyed by the
run seed, an experiment tag and a block (or sample) index, so results do not
depend on how the work is split. The event of interest is always
``A <-> Lambda^c`` with ``Lambda^c`` the window shell unless given.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from . import rng as rngmod
from .cayley import CayleyBall, build_ball
from .clusters import (PercConfig, Window, _closed_pivotal_one, as_mask, closed_pivotal_batch, connected_batch,
                       minimax_thresholds)
from .gff import DomainError, density, lambda_n, sample_field, shift_row
from .groups import FreeAbelian, GeneratorSet, quotient_hom
from .kernel import CovarianceBlock, green_blocks, verify_blocks

__all__ = [
    "EventError",
    "NoCrossingError",
    "InterpolationPoint",
    "Bernoulli",
    "Excursion",
    "Hybrid",
    "as_window",
    "event_masks",
    "bernoulli_sample",
    "hybrid_open",
    "hybrid_sample",
    "ConnectionEstimate",
    "connection_prob",
    "RussoLine",
    "RussoReport",
    "russo_check",
    "russo_d1",
    "russo_d2",
    "PcWindowResult",
    "PcEstimate",
    "pc_window",
    "pc_estimate",
    "ComparisonReport",
    "comparison_experiment",
    "QuotientReport",
    "quotient_experiment",
]


class EventError(ValueError):
    """Inconsistent event specification (``A`` not inside ``Lambda``)."""


class NoCrossingError(RuntimeError):
    """The crossing probability never reaches 1/2 on the grid."""


# --------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class InterpolationPoint:
    """``(t, n, lambda)`` with Bernoulli density ``1 - e^{-t}``."""

    t: float
    n: int
    lam: float

    def __post_init__(self):
        if not self.t >= 0:
            raise DomainError(f"t must be >= 0, got {self.t}")
        if self.n >= 1 and self.lam < lambda_n(self.n):
            raise DomainError(f"lambda = {self.lam} is below lambda_{self.n} = {lambda_n(self.n)}")

    @property
    def p(self) -> float:
        return -math.expm1(-self.t)


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    def as_dict(self):
        return {"model": "bernoulli", "p": self.p}


@dataclass(frozen=True)
class Excursion:
    """``{sum_{n <= N} phi^n > h}``."""

    h: float
    N: int

    def as_dict(self):
        return {"model": "excursion", "h": self.h, "N": self.N}


@dataclass(frozen=True)
class Hybrid:
    """Bernoulli ``1 - e^{-t}`` plus ``{phi^n > lam}`` plus ``{phi^k > lambda_k}``, ``n < k <= N``."""

    t: float
    n: int
    lam: float
    N: int

    def __post_init__(self):
        InterpolationPoint(self.t, self.n, self.lam)
        if self.N < self.n - 1:
            raise ValueError("N must be >= n - 1")

    def as_dict(self):
        return {"model": "hybrid", "t": self.t, "n": self.n, "lambda": self.lam, "N": self.N}


def as_window(w) -> Window:
    return w if isinstance(w, Window) else Window.from_ball(w)


def event_masks(window: Window, A, Lambda=None) -> tuple[np.ndarray, np.ndarray]:
    """``(A, Lambda^c)`` masks; ``Lambda`` defaults to the window interior."""
    A = as_mask(window, A)
    lam = window.interior if Lambda is None else as_mask(window, Lambda)
    if np.any(A & ~lam):
        raise EventError("A must be contained in Lambda")
    return A, ~lam


# --------------------------------------------------------------------------
# sampling


def bernoulli_sample(window, p: float, rng: np.random.Generator) -> PercConfig:
    """I.i.d. open bits with density ``p`` (open iff uniform < p)."""
    w = as_window(window)
    Bernoulli(p)
    return PercConfig(w, rng.random(w.size) < p)


def hybrid_open(t: float, n: int, lam: float, uniforms: np.ndarray, scales: dict, N: int | None = None):
    """Open mask and provenance bits from uniforms and field values.

    Works on vectors or ``(samples, V)`` arrays; ``scales[k]`` holds
    ``phi^k``. Provenance bit 0 is the Bernoulli layer and bit ``k`` the
    scale-``k`` excursion.
    """
    if n >= 1:
        InterpolationPoint(t, n, lam)
    N = max(scales) if N is None and scales else (N or 0)
    p = -math.expm1(-t)
    omega0 = uniforms < p
    prov = omega0.astype(np.uint64)
    for k in range(max(n, 1), N + 1):
        if k not in scales:
            raise ValueError(f"scale {k} missing")
        level = lam if k == n else lambda_n(k)
        prov |= (scales[k] > level).astype(np.uint64) << np.uint64(k)
    return prov != 0, prov


def hybrid_sample(point: InterpolationPoint, scales: dict, rng: np.random.Generator, window=None,
                  N: int | None = None) -> PercConfig:
    """``omega^0 U {phi^n > lambda} U_{n<k<=N} {phi^k > lambda_k}`` with provenance."""
    w = as_window(window) if window is not None else None
    V = len(next(iter(scales.values()))) if scales else (w.size if w is not None else None)
    if V is None:
        raise ValueError("need a window or field values")
    U = rng.random(V)
    open_, prov = hybrid_open(point.t, point.n, point.lam, U, scales, N)
    if w is None:
        raise ValueError("hybrid_sample needs the window")
    return PercConfig(w, open_, prov)


def _field_window(window) -> CayleyBall:
    ball = window.ball if isinstance(window, Window) else window
    if not isinstance(ball, CayleyBall):
        raise TypeError("field models need a ball window")
    return ball


def _blocks_for(ball: CayleyBall, N: int, blocks):
    if N <= 0:
        return {}
    if blocks is None:
        blocks = green_blocks(ball, range(1, N + 1))
        verify_blocks(blocks)
    out = {b.scale: b for b in blocks}
    for n in range(1, N + 1):
        if n not in out:
            raise ValueError(f"no block for scale {n}")
        rep = out[n].report or out[n].verify()
        if rep.status != "pass":
            raise ValueError(f"block g_{n} is not verified; refusing to sample")
    return out


def _opens(model, w: Window, blocks: dict, gen: np.random.Generator, count: int) -> np.ndarray:
    if isinstance(model, Bernoulli):
        return gen.random((count, w.size)) < model.p
    if isinstance(model, Excursion):
        tot = np.zeros((count, w.size))
        for n in range(1, model.N + 1):
            tot += sample_field(blocks[n], gen, count)
        return tot > model.h
    if isinstance(model, Hybrid):
        U = gen.random((count, w.size))
        scales = {k: sample_field(blocks[k], gen, count) for k in range(max(model.n, 1), model.N + 1)}
        return hybrid_open(model.t, model.n, model.lam, U, scales, model.N)[0]
    raise TypeError(f"unknown model {model!r}")


# --------------------------------------------------------------------------
# connection probabilities


@dataclass
class ConnectionEstimate:
    event: dict
    model: dict
    samples: int
    estimate: float
    stderr: float
    hits: int

    def as_dict(self) -> dict:
        return {"event": self.event, "model": self.model, "samples": self.samples, "estimate": self.estimate,
                "stderr": self.stderr, "hits": self.hits}


def _binomial(hits: int, n: int) -> tuple[float, float]:
    p = hits / n
    return p, math.sqrt(p * (1 - p) / n)


def connection_prob(window, model, A, Lambda=None, samples: int = 1000, seed: int = 0,
                    blocks: Sequence[CovarianceBlock] | None = None, key: str = "connection") -> ConnectionEstimate:
    """Monte Carlo estimate of ``P[A <-> Lambda^c]`` under a Bernoulli, excursion or hybrid model."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    w = as_window(window)
    Am, Bm = event_masks(w, A, Lambda)
    need = model.N if isinstance(model, (Excursion, Hybrid)) else 0
    bl = _blocks_for(_field_window(w), need, blocks) if need else {}
    hits = 0
    for start, stop, gen in rngmod.block_streams(seed, samples, key):
        opens = _opens(model, w, bl, gen, stop - start)
        hits += int(connected_batch(opens, w.neighbors, Am, Bm).sum())
    est, se = _binomial(hits, samples)
    event = {"A": np.flatnonzero(Am).tolist(), "target": "shell" if Lambda is None else "Lambda^c",
             "window": w.name}
    return ConnectionEstimate(event, model.as_dict(), samples, est, se, hits)


# --------------------------------------------------------------------------
# Russo-type derivative checks


@dataclass
class RussoLine:
    delta: float
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float

    @property
    def pooled_se(self) -> float:
        return math.hypot(self.lhs_se, self.rhs_se)

    @property
    def z(self) -> float:
        se = self.pooled_se
        if se == 0:
            return 0.0 if self.lhs == self.rhs else math.inf
        return (self.lhs - self.rhs) / se

    @property
    def agree(self) -> bool:
        return abs(self.z) <= 3.0

    def as_dict(self) -> dict:
        return {"delta": self.delta, "lhs": self.lhs, "lhs_se": self.lhs_se, "rhs": self.rhs, "rhs_se": self.rhs_se,
                "pooled_se": self.pooled_se, "z": self.z, "agree": self.agree}


@dataclass
class RussoReport:
    """Finite-difference side against pivotal side at ``delta`` and ``delta/2``.

    ``bias_estimate`` is the Richardson estimate ``(4/3)(FD(delta) - FD(delta/2))``
    of the ``O(delta^2)`` bias at ``delta``; when the two step sizes disagree
    beyond noise the check is not asserted.
    """

    kind: str
    point: dict
    samples: int
    lines: list
    fd_gap: float
    fd_gap_se: float
    bias_estimate: float
    asserted: bool
    warning: str | None = None

    @property
    def passed(self) -> bool | None:
        if not self.asserted:
            return None
        return all(l.agree for l in self.lines)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "point": self.point, "samples": self.samples,
                "lines": [l.as_dict() for l in self.lines], "fd_gap": self.fd_gap, "fd_gap_se": self.fd_gap_se,
                "bias_estimate": self.bias_estimate, "asserted": self.asserted, "passed": self.passed,
                "warning": self.warning}


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    n = len(x)
    m = float(x.mean())
    if n < 2:
        return m, 0.0
    return m, float(x.std(ddof=1) / math.sqrt(n))


def _finish(kind, point, samples, d, fd1, fd2, piv) -> RussoReport:
    l1m, l1s = _mean_se(fd1)
    l2m, l2s = _mean_se(fd2)
    rm, rs = _mean_se(piv)
    gap, gap_se = _mean_se(fd1 - fd2)
    asserted = abs(gap) <= 3 * gap_se or gap == 0.0
    warning = None
    if not asserted:
        warning = (f"finite differences at delta={d} and delta/2 differ by {gap:.3g} "
                   f"(se {gap_se:.2g}); step too large for the bias bound, not asserted")
        warnings.warn(warning, RuntimeWarning)
    lines = [RussoLine(d, l1m, l1s, rm, rs), RussoLine(d / 2, l2m, l2s, rm, rs)]
    return RussoReport(kind, point, samples, lines, gap, gap_se, 4.0 / 3.0 * gap, asserted, warning)


def _tail_open(model_scales: dict, n: int, N: int, count: int, V: int) -> np.ndarray:
    out = np.zeros((count, V), dtype=bool)
    for k in range(n + 1, N + 1):
        out |= model_scales[k] > lambda_n(k)
    return out


def russo_d1(window, A, Lambda=None, t: float = 0.0, samples: int = 100_000, seed: int = 0, delta: float = 0.05,
             n: int = 0, lam: float | None = None, N: int = 0, blocks=None) -> RussoReport:
    """``dP/dt`` by coupled central differences against ``sum_x P[x closed pivotal]``.

    With ``N = 0`` the model is pure Bernoulli with ``p = 1 - e^{-t}``; otherwise
    the fields at scales ``n..N`` are held fixed while ``t`` moves. The two
    sides use independent streams.
    """
    w = as_window(window)
    Am, Bm = event_masks(w, A, Lambda)
    if t - delta < 0:
        raise DomainError("t - delta must be >= 0")
    bl = _blocks_for(_field_window(w), N, blocks) if N else {}
    lo_n = max(n, 1)
    if N and lam is None:
        lam = lambda_n(lo_n)

    def layers(gen, count):
        U = gen.random((count, w.size))
        fo = np.zeros((count, w.size), dtype=bool)
        if N:
            scales = {k: sample_field(bl[k], gen, count) for k in range(lo_n, N + 1)}
            fo = hybrid_open(0.0, lo_n, lam, np.ones_like(U), scales, N)[0]
        return U, fo

    ps = {s: -math.expm1(-(t + s)) for s in (-delta, -delta / 2, delta / 2, delta)}
    fd1, fd2, piv = [], [], []
    for start, stop, gen in rngmod.block_streams(seed, samples, "russo-d1-fd"):
        U, fo = layers(gen, stop - start)
        ind = {s: connected_batch((U < p) | fo, w.neighbors, Am, Bm).astype(float) for s, p in ps.items()}
        fd1.append((ind[delta] - ind[-delta]) / (2 * delta))
        fd2.append((ind[delta / 2] - ind[-delta / 2]) / delta)
    p0 = -math.expm1(-t)
    for start, stop, gen in rngmod.block_streams(seed, samples, "russo-d1-piv"):
        U, fo = layers(gen, stop - start)
        counts, _ = closed_pivotal_batch((U < p0) | fo, w.neighbors, Am, Bm)
        piv.append(counts.astype(float))
    point = {"t": t, "p": p0, "n": n, "lambda": lam, "N": N}
    return _finish("d1", point, samples, delta, np.concatenate(fd1), np.concatenate(fd2), np.concatenate(piv))


@numba.njit(cache=True, nogil=True)
def _conditional_pivotal_batch(base_open, phi, Rm, lam, nbrs, A, B, counts):
    S, V = phi.shape
    parent = np.empty(V, np.int64)
    size = np.empty(V, np.int64)
    ta = np.empty(V, np.bool_)
    tb = np.empty(V, np.bool_)
    piv = np.empty(V, np.bool_)
    op = np.empty(V, np.bool_)
    for s in range(S):
        c = 0
        for x in range(V):
            if base_open[s, x]:
                continue
            dx = lam - phi[s, x]
            for y in range(V):
                op[y] = base_open[s, y] or (phi[s, y] + dx * Rm[x, y] > lam)
            op[x] = False
            _closed_pivotal_one(op, nbrs, A, B, parent, size, ta, tb, piv)
            if piv[x]:
                c += 1
        counts[s] = c


def russo_d2(window, A, Lambda=None, t: float = math.log(2.0), n: int = 1, lam: float = 0.0, N: int | None = None,
             samples: int = 100_000, seed: int = 0, delta: float = 0.05, blocks=None) -> RussoReport:
    """``-dP/dlambda`` against ``rho^n(lambda) sum_x P[x closed pivotal | phi^n_x = lambda]``.

    The conditional law is realized by shifting unconditioned samples,
    ``phi^n + (lambda - phi^n_x) g_n(x, .)/g_n(x, x)``; no rejection.
    """
    w = as_window(window)
    Am, Bm = event_masks(w, A, Lambda)
    N = n if N is None else N
    if N < n:
        raise ValueError("N must be >= n")
    InterpolationPoint(t, n, lam - delta)
    ball = _field_window(w)
    bl = _blocks_for(ball, N, blocks)
    Rm = np.stack([shift_row(bl[n], x) for x in range(w.size)])
    p = -math.expm1(-t)

    def layers(gen, count):
        U = gen.random((count, w.size))
        scales = {k: sample_field(bl[k], gen, count) for k in range(n, N + 1)}
        base = (U < p) | _tail_open(scales, n, N, count, w.size)
        return base, scales[n]

    fd1, fd2, piv = [], [], []
    for start, stop, gen in rngmod.block_streams(seed, samples, "russo-d2-fd"):
        base, phi = layers(gen, stop - start)
        ind = {s: connected_batch(base | (phi > lam + s), w.neighbors, Am, Bm).astype(float)
               for s in (-delta, -delta / 2, delta / 2, delta)}
        fd1.append((ind[-delta] - ind[delta]) / (2 * delta))
        fd2.append((ind[-delta / 2] - ind[delta / 2]) / delta)
    rho = density(lam, bl[n].diag)
    for start, stop, gen in rngmod.block_streams(seed, samples, "russo-d2-piv"):
        base, phi = layers(gen, stop - start)
        counts = np.empty(stop - start, dtype=np.int64)
        _conditional_pivotal_batch(np.ascontiguousarray(base), np.ascontiguousarray(phi), Rm, float(lam),
                                   np.ascontiguousarray(w.neighbors), Am, Bm, counts)
        piv.append(rho * counts)
    point = {"t": t, "p": p, "n": n, "lambda": lam, "N": N, "rho": rho}
    return _finish("d2", point, samples, delta, np.concatenate(fd1), np.concatenate(fd2), np.concatenate(piv))


def russo_check(window, A, Lambda=None, point: InterpolationPoint | None = None, samples: int = 100_000,
                seed: int = 0, kind: str = "d1", delta: float = 0.05, N: int | None = None, blocks=None
                ) -> RussoReport:
    """Dispatch to :func:`russo_d1` (derivative in ``t``) or :func:`russo_d2` (in ``lambda``)."""
    point = point or InterpolationPoint(math.log(2.0), 1, 0.0)
    if kind == "d1":
        return russo_d1(window, A, Lambda, point.t, samples, seed, delta, point.n, point.lam, N or 0, blocks)
    if kind == "d2":
        return russo_d2(window, A, Lambda, point.t, point.n, point.lam, N, samples, seed, delta, blocks)
    raise ValueError(f"unknown Russo check {kind!r}")


# --------------------------------------------------------------------------
# threshold estimation


@dataclass
class PcWindowResult:
    """Crossing curve of one window from per-sample thresholds."""

    name: str
    size: int
    observable: str
    grid: np.ndarray
    curve: np.ndarray
    stderr: np.ndarray
    thresholds: np.ndarray
    estimate: float
    band: tuple
    sigma: float

    def rows(self):
        for p, c, s in zip(self.grid, self.curve, self.stderr):
            yield self.name, float(p), float(c), float(s)

    def as_dict(self) -> dict:
        return {"window": self.name, "vertices": self.size, "observable": self.observable, "estimate": self.estimate,
                "band": list(self.band), "sigma": self.sigma, "samples": int(len(self.thresholds)),
                "median_threshold": float(np.median(self.thresholds))}


@dataclass
class PcEstimate:
    windows: list
    note: str | None = None

    @property
    def final(self) -> PcWindowResult:
        return self.windows[-1]

    @property
    def estimate(self) -> float:
        return self.final.estimate

    @property
    def band(self) -> tuple:
        return self.final.band

    @property
    def sigma(self) -> float:
        return self.final.sigma

    def trend(self) -> list:
        return [(w.name, w.estimate) for w in self.windows]

    def as_dict(self) -> dict:
        return {"estimate": self.estimate, "band": list(self.band), "sigma": self.sigma,
                "trend": [w.as_dict() for w in self.windows], "note": self.note}


def _pc_setup(gens: GeneratorSet, size: int):
    if isinstance(gens.model, FreeAbelian):
        w = Window.box(gens, size)
        return w, w.faces[0], w.faces[1], "left-right crossing"
    w = Window.from_ball(build_ball(gens.model, gens, size))
    src = np.zeros(w.size, dtype=bool)
    src[w.origin] = True
    return w, src, w.shell, "origin-shell connection"


def _thresholds(w: Window, src, dst, samples: int, seed: int, key, workers: int, chunk: int = 16) -> np.ndarray:
    def run(start):
        stop = min(samples, start + chunk)
        U = np.stack([rngmod.stream(seed, key, w.size, s).random(w.size) for s in range(start, stop)])
        return minimax_thresholds(U, w.neighbors, src, dst)

    starts = list(range(0, samples, chunk))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    return np.concatenate(parts)


def pc_window(gens: GeneratorSet, size: int, grid: Sequence[float], samples: int, seed: int,
              workers: int = 1) -> PcWindowResult:
    """Coupled sweep on one window: a sample connects at ``p`` iff ``p`` exceeds its threshold."""
    w, src, dst, obs = _pc_setup(gens, size)
    thr = _thresholds(w, src, dst, samples, seed, "pc", workers)
    grid = np.asarray(sorted(grid), dtype=float)
    curve = (thr[None, :] < grid[:, None]).mean(axis=1)
    se = np.sqrt(curve * (1 - curve) / samples)
    i = int(np.argmax(curve >= 0.5)) if np.any(curve >= 0.5) else None
    if i is None or i == 0:
        raise NoCrossingError(f"{w.name}: crossing probability {curve[0]:.3f} at p={grid[0]} and "
                              f"{curve[-1]:.3f} at p={grid[-1]} does not cross 1/2 inside the grid")
    p0, p1, c0, c1 = grid[i - 1], grid[i], curve[i - 1], curve[i]
    est = float(p0 + (0.5 - c0) / (c1 - c0) * (p1 - p0))
    slope = (c1 - c0) / (p1 - p0)
    mc = 0.5 / math.sqrt(samples) / slope
    band = (float(p0 - mc), float(p1 + mc))
    sigma = float(math.hypot(mc, (p1 - p0) / math.sqrt(12)))
    return PcWindowResult(w.name, w.size, obs, grid, curve, se, thr, est, band, sigma)


def pc_estimate(gens: GeneratorSet, sizes: Sequence[int], grid: Sequence[float], samples: int = 1000, seed: int = 0,
                workers: int = 1) -> PcEstimate:
    """Probability-1/2 crossing on growing windows; the largest window gives the estimate.

    Free abelian groups use boxes ``{-L..L}^d`` and left-right crossing;
    other groups use balls and the origin-to-shell connection.
    """
    if len(sizes) < 2:
        raise ValueError("need at least two window sizes for the finite-size trend")
    sizes = sorted(sizes)
    return PcEstimate([pc_window(gens, L, grid, samples, seed, workers) for L in sizes])


# --------------------------------------------------------------------------
# experiments


@dataclass
class ComparisonReport:
    window: str
    N: int
    samples: int
    gff: ConnectionEstimate
    rows: list
    h_check: dict
    largest_eps: float | None
    smallest_eps: float | None

    def as_dict(self) -> dict:
        return {"window": self.window, "N": self.N, "samples": self.samples, "gff_side": self.gff.as_dict(),
                "rows": self.rows, "h_monotonicity": self.h_check, "largest_eps_holding": self.largest_eps,
                "smallest_eps_holding": self.smallest_eps}


def comparison_experiment(window: CayleyBall, eps_grid: Sequence[float], N: int, samples: int, seed: int,
                          blocks=None) -> ComparisonReport:
    """``P_{1-eps}[o <-> shell]`` against ``P[o <-> shell in {phi > -1}]`` per ``eps``.

    Pure report: for each ``eps`` it records whether the Bernoulli side
    exceeds the field side by three pooled standard errors. The field side
    also runs at ``h = 0`` on the same fields to check monotonicity in ``h``.
    """
    w = Window.from_ball(window)
    bl = _blocks_for(window, N, blocks)
    Am = np.zeros(w.size, dtype=bool)
    Am[w.origin] = True
    Bm = w.shell
    hit_m1 = hit_0 = nested_bad = 0
    for start, stop, gen in rngmod.block_streams(seed, samples, "comparison-gff"):
        tot = np.zeros((stop - start, w.size))
        for n in range(1, N + 1):
            tot += sample_field(bl[n], gen, stop - start)
        c1 = connected_batch(tot > -1.0, w.neighbors, Am, Bm)
        c0 = connected_batch(tot > 0.0, w.neighbors, Am, Bm)
        hit_m1 += int(c1.sum())
        hit_0 += int(c0.sum())
        nested_bad += int(np.count_nonzero(c0 & ~c1))
    g_est, g_se = _binomial(hit_m1, samples)
    z_est, z_se = _binomial(hit_0, samples)
    gff = ConnectionEstimate({"A": [w.origin], "target": "shell", "window": w.name},
                             Excursion(-1.0, N).as_dict(), samples, g_est, g_se, hit_m1)
    h_check = {"h=-1": g_est, "h=0": z_est, "per_sample_violations": nested_bad,
               "three_sigma": g_est - z_est >= -3 * math.hypot(g_se, z_se)}
    rows = []
    for eps in eps_grid:
        be = connection_prob(w, Bernoulli(1.0 - eps), Am, None, samples, seed, key=f"comparison-bern-{eps!r}")
        margin = be.estimate - g_est
        pooled = math.hypot(be.stderr, g_se)
        rows.append({"eps": eps, "p": 1.0 - eps, "bernoulli": be.estimate, "bernoulli_se": be.stderr,
                     "gff": g_est, "gff_se": g_se, "margin": margin, "holds": margin >= 3 * pooled})
    holding = [r["eps"] for r in rows if r["holds"]]
    return ComparisonReport(w.name, N, samples, gff, rows, h_check, max(holding) if holding else None,
                            min(holding) if holding else None)


@dataclass
class QuotientReport:
    source: str
    target: str
    source_pc: PcEstimate | None
    target_pc: PcEstimate | None
    passed: bool | None
    margin_sigma: float | None
    note: str | None = None

    def as_dict(self) -> dict:
        return {"source": self.source, "target": self.target,
                "source_pc": None if self.source_pc is None else self.source_pc.as_dict(),
                "target_pc": None if self.target_pc is None else self.target_pc.as_dict(),
                "passed": self.passed, "margin_sigma": self.margin_sigma, "note": self.note}


def quotient_experiment(source: GeneratorSet, target_model, images, source_sizes: Sequence[int],
                        target_sizes: Sequence[int], source_grid: Sequence[float], target_grid: Sequence[float],
                        samples: int = 1000, seed: int = 0, workers: int = 1) -> QuotientReport:
    """Estimate ``p_c`` of a Cayley graph and of its quotient and compare.

    Passes when ``p_c(G_1) <= p_c(G_2)`` holds with a three-sigma margin. A
    target of linear growth has ``p_c = 1``: the inequality is vacuous and
    only the source is estimated.
    """
    q = quotient_hom(source, target_model, images)
    tgt = q.generators
    src_pc = pc_estimate(source, source_sizes, source_grid, samples, seed, workers)
    if tgt.model.growth_dimension <= 1:
        return QuotientReport(source.model.name, tgt.model.name, src_pc, None, None, None,
                              "target has linear growth, so p_c(target) = 1 and the inequality is vacuous")
    tgt_pc = pc_estimate(tgt, target_sizes, target_grid, samples, seed + 1, workers)
    sig = math.hypot(src_pc.sigma, tgt_pc.sigma)
    gap = tgt_pc.estimate - src_pc.estimate
    margin = gap / sig if sig > 0 else (math.inf if gap >= 0 else -math.inf)
    return QuotientReport(source.model.name, tgt.model.name, src_pc, tgt_pc, margin >= 3.0, margin)
