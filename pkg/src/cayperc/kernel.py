"""Truncated heat kernels and the dyadic Green decomposition.

``g_n(x, y) = sum_{2^n - 2 <= k < 2^{n+1} - 2} p_k(x, y)``.  Blocks are built
through transitivity, ``g_n(x, y) = G_n(x^{-1} y)`` with ``G_n`` computed from
kernel rows at the origin on a ball large enough to contain every walk, so
each entry is exact regardless of the window size.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from .cayley import CayleyBall, build_ball
from .groups import FreeGroup, GeneratorSet, MinimalityVerdict

__all__ = [
    "ExactnessError",
    "KernelRow",
    "heat_kernel",
    "kernel_table",
    "is_tree",
    "tree_radial_counts",
    "scale_window",
    "scale_range",
    "CovarianceBlock",
    "BlockReport",
    "green_block",
    "green_blocks",
    "verify_blocks",
    "VerificationReport",
    "GreenTruncation",
    "green_truncated",
    "ReturnProbReport",
    "return_prob_checks",
    "max_kernel_profile",
    "tree_spectrum_blocks",
]

PSD_RTOL = 1e-9
DENSE_LIMIT = 4000
KERNEL_MARGIN = 2


class ExactnessError(ValueError):
    """The requested kernel value is not determined by the available ball."""


def scale_window(n: int) -> tuple[int, int]:
    """Step range ``[2^n - 2, 2^{n+1} - 3]`` summed by ``g_n``."""
    if n < 1:
        raise ValueError("scale index starts at 1")
    return 2**n - 2, 2 ** (n + 1) - 3


def scale_range(n: int) -> int:
    """Distance beyond which ``g_n`` vanishes, ``2^{n+1} - 2``."""
    return 2 ** (n + 1) - 2


def _fits_int64(D: int, n: int) -> bool:
    return n * math.log2(max(D, 2)) < 62


def _step(neighbors: np.ndarray, vec: np.ndarray) -> np.ndarray:
    padded = np.concatenate([vec, np.zeros(1, dtype=vec.dtype)])
    return padded[neighbors].sum(axis=1)


@dataclass
class KernelRow:
    """``p_n(x, .)`` over a ball; ``counts / denominator`` in exact mode."""

    base: int
    steps: int
    values: np.ndarray
    counts: np.ndarray | None = None
    denominator: int | None = None

    @property
    def exact(self) -> bool:
        return self.counts is not None

    def fraction(self, i: int) -> Fraction:
        if not self.exact:
            raise ExactnessError("row was computed in floating mode")
        return Fraction(int(self.counts[i]), self.denominator)

    def max_fraction(self) -> Fraction:
        return Fraction(int(self.counts.max()), self.denominator)


def _check_support(ball: CayleyBall, x: int, n: int):
    if int(ball.dist[x]) + n > ball.radius:
        need = int(ball.dist[x]) + n
        raise ExactnessError(f"p_{n} from vertex at distance {int(ball.dist[x])} needs ball radius {need}, "
                             f"have {ball.radius}")


def heat_kernel(ball: CayleyBall, x: int, n: int, exact: bool = True) -> KernelRow:
    """``p_n(x, .)`` by ``n`` sparse transition steps.

    Exact mode propagates integer walk counts (denominator ``D^n``); float mode
    propagates probabilities.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    _check_support(ball, x, n)
    D = ball.degree
    if exact:
        dtype = np.int64 if _fits_int64(D, n) else object
        vec = np.zeros(ball.size, dtype=dtype)
        vec[x] = 1
        for _ in range(n):
            vec = _step(ball.neighbors, vec)
        denom = D**n
        return KernelRow(x, n, vec.astype(float) / denom, vec, denom)
    vec = np.zeros(ball.size)
    vec[x] = 1.0
    for _ in range(n):
        vec = _step(ball.neighbors, vec) / D
    return KernelRow(x, n, vec)


def kernel_table(ball: CayleyBall, k_max: int, x: int = 0) -> np.ndarray:
    """Float array ``P[k] = p_k(x, .)`` for ``k = 0..k_max``."""
    _check_support(ball, x, k_max)
    D = ball.degree
    out = np.zeros((k_max + 1, ball.size))
    out[0, x] = 1.0
    for k in range(k_max):
        out[k + 1] = _step(ball.neighbors, out[k]) / D
    return out


# --------------------------------------------------------------------------
# trees


def is_tree(gens: GeneratorSet) -> bool:
    """Whether ``Cay(<S>, S)`` is the ``2k``-regular tree (free basis letters)."""
    model = gens.model
    if not isinstance(model, FreeGroup):
        return False
    if any(len(g) != 1 for g in gens.elements):
        return False
    letters = [g[0] for g in gens.elements]
    return len(letters) == 2 * len({abs(a) for a in letters})


def tree_radial_counts(D: int, k_max: int) -> list[list[int]]:
    """Walk counts ``c_k[r]`` from the root to one fixed vertex at distance ``r``.

    The word length of the walk on the ``D``-regular tree is a birth-death
    chain; the count of walks reaching a given vertex is the count reaching
    the sphere divided by the sphere size.
    """
    q = D - 1
    sphere = [1] + [D * q ** (r - 1) for r in range(1, k_max + 1)]
    c = [1]
    out = [[1]]
    for _ in range(k_max):
        nxt = [0] * (len(c) + 1)
        for r, v in enumerate(c):
            if v == 0:
                continue
            if r == 0:
                nxt[1] += v * D
            else:
                nxt[r + 1] += v * q
                nxt[r - 1] += v
        c = nxt
        out.append([v // sphere[r] for r, v in enumerate(c)])
    return out


def _tree_distances(words: Sequence[tuple], x: tuple) -> np.ndarray:
    L = max(1, max(len(w) for w in words))
    A = np.zeros((len(words), L), dtype=np.int8)
    for i, w in enumerate(words):
        A[i, : len(w)] = w
    lens = np.array([len(w) for w in words])
    xa = np.zeros(L, dtype=np.int8)
    xa[: len(x)] = x
    eq = np.cumprod(A == xa, axis=1)
    lcp = np.minimum(eq.sum(axis=1), min(len(x), L))
    lcp = np.minimum(lcp, lens)
    return lens + len(x) - 2 * lcp


def _tree_pair_distances(words: Sequence[tuple]) -> np.ndarray:
    return np.stack([_tree_distances(words, w) for w in words])


def tree_spectrum_blocks(profile: np.ndarray, D: int, R: int) -> list[tuple[np.ndarray, int]]:
    """Exact block diagonalization of ``A[x, y] = profile[d(x, y)]`` on a tree ball.

    The ball ``B(o, R)`` of the ``D``-regular tree splits into invariant
    sectors: functions of the depth alone, and for every vertex ``a`` at depth
    ``m < R`` the functions ``w_{b(y)} h(depth(y) - m - 1)`` supported below
    the children ``b`` of ``a`` with ``sum_b w_b = 0``. Each sector is a small
    matrix in the depth variable. Returns ``(symmetric block, multiplicity)``
    pairs whose spectra, with multiplicity, make up the spectrum of ``A``.
    """
    q = D - 1
    f = np.asarray(profile, dtype=float)

    def fval(d):
        return f[d] if d < len(f) else 0.0

    def desc(depth, h):
        if h == 0:
            return 1
        return D * q ** (h - 1) if depth == 0 else q**h

    n0 = R + 1
    M0 = np.zeros((n0, n0))
    for i in range(n0):
        for j in range(n0):
            tot = 0.0
            for l in range(min(i, j) + 1):
                if l == j:
                    tot += fval(i - j)
                elif l == i:
                    tot += desc(i, j - i) * fval(j - i)
                else:
                    cl = D if l == 0 else q
                    tot += (cl - 1) * q ** (j - l - 1) * fval(i + j - 2 * l)
            M0[i, j] = tot
    w0 = np.array([desc(0, j) for j in range(n0)], dtype=float)
    blocks = [(_symmetrize(M0, w0), 1)]
    if R == 0:
        return blocks
    B = np.zeros((R, R))
    for i in range(R):
        for j in range(R):
            tot = 0.0
            for l in range(min(i, j) + 1):
                if l == j:
                    tot += fval(i - j)
                elif l == i:
                    tot += q ** (j - i) * fval(j - i)
                else:
                    tot += (q - 1) * q ** (j - l - 1) * fval(i + j - 2 * l)
            B[i, j] = tot - q**j * fval(i + j + 2)
    wb = np.array([float(q) ** j for j in range(R)])
    for m in range(R):
        s = R - m
        sphere = 1 if m == 0 else D * q ** (m - 1)
        mult = sphere * ((D if m == 0 else q) - 1)
        if mult > 0:
            blocks.append((_symmetrize(B[:s, :s], wb[:s]), mult))
    return blocks


def _symmetrize(M: np.ndarray, w: np.ndarray) -> np.ndarray:
    r = np.sqrt(w)
    S = (r[:, None] * M) / r[None, :]
    return 0.5 * (S + S.T)


# --------------------------------------------------------------------------
# covariance blocks


@dataclass
class BlockReport:
    scale: int
    status: str
    min_eig: float | None = None
    norm: float | None = None
    min_entry: float | None = None
    range_violation: float | None = None
    asymmetry: float | None = None
    method: str | None = None
    reason: str | None = None

    @property
    def psd_ok(self) -> bool:
        return self.min_eig is not None and self.min_eig >= -PSD_RTOL * self.norm

    @property
    def nonneg_ok(self) -> bool:
        return self.min_entry is not None and self.min_entry >= 0

    @property
    def range_ok(self) -> bool:
        return self.range_violation == 0

    def as_dict(self) -> dict:
        return {
            "scale": self.scale,
            "status": self.status,
            "min_eig": self.min_eig,
            "norm": self.norm,
            "min_entry": self.min_entry,
            "range_violation": self.range_violation,
            "asymmetry": self.asymmetry,
            "method": self.method,
            "reason": self.reason,
        }


@dataclass(eq=False)
class CovarianceBlock:
    """``g_n`` restricted to a window.

    Either ``matrix`` (dense, with ``pair_dist``) or ``radial_profile`` (tree
    windows, value by distance) carries the data; ``skip_reason`` marks a
    block that could not be computed exactly.
    """

    scale: int
    window: CayleyBall
    matrix: np.ndarray | None = None
    pair_dist: np.ndarray | None = None
    radial_profile: np.ndarray | None = None
    kernel_radius: int | None = None
    skip_reason: str | None = None
    report: BlockReport | None = None
    _factor: np.ndarray | None = field(default=None, repr=False)

    @property
    def range(self) -> int:
        return scale_range(self.scale)

    @property
    def skipped(self) -> bool:
        return self.skip_reason is not None

    @property
    def size(self) -> int:
        return self.window.size

    @property
    def diag(self) -> float:
        """``g_n(o, o)``."""
        if self.matrix is not None:
            return float(self.matrix[0, 0])
        return float(self.radial_profile[0])

    def row(self, i: int) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix[i]
        d = _tree_distances(self.window.elements, self.window.elements[i])
        return self._profile_at(d)

    def _profile_at(self, d: np.ndarray) -> np.ndarray:
        f = self.radial_profile
        out = np.zeros(d.shape)
        ok = d < len(f)
        out[ok] = f[d[ok]]
        return out

    def dense(self) -> np.ndarray:
        if self.matrix is None:
            if self.skipped:
                raise ExactnessError(self.skip_reason)
            if self.size > DENSE_LIMIT:
                raise MemoryError(f"window of {self.size} vertices exceeds the dense limit {DENSE_LIMIT}")
            self.pair_dist = _tree_pair_distances(self.window.elements)
            self.matrix = self._profile_at(self.pair_dist)
        return self.matrix

    def verify(self) -> BlockReport:
        if self.skipped:
            self.report = BlockReport(self.scale, "skipped", reason=self.skip_reason)
            return self.report
        if self.matrix is not None:
            M = self.matrix
            norm = float(np.abs(M).max())
            if M.shape[0] == 1:
                min_eig = float(M[0, 0])
            else:
                min_eig = float(scipy.linalg.eigvalsh(M, subset_by_index=[0, 0], check_finite=False)[0])
            beyond = (self.pair_dist > self.range) | (self.pair_dist < 0)
            rv = float(np.abs(M[beyond]).max()) if beyond.any() else 0.0
            rep = BlockReport(self.scale, "", min_eig, norm, float(M.min()), rv,
                              float(np.abs(M - M.T).max()), "dense")
        else:
            f = self.radial_profile
            R = self.window.radius
            D = self.window.degree
            fr = np.zeros(2 * R + 1)
            fr[: min(len(f), 2 * R + 1)] = f[: 2 * R + 1]
            blocks = tree_spectrum_blocks(fr, D, R)
            min_eig = min(float(np.linalg.eigvalsh(b)[0]) for b, _ in blocks)
            rv = float(np.abs(fr[self.range + 1:]).max()) if 2 * R > self.range else 0.0
            rep = BlockReport(self.scale, "", min_eig, float(np.abs(fr).max()), float(fr.min()), rv, 0.0,
                              "tree-sectors")
        rep.status = "pass" if (rep.psd_ok and rep.nonneg_ok and rep.range_ok) else "fail"
        self.report = rep
        return rep

    def factor(self) -> np.ndarray:
        """``L`` with ``L @ L.T == g_n`` on the window (eigen factorization)."""
        if self._factor is not None:
            return self._factor
        rep = self.report or self.verify()
        if rep.status != "pass" or not rep.psd_ok:
            raise ValueError(f"block g_{self.scale} failed verification ({rep.status}); refusing to sample")
        M = self.dense()
        w, V = np.linalg.eigh(M)
        tol = PSD_RTOL * max(float(np.abs(M).max()), 1e-300)
        if w.min() < -tol:
            raise ValueError(f"block g_{self.scale} has eigenvalue {w.min():.3e} below -{tol:.1e}")
        self._factor = V * np.sqrt(np.clip(w, 0.0, None))
        return self._factor


def _kernel_ball(window: CayleyBall, radius: int, max_vertices: int) -> CayleyBall:
    if window.radius >= radius:
        return window.sub_ball(radius) if window.radius > radius else window
    return build_ball(window.model, window.gens, radius, max_vertices=max_vertices)


def displacement_index(window: CayleyBall, kernel_ball: CayleyBall, chunk: int = 256) -> np.ndarray:
    """``idx[i, j]`` = kernel-ball index of ``x_i^{-1} x_j`` or ``-1`` if outside."""
    model = window.model
    V = window.size
    out = np.full((V, V), -1, dtype=np.int64)
    if model.vector_width is not None:
        X = window.vectors()
        Xinv = model.batch_inv(X.copy())
        K = kernel_ball.vectors()
        lo, hi = K.min(axis=0), K.max(axis=0)
        base = hi - lo + 1
        kk = np.zeros(len(K), dtype=np.int64)
        for c in range(K.shape[1]):
            kk = kk * base[c] + (K[:, c] - lo[c])
        order = np.argsort(kk)
        sk = kk[order]
        for i0 in range(0, V, chunk):
            i1 = min(V, i0 + chunk)
            P = model.batch_mul(np.repeat(Xinv[i0:i1], V, axis=0), np.tile(X, (i1 - i0, 1)))
            inbox = np.all((P >= lo) & (P <= hi), axis=1)
            keys = np.zeros(len(P), dtype=np.int64)
            for c in range(P.shape[1]):
                keys = keys * base[c] + np.clip(P[:, c] - lo[c], 0, base[c] - 1)
            pos = np.searchsorted(sk, keys)
            pos[pos == len(sk)] = 0
            hit = inbox & (sk[pos] == keys)
            out[i0:i1] = np.where(hit, order[pos], -1).reshape(i1 - i0, V)
        return out
    for i, x in enumerate(window.elements):
        xi = model.inv(x)
        for j, y in enumerate(window.elements):
            out[i, j] = kernel_ball.index.get(model.mul(xi, y), -1)
    return out


def green_block(window: CayleyBall, n: int, kernel_ball: CayleyBall | None = None,
                max_kernel_vertices: int = 2_000_000) -> CovarianceBlock:
    """``g_n`` on ``window``; raises :class:`ExactnessError` when the kernel ball is too small."""
    block = green_blocks(window, [n], kernel_ball=kernel_ball, max_kernel_vertices=max_kernel_vertices,
                         strict=True)[0]
    return block


def green_blocks(window: CayleyBall, scales: Sequence[int], kernel_ball: CayleyBall | None = None,
                 max_kernel_vertices: int = 2_000_000, max_kernel_radius: int | None = None,
                 strict: bool = False) -> list[CovarianceBlock]:
    """Blocks ``g_n`` for several scales sharing one kernel ball.

    A scale whose exact computation needs a kernel ball beyond
    ``max_kernel_radius`` is returned as a skipped block (or raises with
    ``strict=True``).
    """
    scales = list(scales)
    needed = {n: scale_window(n)[1] + KERNEL_MARGIN for n in scales}
    if is_tree(window.gens):
        return [_tree_block(window, n, needed[n], max_kernel_radius, strict) for n in scales]
    ok = []
    blocks: dict[int, CovarianceBlock] = {}
    for n in scales:
        r = needed[n]
        too_far = (max_kernel_radius is not None and r > max_kernel_radius) or (
            kernel_ball is not None and kernel_ball.radius < r)
        if too_far:
            have = kernel_ball.radius if kernel_ball is not None else max_kernel_radius
            msg = f"g_{n} needs a kernel ball of radius {r}, have {have}"
            if strict:
                raise ExactnessError(msg)
            blocks[n] = CovarianceBlock(n, window, skip_reason=msg)
        else:
            ok.append(n)
    if ok:
        r = max(needed[n] for n in ok)
        kb = kernel_ball if kernel_ball is not None else _kernel_ball(window, r, max_kernel_vertices)
        table = kernel_table(kb, scale_window(max(ok))[1])
        idx = displacement_index(window, kb)
        pair_dist = np.where(idx >= 0, kb.dist[np.maximum(idx, 0)], -1)
        for n in ok:
            a, b = scale_window(n)
            G = table[a : b + 1].sum(axis=0)
            M = np.where(idx >= 0, G[np.maximum(idx, 0)], 0.0)
            blocks[n] = CovarianceBlock(n, window, M, pair_dist, kernel_radius=kb.radius)
    return [blocks[n] for n in scales]


def _tree_block(window, n, needed, max_kernel_radius, strict):
    if max_kernel_radius is not None and needed > max_kernel_radius:
        msg = f"g_{n} needs a kernel radius of {needed}, cap {max_kernel_radius}"
        if strict:
            raise ExactnessError(msg)
        return CovarianceBlock(n, window, skip_reason=msg)
    a, b = scale_window(n)
    D = window.degree
    counts = tree_radial_counts(D, b)
    length = max(2 * window.radius, needed) + 1
    prof = np.zeros(length)
    for k in range(a, b + 1):
        ck = counts[k]
        for r, v in enumerate(ck):
            if r < length and v:
                prof[r] += v / D**k
    block = CovarianceBlock(n, window, radial_profile=prof, kernel_radius=needed)
    if window.size <= 600:
        block.dense()
    return block


@dataclass
class VerificationReport:
    blocks: list

    @property
    def passed(self) -> bool:
        done = [b for b in self.blocks if b.status != "skipped"]
        return bool(done) and all(b.status == "pass" for b in done)

    def as_dict(self) -> dict:
        return {"passed": self.passed, "blocks": [b.as_dict() for b in self.blocks]}


def verify_blocks(blocks: Sequence[CovarianceBlock]) -> VerificationReport:
    """Check symmetry, PSD (``min eig >= -1e-9 * max|entry|``), nonnegativity and range."""
    windows = {id(b.window) for b in blocks}
    if len(windows) > 1:
        raise ValueError("blocks must share a window")
    return VerificationReport([b.verify() for b in blocks])


# --------------------------------------------------------------------------
# partial Green sums


@dataclass
class GreenTruncation:
    N: int
    partial: np.ndarray
    increments: list
    ratio: float | None
    decay_exponent: float | None
    tail_estimate: float
    recurrent_warning: bool

    @property
    def at_origin(self) -> float:
        return float(self.partial[0])


RECURRENCE_EXPONENT = -0.25


def green_truncated(window: CayleyBall, N: int, kernel_ball: CayleyBall | None = None,
                    max_kernel_vertices: int = 4_000_000) -> GreenTruncation:
    """``sum_{n <= N} g_n(o, .)`` on the window plus a tail diagnostic.

    The diagnostic is the local decay exponent ``log2(g_N(o,o)/g_{N-1}(o,o))``
    of the dyadic increments: transient graphs of growth dimension ``d`` give
    about ``1 - d/2``, recurrent ones approach 0. Above
    ``RECURRENCE_EXPONENT`` the increments are treated as non-summable and a
    warning is emitted; otherwise the tail is estimated geometrically.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    kmax = scale_window(N)[1]
    if is_tree(window.gens):
        D = window.degree
        counts = tree_radial_counts(D, kmax)
        prof = np.zeros(kmax + 1)
        incs = []
        for n in range(1, N + 1):
            a, b = scale_window(n)
            inc = 0.0
            for k in range(a, b + 1):
                for r, v in enumerate(counts[k]):
                    if r <= kmax and v:
                        prof[r] += v / D**k
                inc += counts[k][0] / D**k
            incs.append(inc)
        d = np.array([len(w) for w in window.elements])
        partial = np.where(d <= kmax, prof[np.minimum(d, kmax)], 0.0)
    else:
        kb = kernel_ball if kernel_ball is not None else _kernel_ball(window, kmax, max_kernel_vertices)
        table = kernel_table(kb, kmax)
        incs = []
        for n in range(1, N + 1):
            a, b = scale_window(n)
            incs.append(float(table[a : b + 1, 0].sum()))
        total = table.sum(axis=0)
        partial = np.array([total[kb.index[g]] if g in kb.index else 0.0 for g in window.elements])
    ratio = exponent = None
    tail = math.inf
    warn = False
    if N >= 2 and incs[-2] > 0:
        ratio = incs[-1] / incs[-2]
        exponent = math.log2(ratio) if ratio > 0 else -math.inf
        warn = exponent > RECURRENCE_EXPONENT
        if not warn:
            tail = incs[-1] * ratio / (1 - ratio)
    if warn:
        warnings.warn(f"dyadic Green increments are not decaying (exponent {exponent:.3f}); "
                      "the graph looks recurrent and the Green function may be infinite", RuntimeWarning)
    return GreenTruncation(N, partial, incs, ratio, exponent, tail, warn)


# --------------------------------------------------------------------------
# return probability sub-bounds


@dataclass
class ReturnProbReport:
    degree: int
    n_max: int
    max_values: list
    one_over_D: list
    six_over_D2: list
    six_skipped_reason: str | None = None

    @property
    def passed(self) -> bool:
        return all(self.one_over_D) and all(v for v in self.six_over_D2 if v is not None)

    def as_rows(self):
        for n, (m, a, b) in enumerate(zip(self.max_values, self.one_over_D, self.six_over_D2), start=1):
            yield n, m, a, b


def return_prob_checks(ball: CayleyBall, n_max: int, verdict: MinimalityVerdict) -> ReturnProbReport:
    """Exact check of ``p_n(o, y) <= 1/D`` (``n >= 1``) and ``<= 6/D^2`` (``n >= 4``).

    Counts are integers so the comparisons are exact. The second bound needs a
    certified minimal generating set and is skipped otherwise.
    """
    if ball.radius < n_max:
        raise ExactnessError(f"return-probability checks up to n={n_max} need ball radius {n_max}")
    D = ball.degree
    dtype = np.int64 if _fits_int64(D, n_max + 2) else object
    vec = np.zeros(ball.size, dtype=dtype)
    vec[0] = 1
    maxima, first, second = [], [], []
    reason = None if verdict.certified else f"generating set not certified minimal ({verdict})"
    for n in range(1, n_max + 1):
        vec = _step(ball.neighbors, vec)
        m = int(vec.max())
        denom = D**n
        maxima.append(Fraction(m, denom))
        first.append(m * D <= denom)
        if n >= 4 and reason is None:
            second.append(m * D * D <= 6 * denom)
        else:
            second.append(None)
    return ReturnProbReport(D, n_max, maxima, first, second, reason)


def max_kernel_profile(ball: CayleyBall, n_max: int) -> list[Fraction]:
    """Exact ``max_y p_n(o, y)`` for ``n = 0..n_max`` (ball radius must be ``>= n_max``)."""
    if ball.radius < n_max:
        raise ExactnessError(f"need ball radius {n_max}, have {ball.radius}")
    D = ball.degree
    if is_tree(ball.gens):
        counts = tree_radial_counts(D, n_max)
        return [Fraction(max(c), D**n) for n, c in enumerate(counts)]
    dtype = np.int64 if _fits_int64(D, n_max) else object
    vec = np.zeros(ball.size, dtype=dtype)
    vec[0] = 1
    out = [Fraction(1)]
    for n in range(1, n_max + 1):
        vec = _step(ball.neighbors, vec)
        out.append(Fraction(int(vec.max()), D**n))
    return out
