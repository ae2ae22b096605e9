"""Expansion profiles by exhaustive enumeration and the heat-kernel horizon.

Connected vertex sets containing the origin are enumerated with Redelmeier's
algorithm. Edge and inner vertex boundaries are maintained incrementally, so
every set costs ``O(D)`` work. Translation invariance and the fact that the
minimum of ``|dE K| / (D |K|)`` over a set is attained on one of its
components make the restriction lossless; :func:`brute_force_profile`
re-derives the profile from all subsets on small balls as a cross-check.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .cayley import CayleyBall, CertificationError, RadiusFunctions, boundaries
from .kernel import max_kernel_profile

__all__ = [
    "ENUMERATION_CAP",
    "EnumerationCapError",
    "HorizonError",
    "SizeRecord",
    "ExpansionProfileTable",
    "connected_sets",
    "enumerate_by_size",
    "expansion_profile",
    "brute_force_profile",
    "IsopReport",
    "check_isop_inequalities",
    "adaptive_simpson",
    "heat_bound_horizon",
    "lemma_phi",
    "PnRow",
    "PnReport",
    "check_theorem_pn",
]

ENUMERATION_CAP = 12


class EnumerationCapError(ValueError):
    """Exhaustive enumeration was requested beyond the supported set size."""


class HorizonError(ValueError):
    """The profile lower bound vanishes on the integration range."""


# --------------------------------------------------------------------------
# enumeration


def _neighbor_lists(ball: CayleyBall) -> list[list[int]]:
    return [[int(j) for j in row] for row in ball.neighbors]


def connected_sets(ball: CayleyBall, s_max: int, first: int | None = None
                   ) -> Iterator[tuple[tuple[int, ...], int, int]]:
    """Yield ``(K, |dE K|, |dV K|)`` for each connected ``K`` containing the origin.

    Each set with ``|K| <= s_max`` is produced exactly once. ``first`` limits
    the enumeration to the branch whose second vertex is the ``first``-th
    neighbor slot of the origin (``-1`` for the singleton alone), which is how
    work is split across processes.
    """
    if s_max > ball.radius:
        raise CertificationError(f"sets of size {s_max} need a ball of radius >= {s_max}, have {ball.radius}")
    nbrs = _neighbor_lists(ball)
    D = ball.degree
    o = ball.origin
    inside = bytearray(ball.size)
    inner = [0] * ball.size  # in-set neighbor slots, per vertex
    seen = bytearray(ball.size)
    K: list[int] = []
    state = {"edge": 0, "vert": 0}

    def add(v):
        e = D
        dv = 0
        for w in nbrs[v]:
            if inside[w]:
                e -= 2
                inner[w] += 1
                if inner[w] == D:
                    dv -= 1
                inner[v] += 1
        inside[v] = 1
        if inner[v] < D:
            dv += 1
        K.append(v)
        state["edge"] += e
        state["vert"] += dv

    def remove(v):
        K.pop()
        inside[v] = 0
        e = D
        dv = 1 if inner[v] < D else 0
        for w in nbrs[v]:
            if inside[w]:
                e -= 2
                if inner[w] == D:
                    dv -= 1
                inner[w] -= 1
        inner[v] = 0
        state["edge"] -= e
        state["vert"] -= dv

    def grow(untried: list[int]):
        untried = list(untried)
        while untried:
            v = untried.pop()
            add(v)
            yield tuple(K), state["edge"], state["vert"]
            if len(K) < s_max:
                fresh = []
                for w in nbrs[v]:
                    if not seen[w]:
                        seen[w] = 1
                        fresh.append(w)
                yield from grow(untried + fresh)
                for w in fresh:
                    seen[w] = 0
            remove(v)

    seen[o] = 1
    add(o)
    if first is None or first == -1:
        yield (o,), state["edge"], state["vert"]
    if s_max == 1 or first == -1:
        return
    fresh = []
    for w in nbrs[o]:
        if not seen[w]:
            seen[w] = 1
            fresh.append(w)
    if first is None:
        yield from grow(fresh)
        return
    # branch `first`: vertices popped before it are forbidden and stay seen
    order = list(reversed(fresh))
    if first >= len(order):
        return
    untried = [w for w in fresh if w not in order[: first + 1]]
    v = order[first]
    add(v)
    yield tuple(K), state["edge"], state["vert"]
    if s_max > 2:
        extra = []
        for w in nbrs[v]:
            if not seen[w]:
                seen[w] = 1
                extra.append(w)
        yield from grow(untried + extra)


@dataclass
class SizeRecord:
    """Extremes over connected sets containing ``o`` of one size."""

    size: int
    count: int = 0
    min_edge: int | None = None
    edge_witness: tuple = ()
    min_vertex: int | None = None
    vertex_witness: tuple = ()

    def update(self, K, e, v):
        self.count += 1
        if self.min_edge is None or e < self.min_edge:
            self.min_edge, self.edge_witness = e, K
        if self.min_vertex is None or v < self.min_vertex:
            self.min_vertex, self.vertex_witness = v, K

    def merge(self, other: "SizeRecord"):
        self.count += other.count
        if other.min_edge is not None and (self.min_edge is None or other.min_edge < self.min_edge):
            self.min_edge, self.edge_witness = other.min_edge, other.edge_witness
        if other.min_vertex is not None and (self.min_vertex is None or other.min_vertex < self.min_vertex):
            self.min_vertex, self.vertex_witness = other.min_vertex, other.vertex_witness


def _enumerate_branch(ball, s_max, first, max_sets):
    recs = {s: SizeRecord(s) for s in range(1, s_max + 1)}
    total = 0
    for K, e, v in connected_sets(ball, s_max, first):
        recs[len(K)].update(K, e, v)
        total += 1
        if max_sets is not None and total >= max_sets:
            return recs, True
    return recs, False


def enumerate_by_size(ball: CayleyBall, s_max: int, workers: int = 1,
                      max_sets: int | None = None) -> tuple[dict[int, SizeRecord], bool]:
    """Per-size minima of both boundaries; returns ``(records, truncated)``."""
    if workers <= 1 or s_max == 1:
        return _enumerate_branch(ball, s_max, None, max_sets)
    branches = [-1] + list(range(ball.degree))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_enumerate_branch, itertools.repeat(ball), itertools.repeat(s_max),
                              branches, itertools.repeat(max_sets)))
    recs = {s: SizeRecord(s) for s in range(1, s_max + 1)}
    truncated = False
    for part, cut in parts:
        truncated |= cut
        for s, r in part.items():
            recs[s].merge(r)
    return recs, truncated


# --------------------------------------------------------------------------
# expansion profile


@dataclass
class ExpansionProfileTable:
    """``Phi(u)`` for ``u = 1..s_max`` with witnesses.

    ``exhaustive`` is false when the enumeration was truncated by a set budget,
    in which case each value is only an upper bound on the true ``Phi(u)``.
    """

    degree: int
    u: list
    phi: list
    witnesses: list
    edge_boundaries: list
    exhaustive: bool
    counts: list = field(default_factory=list)

    def value(self, u: float) -> Fraction:
        k = int(math.floor(u))
        if k < 1 or k > self.u[-1]:
            raise ValueError(f"u = {u} outside the table range [1, {self.u[-1]}]")
        return self.phi[k - 1]

    def rows(self, ball: CayleyBall | None = None):
        codes = ball.codes() if ball is not None else None
        for u, p, w, e in zip(self.u, self.phi, self.witnesses, self.edge_boundaries):
            wc = ";".join(codes[i].hex() for i in w) if codes is not None else ""
            yield u, p, len(w), e, wc


def expansion_profile(ball: CayleyBall, s_max: int, capped: bool = False, max_sets: int = 2_000_000,
                      workers: int = 1) -> ExpansionProfileTable:
    """Exact ``Phi(u) = min |dE K| / (D |K|)`` over ``0 < |K| <= u`` for ``u <= s_max``.

    Beyond :data:`ENUMERATION_CAP` the call fails unless ``capped`` is set, in
    which case enumeration stops after ``max_sets`` sets and the table is
    flagged non-exhaustive.
    """
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    if s_max > ENUMERATION_CAP and not capped:
        raise EnumerationCapError(
            f"exhaustive enumeration is capped at |K| <= {ENUMERATION_CAP}; pass capped=True for a "
            "budgeted, non-exhaustive profile (upper bounds only)")
    recs, truncated = enumerate_by_size(ball, s_max, workers, max_sets if capped else None)
    D = ball.degree
    us, phis, wits, edges, counts = [], [], [], [], []
    best = None
    for s in range(1, s_max + 1):
        r = recs[s]
        counts.append(r.count)
        if r.min_edge is not None:
            cand = (Fraction(r.min_edge, D * s), r.edge_witness, r.min_edge)
            if best is None or cand[0] < best[0]:
                best = cand
        us.append(s)
        phis.append(best[0])
        wits.append(best[1])
        edges.append(best[2])
    return ExpansionProfileTable(D, us, phis, wits, edges, not truncated, counts)


def brute_force_profile(ball: CayleyBall, u_max: int, limit: int = 5_000_000) -> list[Fraction]:
    """``Phi(u)`` for ``u = 1..u_max`` from every subset of the ball interior.

    Independent of the connectivity restriction; equal to the enumerated
    profile when ``u_max <= ball.radius``.
    """
    interior = np.flatnonzero(ball.interior_mask)
    n = len(interior)
    total = sum(math.comb(n, k) for k in range(1, u_max + 1))
    if total > limit:
        raise EnumerationCapError(f"{total} subsets exceed the brute-force limit {limit}")
    D = ball.degree
    out = []
    best = None
    for k in range(1, u_max + 1):
        for K in itertools.combinations(interior.tolist(), k):
            _, e = boundaries(ball, K)
            r = Fraction(e, D * k)
            if best is None or r < best:
                best = r
        out.append(best)
    return out


# --------------------------------------------------------------------------
# growth isoperimetry


@dataclass
class IsopReport:
    """Exact verification of both isoperimetric inequalities per set size.

    Every connected set containing ``o`` is checked; since the right-hand
    sides depend on ``|K|`` only, the per-size minimum decides all of them.
    """

    degree: int
    sizes: list
    counts: list
    R: list
    Rbar: list
    edge_min: list
    vertex_min: list
    edge_ok: list
    vertex_ok: list
    edge_witness: list
    vertex_witness: list
    notes: list

    @property
    def sets_checked(self) -> int:
        return int(sum(self.counts))

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.edge_ok) and all(v is not False for v in self.vertex_ok)

    def _slack(self, mins, bounds):
        vals = [m - b for m, b in zip(mins, bounds) if b is not None]
        return min(vals) if vals else None

    @property
    def edge_bounds(self) -> list:
        return [None if math.isinf(r) else Fraction(1, 16 * int(r)) for r in self.Rbar]

    @property
    def vertex_bounds(self) -> list:
        return [None if math.isinf(r) else Fraction(1, 2 * int(r)) for r in self.R]

    @property
    def worst_edge_slack(self):
        return self._slack(self.edge_min, self.edge_bounds)

    @property
    def worst_vertex_slack(self):
        return self._slack(self.vertex_min, self.vertex_bounds)

    def as_dict(self) -> dict:
        f = lambda x: None if x is None else float(x)  # noqa: E731
        return {
            "degree": self.degree,
            "sets_checked": self.sets_checked,
            "passed": self.passed,
            "worst_edge_slack": f(self.worst_edge_slack),
            "worst_vertex_slack": f(self.worst_vertex_slack),
            "per_size": [
                {"size": s, "count": c, "R": _num(r), "Rbar": _num(rb), "edge_min": float(em),
                 "vertex_min": float(vm), "edge_ok": eo, "vertex_ok": vo}
                for s, c, r, rb, em, vm, eo, vo in zip(self.sizes, self.counts, self.R, self.Rbar,
                                                       self.edge_min, self.vertex_min, self.edge_ok,
                                                       self.vertex_ok)
            ],
            "notes": self.notes,
        }


def _num(x):
    return None if isinstance(x, float) and math.isinf(x) else int(x)


def check_isop_inequalities(ball: CayleyBall, s_max: int, horizon: int = 64, workers: int = 1,
                            radius: RadiusFunctions | None = None) -> IsopReport:
    """Check ``|dE K|/(D|K|) >= 1/(16 Rbar(2|K|))`` and ``|dV K|/|K| >= 1/(2 R(2|K|))``.

    Comparisons use integers only. A size whose ``Rbar`` is infinite within
    ``horizon`` makes the edge inequality vacuous and is noted.
    """
    if s_max > ENUMERATION_CAP:
        raise EnumerationCapError(f"exhaustive enumeration is capped at |K| <= {ENUMERATION_CAP}")
    recs, _ = enumerate_by_size(ball, s_max, workers)
    rf = radius if radius is not None else RadiusFunctions(ball.gens, horizon)
    D = ball.degree
    rep = IsopReport(D, [], [], [], [], [], [], [], [], [], [], [])
    for s in range(1, s_max + 1):
        r = recs[s]
        if r.count == 0:
            continue
        R = rf.R(2 * s)
        Rb = rf.Rbar(2 * s)
        rep.sizes.append(s)
        rep.counts.append(r.count)
        rep.R.append(R)
        rep.Rbar.append(Rb)
        rep.edge_min.append(Fraction(r.min_edge, D * s))
        rep.vertex_min.append(Fraction(r.min_vertex, s))
        rep.edge_witness.append(r.edge_witness)
        rep.vertex_witness.append(r.vertex_witness)
        if math.isinf(Rb):
            rep.edge_ok.append(None)
            rep.notes.append(f"|K| = {s}: Rbar({2 * s}) infinite within horizon {rf.horizon}; edge bound vacuous")
        else:
            rep.edge_ok.append(16 * int(Rb) * r.min_edge >= D * s)
        if math.isinf(R):
            rep.vertex_ok.append(None)
            rep.notes.append(f"|K| = {s}: R({2 * s}) infinite within horizon {rf.horizon}; vertex bound vacuous")
        else:
            rep.vertex_ok.append(2 * int(R) * r.min_vertex >= s)
    return rep


# --------------------------------------------------------------------------
# heat kernel horizon


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, rtol: float = 1e-6,
                     max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with a relative error target."""
    if b <= a:
        return 0.0

    def simpson(fa, fm, fb, h):
        return h * (fa + 4 * fm + fb) / 6

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = simpson(fa, fm, fb, b - a)
    tol = rtol * max(abs(whole), 1e-300)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        if depth >= max_depth or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return rec(a, m, fa, flm, fm, left, tol / 2, depth + 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth + 1)

    return rec(a, b, fa, fm, fb, whole, tol, 0)


def heat_bound_horizon(phi: Callable[[float], float], eps: float, breakpoints: Sequence[float] = (),
                       rtol: float = 1e-6) -> tuple[int, float]:
    """``n* = ceil(1 + int_1^{4/eps} 16 du / (u phi(u)^2))`` and the integral.

    The integral is taken in ``s = log u`` on the pieces cut by
    ``breakpoints``. Nodes are nudged inside each piece by a relative
    ``1e-12`` so a piecewise-constant ``phi`` with jumps at the breakpoints
    is integrated exactly.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    top = 4.0 / eps
    if top <= 1.0:
        return 1, 0.0
    cuts = sorted({1.0, top, *[u for u in breakpoints if 1.0 < u < top]})

    def integrand(s):
        p = phi(math.exp(s))
        if not p > 0:
            raise HorizonError(f"profile bound vanishes at u = {math.exp(s):.6g}; horizon is infinite")
        return 16.0 / (p * p)

    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        a, b = math.log(lo), math.log(hi)
        nudge = 1e-12 * (b - a)

        def g(s, a=a, b=b, nudge=nudge):
            return integrand(min(max(s, a + nudge), b - nudge))

        total += adaptive_simpson(g, a, b, rtol)
    return int(math.ceil(1.0 + total)), total


def lemma_phi(radius: RadiusFunctions) -> Callable[[float], float]:
    """``u -> 1/(16 Rbar(2u))``, the lower bound on ``Phi`` from growth of large subsets."""

    def phi(u: float) -> float:
        r = radius.Rbar(math.ceil(2 * u - 1e-12))
        return 0.0 if math.isinf(r) else 1.0 / (16 * r)

    return phi


@dataclass
class PnRow:
    eps: float
    n_star: int | None
    integral: float | None
    status: str
    certificate: str | None = None
    step: int | None = None
    max_kernel: Fraction | None = None
    reason: str | None = None

    @property
    def margin(self) -> float | None:
        return None if self.max_kernel is None else self.eps - float(self.max_kernel)

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "n_star": self.n_star,
            "integral": self.integral,
            "status": self.status,
            "certificate": self.certificate,
            "step": self.step,
            "max_kernel": None if self.max_kernel is None else float(self.max_kernel),
            "max_kernel_exact": None if self.max_kernel is None else str(self.max_kernel),
            "margin": self.margin,
            "reason": self.reason,
        }


@dataclass
class PnReport:
    rows: list

    @property
    def passed(self) -> bool:
        done = [r for r in self.rows if r.status != "skipped"]
        return bool(done) and all(r.status == "pass" for r in done)

    def as_dict(self) -> dict:
        return {"passed": self.passed, "rows": [r.as_dict() for r in self.rows]}


def check_theorem_pn(ball: CayleyBall, eps_grid: Sequence[float], horizon: int = 64,
                     radius: RadiusFunctions | None = None) -> PnReport:
    """Verify ``max_y p_{n*}(o, y) <= eps`` with ``n*`` from the growth-based profile bound.

    ``M_n = max_y p_n(o, y)`` is nonincreasing in ``n`` (each ``p_{n+1}(o, y)``
    averages ``D`` values of ``p_n``). When ``n*`` exceeds the ball radius the
    check uses the first step ``m <= min(n*, R)`` with exact ``M_m <= eps``
    (certificate ``"monotone"``); when ``n* <= R``, ``M_{n*}`` itself is
    computed (certificate ``"direct"``).
    """
    rf = radius if radius is not None else RadiusFunctions(ball.gens, horizon)
    phi = lemma_phi(rf)
    R = ball.radius
    profile = max_kernel_profile(ball, R)
    rows = []
    for eps in eps_grid:
        top = 4.0 / eps if eps > 0 else math.inf
        bps = [k / 2 for k in range(3, int(math.ceil(2 * top)) + 1)] if math.isfinite(top) else []
        try:
            n_star, integral = heat_bound_horizon(phi, eps, bps)
        except HorizonError as exc:
            rows.append(PnRow(eps, None, None, "skipped", reason=str(exc)))
            continue
        if n_star <= R:
            m = profile[n_star]
            rows.append(PnRow(eps, n_star, integral, "pass" if m <= Fraction(eps) else "fail", "direct",
                              n_star, m))
            continue
        step = next((k for k in range(R + 1) if profile[k] <= Fraction(eps)), None)
        if step is None:
            rows.append(PnRow(eps, n_star, integral, "skipped",
                              reason=f"no step up to radius {R} certifies eps; exact p_{n_star} "
                                     f"needs radius {n_star}"))
        else:
            rows.append(PnRow(eps, n_star, integral, "pass", "monotone", step, profile[step]))
    return PnReport(rows)
