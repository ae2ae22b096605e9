"""Finite-range Gaussian fields, excursion sets and the interpolation schedule.

The field of scale ``n`` is centred Gaussian with covariance ``g_n``. Samples
on a window are exact in law for the restriction of the infinite-volume
field, because every block entry is computed exactly (see :mod:`.kernel`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special, stats

from .cayley import CayleyBall
from .clusters import PercConfig, Window
from .kernel import CovarianceBlock, green_blocks, scale_range, verify_blocks

__all__ = [
    "DomainError",
    "DegenerateDensityError",
    "LAMBDA_1",
    "lambda_n",
    "lambda_partial_sum",
    "lambda_tail",
    "density",
    "normal_a",
    "default_C0",
    "InterpolationParams",
    "interpolation_parameters",
    "schedule_rows",
    "FieldSample",
    "sample_field",
    "default_truncation",
    "sample_truncated_gff",
    "excursion",
    "condition_on_value",
    "shift_row",
    "DominationReport",
    "check_union_domination",
]

LAMBDA_1 = -1.0 - math.pi**2 / 6


class DomainError(ValueError):
    """Level below ``lambda_n`` or scale index out of range."""


class DegenerateDensityError(ValueError):
    """Density requested for a scale with zero variance."""


def lambda_n(n: int) -> float:
    """``lambda_1 = -1 - pi^2/6`` and ``lambda_n = 1/(n-1)^2``."""
    if n < 1:
        raise DomainError("scale index starts at 1")
    return LAMBDA_1 if n == 1 else 1.0 / (n - 1) ** 2


def lambda_partial_sum(N: int) -> float:
    """``sum_{n <= N} lambda_n``; tends to ``-1``."""
    return LAMBDA_1 + math.fsum(1.0 / k**2 for k in range(1, N))


def lambda_tail(N: int) -> float:
    """``-1 - sum_{n <= N} lambda_n = sum_{k >= N} 1/k^2`` (trigamma)."""
    return float(special.polygamma(1, N))


def density(lam: float, variance: float) -> float:
    """Centred normal density with the given variance."""
    if variance <= 0:
        raise DegenerateDensityError("zero-variance scale has no density")
    return float(stats.norm.pdf(lam, scale=math.sqrt(variance)))


def normal_a() -> float:
    """``a = P[N(0,1) <= lambda_1]``, the scale-1 mass below its level (``g_1(o,o) = 1``)."""
    return float(stats.norm.cdf(LAMBDA_1))


def default_C0() -> float:
    return 16.0 / normal_a()


def _log_mass(lo: float, hi: float, variance: float) -> float:
    """``log P[lo < N(0, variance) <= hi]``, stable in both tails."""
    if hi <= lo:
        return -math.inf
    if variance <= 0:
        return 0.0 if lo < 0 <= hi else -math.inf
    s = math.sqrt(variance)
    a, b = lo / s, hi / s
    if a > 0:
        la, lb = stats.norm.logsf(a), stats.norm.logsf(b)
    else:
        la, lb = stats.norm.logcdf(b), stats.norm.logcdf(a)
    if lb == -math.inf:
        return float(la)
    return float(la + math.log1p(-math.exp(lb - la)))


def _logsumexp(xs: Sequence[float]) -> float:
    xs = [x for x in xs if x != -math.inf]
    if not xs:
        return -math.inf
    m = max(xs)
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass
class InterpolationParams:
    """Levels, density and Bernoulli clocks at one interpolation point.

    Large terms overflow in linear scale; the ``log_*`` fields are always
    finite or ``-inf`` and carry the actual information.
    """

    n: int
    lam: float
    D: int
    C0: float
    lambda_n: float
    rho: float | None
    t: float
    log_t: float
    t_inf: float
    log_t_inf: float
    t_inf_terms: int
    log_terms: list = field(default_factory=list)

    @property
    def p(self) -> float:
        return -math.expm1(-self.t)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("n", "lam", "D", "C0", "lambda_n", "rho", "t", "log_t", "t_inf",
                                              "log_t_inf", "t_inf_terms", "log_terms")}


def _log_scale_weight(k: int, D: int, C0: float) -> float:
    L = 2 ** (k + 1) - 3
    return math.log(C0) + (L - 1) * math.log(16 * D)


def interpolation_parameters(n: int, lam: float, D: int, gn_diag: Sequence[float],
                             C0: float | None = None) -> InterpolationParams:
    """``lambda_n``, ``rho^n(lambda)``, ``t(n, lambda)`` and the partial ``t_inf``.

    ``t(n, lam) = log 2 + C0 (16D)^{L_n-1} P[lambda_n < phi^n <= lam]
    + C0 sum_{k<n} (16D)^{L_k-1} P[phi^k > lambda_k]`` with
    ``L_k = 2^{k+1} - 3``; ``gn_diag[k-1] = g_k(o,o)``. ``t_inf`` sums the
    series over every supplied scale.
    """
    lam_n = lambda_n(n)
    if lam < lam_n:
        raise DomainError(f"lambda = {lam} is below lambda_{n} = {lam_n}")
    if n > len(gn_diag):
        raise DomainError(f"g_{n}(o,o) not supplied")
    C0 = default_C0() if C0 is None else float(C0)
    if C0 <= 0:
        raise ValueError("C0 must be positive")
    var_n = float(gn_diag[n - 1])
    if var_n <= 0:
        raise DegenerateDensityError(f"scale {n} has zero variance")
    log_terms = [_log_scale_weight(k, D, C0) + _log_mass(lambda_n(k), math.inf, float(gn_diag[k - 1]))
                 for k in range(1, len(gn_diag) + 1)]
    current = _log_scale_weight(n, D, C0) + _log_mass(lam_n, lam, var_n)
    log_t = _logsumexp([math.log(2.0), current, *log_terms[: n - 1]])
    log_t_inf = _logsumexp([math.log(2.0), *log_terms])
    return InterpolationParams(n, lam, D, C0, lam_n, density(lam, var_n), _exp(log_t), log_t, _exp(log_t_inf),
                               log_t_inf, len(gn_diag), log_terms)


def schedule_rows(D: int, gn_diag: Sequence[float], C0: float | None = None):
    """Rows ``(n, lambda_n, g_n_diag, term, partial_t, log_term, log_partial_t)``."""
    C0 = default_C0() if C0 is None else float(C0)
    partial = [math.log(2.0)]
    for k, g in enumerate(gn_diag, start=1):
        lt = _log_scale_weight(k, D, C0) + _log_mass(lambda_n(k), math.inf, float(g))
        partial.append(lt)
        lp = _logsumexp(partial)
        yield k, lambda_n(k), float(g), _exp(lt), _exp(lp), lt, lp


# --------------------------------------------------------------------------
# sampling


def sample_field(block: CovarianceBlock, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw ``phi^n ~ N(0, g_n)`` on the block's window.

    Uses the clamped eigen factor of the verified block; ``size`` draws give a
    ``(size, V)`` array.
    """
    L = block.factor()
    V = L.shape[0]
    if size is None:
        return L @ rng.standard_normal(V)
    return rng.standard_normal((size, V)) @ L.T


@dataclass(eq=False)
class FieldSample:
    """Independent scales ``phi^1..phi^N`` on a window, with their sum."""

    window: CayleyBall
    scales: dict
    N: int
    seed: int | None = None
    total: np.ndarray = field(init=False)

    def __post_init__(self):
        vecs = [self.scales[n] for n in sorted(self.scales)]
        self.total = np.sum(vecs, axis=0) if vecs else np.zeros(self.window.size)

    def scale(self, n: int) -> np.ndarray:
        return self.scales[n]


def default_truncation(window: CayleyBall) -> int:
    """Largest ``n`` whose range ``2^{n+1} - 2`` fits in the window diameter ``2R``."""
    n = 1
    while scale_range(n + 1) <= 2 * window.radius:
        n += 1
    return n


def _verified(blocks):
    for b in blocks:
        rep = b.report or b.verify()
        if rep.status != "pass":
            raise ValueError(f"block g_{b.scale} is not verified ({rep.status}); refusing to sample")


def sample_truncated_gff(window: CayleyBall, N: int | None, rng: np.random.Generator,
                         blocks: Sequence[CovarianceBlock] | None = None, size: int | None = None,
                         seed: int | None = None) -> FieldSample:
    """Independent draws of scales ``1..N`` (``size`` draws per scale if given)."""
    N = default_truncation(window) if N is None else N
    if N < 1:
        raise ValueError("N must be >= 1")
    if blocks is None:
        blocks = green_blocks(window, range(1, N + 1))
        verify_blocks(blocks)
    by_scale = {b.scale: b for b in blocks}
    missing = [n for n in range(1, N + 1) if n not in by_scale]
    if missing:
        raise ValueError(f"no block for scales {missing}")
    use = [by_scale[n] for n in range(1, N + 1)]
    _verified(use)
    scales = {b.scale: sample_field(b, rng, size) for b in use}
    return FieldSample(window, scales, N, seed)


def excursion(values: np.ndarray, h: float, window: Window | None = None):
    """``{phi > h}`` as a :class:`PercConfig` (or a boolean array without a window)."""
    mask = np.asarray(values) > h
    if window is None:
        return mask
    return PercConfig(window, mask)


def shift_row(block: CovarianceBlock, x: int) -> np.ndarray:
    """``g_n(x, .) / g_n(x, x)``."""
    row = block.row(x)
    gxx = row[x]
    if not gxx > 0:
        raise DegenerateDensityError(f"g_{block.scale}(x, x) = 0; cannot condition")
    return row / gxx


def condition_on_value(values: np.ndarray, block: CovarianceBlock, x: int, lam: float) -> np.ndarray:
    """``phi + (lam - phi_x) g_n(x, .)/g_n(x, x)``: a sample of ``phi^n`` given ``phi^n_x = lam``.

    Works on a single vector or row-wise on a ``(samples, V)`` array; the value
    at ``x`` is set to ``lam`` exactly.
    """
    r = shift_row(block, x)
    values = np.asarray(values, dtype=float)
    out = values + np.multiply.outer(lam - values[..., x], r)
    out[..., x] = lam
    return out


# --------------------------------------------------------------------------
# pigeonhole domination


@dataclass
class DominationReport:
    N: int
    lambda_sum: float
    lambda_limit: float
    tail: float
    checked: int
    exceed: int
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {"N": self.N, "lambda_sum": self.lambda_sum, "lambda_limit": self.lambda_limit, "tail": self.tail,
                "checked": self.checked, "exceed": self.exceed, "violations": self.violations,
                "passed": self.passed}


def check_union_domination(scales: Sequence[np.ndarray], N: int | None = None) -> DominationReport:
    """Truncated pigeonhole: ``sum phi^n_x > sum lambda_n`` forces some ``phi^n_x > lambda_n``.

    ``scales[n-1]`` holds ``phi^n`` as a vector or a ``(samples, V)`` array.
    The sums are formed in the same order on both sides, so the check is the
    exact floating-point statement.
    """
    N = len(scales) if N is None else N
    if len(scales) < N:
        raise ValueError(f"need scales 1..{N}, got {len(scales)}")
    arr = np.stack([np.asarray(scales[n], dtype=float) for n in range(N)])
    levels = np.array([lambda_n(n) for n in range(1, N + 1)])
    # sequential sums in one fixed order keep rounding monotone on both sides
    total = arr[0].copy()
    lsum = float(levels[0])
    some = arr[0] > levels[0]
    for n in range(1, N):
        total += arr[n]
        lsum += float(levels[n])
        some |= arr[n] > levels[n]
    exceed = total > lsum
    violations = int(np.count_nonzero(exceed & ~some))
    return DominationReport(N, lsum, -1.0, lambda_tail(N), int(total.size), int(exceed.sum()), violations)
