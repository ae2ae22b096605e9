import math

import numpy as np
import pytest
from scipy import integrate

from cayperc import gff
from cayperc.cayley import build_ball
from cayperc.clusters import Window
from cayperc.groups import FreeAbelian, default_generators
from cayperc.kernel import CovarianceBlock, green_block, green_blocks, verify_blocks
from cayperc.rng import stream

S = 100_000


def ball(model, R):
    return build_ball(model, default_generators(model), R)


@pytest.fixture(scope="module")
def z2():
    b = ball(FreeAbelian(2), 3)
    blocks = green_blocks(b, [1, 2])
    verify_blocks(blocks)
    return b, {blk.scale: blk for blk in blocks}


def within(est, target, se, k=3.0):
    return abs(est - target) <= k * se


def test_levels_and_constants():
    assert gff.lambda_n(1) == pytest.approx(-2.644934, abs=1e-6)
    assert gff.lambda_n(3) == 0.25
    assert gff.normal_a() == pytest.approx(4.0853e-3, rel=1e-3)
    assert gff.default_C0() == pytest.approx(3916.4, rel=1e-4)
    with pytest.raises(gff.DomainError):
        gff.lambda_n(0)


def test_lambda_series():
    for N in (1, 2, 10, 100, 1000):
        assert gff.lambda_partial_sum(N) + 1 == pytest.approx(-gff.lambda_tail(N), abs=1e-12)
    assert abs(gff.lambda_partial_sum(10_000) + 1) < 1e-3


def test_t_monotone_along_order():
    D, diag = 4, [1.0, 0.390625, 0.28388]
    pts = [(1, gff.lambda_n(1)), (1, -1.0), (1, 0.0), (1, 3.0), (2, 1.0), (2, 1.5), (2, 4.0), (3, 0.25), (3, 2.0)]
    logs = [gff.interpolation_parameters(n, lam, D, diag).log_t for n, lam in pts]
    assert all(a <= b for a, b in zip(logs, logs[1:]))
    p = gff.interpolation_parameters(1, gff.lambda_n(1), D, diag)
    assert p.log_t == pytest.approx(math.log(2.0))
    with pytest.raises(gff.DomainError):
        gff.interpolation_parameters(2, 0.5, D, diag)


def test_schedule_rows_log_scale():
    rows = list(gff.schedule_rows(4, [1.0, 0.39, 0.28, 0.2]))
    assert rows[0][1] == gff.LAMBDA_1
    assert all(math.isfinite(r[6]) for r in rows)
    assert all(a[6] <= b[6] for a, b in zip(rows, rows[1:]))


def test_density_integrates_to_one():
    for var in (0.1, 1.0, 0.39):
        val, err = integrate.quad(gff.density, -60, 60, args=(var,), points=[0.0], limit=200)
        assert abs(val - 1.0) <= 1e-8
    with pytest.raises(gff.DegenerateDensityError):
        gff.density(0.0, 0.0)


def test_zero_block_gives_zero_field():
    b = ball(FreeAbelian(2), 2)
    blk = CovarianceBlock(1, b, np.zeros((b.size, b.size)), np.zeros((b.size, b.size), dtype=int))
    assert blk.verify().status == "pass"
    assert np.all(gff.sample_field(blk, stream(1, "zero"), 5) == 0)


def test_variance_matches_block(z2):
    b, bl = z2
    x = gff.sample_field(bl[2], stream(11, "var"), S)[:, b.origin]
    g = bl[2].diag
    assert within(x.var(ddof=1), g, g * math.sqrt(2 / (S - 1)))


def test_covariance_vanishes_beyond_range(z2):
    b, bl = z2
    y = int(np.flatnonzero(b.dist == 3)[0])
    phi = gff.sample_field(bl[1], stream(12, "range"), S)
    c = np.mean(phi[:, b.origin] * phi[:, y])
    assert bl[1].row(b.origin)[y] == 0
    assert within(c, 0.0, math.sqrt(bl[1].diag**2 / S))


def test_kurtosis(z2):
    b, bl = z2
    x = gff.sample_field(bl[1], stream(13, "kurt"), S)[:, b.origin]
    z = (x - x.mean()) / x.std()
    assert abs(np.mean(z**4) - 3.0) <= 5 * math.sqrt(24 / S)


def test_truncated_sum_and_independence(z2):
    b, bl = z2
    fs = gff.sample_truncated_gff(b, 2, stream(14, "sum"), list(bl.values()), size=S)
    o = b.origin
    c = np.mean(fs.scales[1][:, o] * fs.scales[2][:, o])
    assert within(c, 0.0, math.sqrt(bl[1].diag * bl[2].diag / S))
    target = bl[1].diag + bl[2].diag
    assert within(fs.total[:, o].var(ddof=1), target, target * math.sqrt(2 / (S - 1)))
    one = gff.sample_truncated_gff(b, 1, stream(14, "one"), list(bl.values()), size=3)
    assert np.array_equal(one.total, one.scales[1])


def test_seed_determinism(z2):
    b, bl = z2
    a = gff.sample_truncated_gff(b, 2, stream(99, "det"), list(bl.values()), size=10)
    c = gff.sample_truncated_gff(b, 2, stream(99, "det"), list(bl.values()), size=10)
    assert all(np.array_equal(a.scales[n], c.scales[n]) for n in (1, 2))


def test_sampling_refuses_unverified_block():
    b = ball(FreeAbelian(2), 2)
    bad = green_block(b, 1)
    bad.matrix = bad.matrix.copy()
    bad.matrix[0, 1] = -1.0
    with pytest.raises(ValueError):
        gff.sample_truncated_gff(b, 1, stream(0), [bad])


def test_excursion_examples(z2):
    b, bl = z2
    phi = gff.sample_field(bl[1], stream(15, "exc"), 50)
    assert gff.excursion(phi, phi.min() - 1).all()
    assert not gff.excursion(phi, phi.max() + 1).any()
    hi, lo = gff.excursion(phi, 0.3), gff.excursion(phi, -0.2)
    assert np.all(lo | ~hi)
    cfg = gff.excursion(phi[0], 0.0, window=Window.from_ball(b))
    assert np.array_equal(cfg.open, phi[0] > 0)


def test_conditioning_examples():
    Z = ball(FreeAbelian(1), 8)
    blk = green_block(Z, 1)
    blk.verify()
    phi = gff.sample_field(blk, stream(16, "cond"), S)
    x = Z.origin
    lam = 0.7
    shifted = gff.condition_on_value(phi, blk, x, lam)
    assert np.all(shifted[:, x] == lam)
    far = Z.locate((3,))
    assert np.array_equal(shifted[:, far], phi[:, far])
    y = Z.locate((1,))
    g = blk.row(x)
    r = g[y] / g[x]
    resid_sd = math.sqrt(blk.row(y)[y] - g[y] ** 2 / g[x])
    assert within(shifted[:, y].mean(), lam * r, resid_sd / math.sqrt(S))


def test_union_domination():
    b = ball(FreeAbelian(2), 4)
    blocks = green_blocks(b, [1, 2])
    verify_blocks(blocks)
    fs = gff.sample_truncated_gff(b, 2, stream(17, "dom"), blocks, size=2000)
    rep = gff.check_union_domination([fs.scales[1], fs.scales[2]])
    assert rep.passed and rep.checked == 2000 * b.size
    # single scale: the event and the union coincide
    rep1 = gff.check_union_domination([fs.scales[1]], 1)
    assert rep1.passed and rep1.exceed == int((fs.scales[1] > gff.LAMBDA_1).sum())
    # constructed worst case sits exactly on the levels
    levels = [np.array([gff.lambda_n(1)]), np.array([gff.lambda_n(2)])]
    assert gff.check_union_domination(levels).violations == 0
