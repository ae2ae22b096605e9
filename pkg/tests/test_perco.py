import math

import numpy as np
import pytest

from cayperc.cayley import build_ball
from cayperc.clusters import PercConfig, Window
from cayperc.gff import lambda_n, sample_field
from cayperc.groups import FreeAbelian, default_generators
from cayperc.kernel import green_blocks, verify_blocks
from cayperc.perco import (Bernoulli, EventError, Excursion, Hybrid, InterpolationPoint, NoCrossingError,
                           bernoulli_sample, comparison_experiment, connection_prob, hybrid_open, hybrid_sample,
                           pc_estimate, pc_window, quotient_experiment, russo_d1, russo_d2)
from cayperc.rng import stream


def ball(model, R):
    return build_ball(model, default_generators(model), R)


@pytest.fixture(scope="module")
def z2r3():
    b = ball(FreeAbelian(2), 3)
    blocks = green_blocks(b, [1, 2])
    verify_blocks(blocks)
    return b, blocks


def test_bernoulli_extremes_and_density():
    b = ball(FreeAbelian(2), 3)
    assert bernoulli_sample(b, 1.0, stream(1)).open.all()
    assert not bernoulli_sample(b, 0.0, stream(1)).open.any()
    w = Window.box(default_generators(FreeAbelian(2)), 250)  # 251001 vertices
    dens = np.mean([bernoulli_sample(w, 0.37, stream(2, i)).density for i in range(4)])
    n = 4 * w.size
    assert abs(dens - 0.37) <= 3 * math.sqrt(0.37 * 0.63 / n)
    a = bernoulli_sample(b, 0.5, stream(3, "x")).open
    c = bernoulli_sample(b, 0.5, stream(3, "x")).open
    assert np.array_equal(a, c)
    with pytest.raises(ValueError):
        Bernoulli(1.5)


def test_connection_examples(z2r3):
    b, blocks = z2r3
    est = connection_prob(b, Bernoulli(1.0), [b.origin], samples=200)
    assert est.estimate == 1.0 and est.stderr == 0.0
    est = connection_prob(b, Excursion(10.0, 2), [b.origin], samples=200, blocks=blocks)
    assert est.estimate == 0.0
    shell = np.flatnonzero(b.dist == b.radius)[:1]
    with pytest.raises(EventError):
        connection_prob(b, Bernoulli(0.5), shell, samples=10)


def test_connection_monotone_in_p():
    w = Window.box(default_generators(FreeAbelian(2)), 32)
    hi = connection_prob(w, Bernoulli(0.70), [w.origin], samples=10_000, seed=4)
    lo = connection_prob(w, Bernoulli(0.55), [w.origin], samples=10_000, seed=4)
    assert hi.estimate - lo.estimate > 3 * math.hypot(hi.stderr, lo.stderr)


def test_hybrid_examples(z2r3):
    b, blocks = z2r3
    gen = stream(9, "hybrid")
    S = 400
    U = gen.random((S, b.size))
    scales = {k: sample_field(blocks[k - 1], gen, S) for k in (1, 2)}
    t = 0.4
    op, prov = hybrid_open(t, 1, 0.3, U, scales, 2)
    omega0 = U < -math.expm1(-t)
    assert np.all(op >= omega0)
    assert np.array_equal(prov & np.uint64(1) == 1, omega0)
    # lambda -> infinity: the scale-n excursion is empty
    op_inf, _ = hybrid_open(t, 1, 1e9, U, scales, 2)
    tail = omega0 | (scales[2] > lambda_n(2))
    assert np.array_equal(op_inf, tail)
    assert np.all(op >= op_inf)
    # lowering lambda never closes a vertex
    prev = op_inf
    for lam in (2.0, 1.0, 0.0, -1.0, -2.0):
        now, _ = hybrid_open(t, 1, lam, U, scales, 2)
        assert np.all(now >= prev)
        prev = now
    assert op.mean() >= -math.expm1(-t) - 3 * math.sqrt(0.25 / op.size)
    cfg = hybrid_sample(InterpolationPoint(t, 1, 0.3), {k: v[0] for k, v in scales.items()}, gen, b, 2)
    assert isinstance(cfg, PercConfig) and np.all(cfg.opened_by(0) <= cfg.open)
    with pytest.raises(ValueError):
        InterpolationPoint(t, 2, 0.5)


def test_hybrid_model_estimate(z2r3):
    b, blocks = z2r3
    est = connection_prob(b, Hybrid(0.5, 1, 0.0, 2), [b.origin], samples=500, blocks=blocks)
    base = connection_prob(b, Bernoulli(-math.expm1(-0.5)), [b.origin], samples=500)
    assert 0.0 <= base.estimate <= 1.0 and est.estimate >= base.estimate - 3 * math.hypot(est.stderr, base.stderr)


def test_russo_sure_event():
    b = ball(FreeAbelian(2), 2)
    rep = russo_d1(b, [b.origin], t=40.0, samples=2000, seed=1)
    for line in rep.lines:
        assert line.lhs == 0.0 and line.rhs == 0.0


def test_russo_d1_small(z2r3):
    b, _ = z2r3
    rep = russo_d1(b, [b.origin], t=-math.log1p(-0.6), samples=20_000, seed=2)
    assert rep.asserted and rep.passed


def test_russo_d2_small(z2r3):
    b, blocks = z2r3
    rep = russo_d2(b, [b.origin], t=math.log(2.0), n=1, lam=0.0, samples=10_000, seed=3, blocks=blocks)
    assert rep.asserted and rep.passed
    assert rep.point["rho"] == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_pc_deterministic_and_worker_independent():
    gens = default_generators(FreeAbelian(2))
    grid = np.arange(0.45, 0.76, 0.01)
    a = pc_window(gens, 8, grid, 100, seed=5, workers=1)
    c = pc_window(gens, 8, grid, 100, seed=5, workers=2)
    assert np.array_equal(a.thresholds, c.thresholds)
    assert np.all(np.diff(a.curve) >= 0)
    with pytest.raises(NoCrossingError):
        pc_window(gens, 8, [0.05, 0.1], 50, seed=5)
    with pytest.raises(ValueError):
        pc_estimate(gens, [8], grid, 50)


def test_comparison_examples():
    b = ball(FreeAbelian(3), 4)
    rep = comparison_experiment(b, [0.999, 0.01], 1, samples=1000, seed=6)
    rows = {r["eps"]: r for r in rep.rows}
    assert not rows[0.999]["holds"]
    assert rows[0.01]["bernoulli"] > 0.95 and rows[0.01]["holds"]
    assert rep.h_check["per_sample_violations"] == 0 and rep.h_check["three_sigma"]


def test_quotient_linear_target_is_vacuous():
    gens = default_generators(FreeAbelian(2))
    rep = quotient_experiment(gens, FreeAbelian(1), [(1,), (0,)], [8, 12], [8, 12],
                              np.arange(0.4, 0.8, 0.02), np.arange(0.4, 0.8, 0.02), samples=100, seed=7)
    assert rep.passed is None and rep.target_pc is None and "vacuous" in rep.note


def test_quotient_identity_agrees_within_band():
    gens = default_generators(FreeAbelian(2))
    grid = np.arange(0.45, 0.76, 0.01)
    rep = quotient_experiment(gens, FreeAbelian(2), [(1, 0), (0, 1)], [8, 16], [8, 16], grid, grid,
                              samples=300, seed=8)
    gap = abs(rep.source_pc.estimate - rep.target_pc.estimate)
    assert gap <= 3 * math.hypot(rep.source_pc.sigma, rep.target_pc.sigma)
