from fractions import Fraction

import numpy as np
import pytest

from cayperc.cayley import build_ball
from cayperc.clusters import (PercConfig, UnionFind, Window, bfs_connected, closed_pivotal_batch, cluster_labels,
                              connected_batch, minimax_thresholds, pivotal_bruteforce, pivotal_set)
from cayperc.groups import FreeAbelian, FreeGroup, Heisenberg3, default_generators
from cayperc.rng import stream


def ball_window(model, R):
    return Window.from_ball(build_ball(model, default_generators(model), R))


WINDOWS = {
    "Z2": lambda: ball_window(FreeAbelian(2), 6),
    "H3": lambda: ball_window(Heisenberg3(), 4),
    "F2": lambda: ball_window(FreeGroup(2), 4),
    "Z3box": lambda: Window.box(default_generators(FreeAbelian(3)), 4),
}


def origin_mask(w):
    m = np.zeros(w.size, dtype=bool)
    m[w.origin] = True
    return m


def path_window(n):
    """Path 0 - 1 - ... - n-1 as a window; the shell is the last vertex."""
    nb = np.full((n, 2), -1, dtype=np.int64)
    for i in range(n):
        if i > 0:
            nb[i, 0] = i - 1
        if i < n - 1:
            nb[i, 1] = i + 1
    shell = np.zeros(n, dtype=bool)
    shell[-1] = True
    return Window(f"path{n}", nb, 0, shell, np.arange(n))


def cycle_window(n):
    nb = np.array([[(i - 1) % n, (i + 1) % n] for i in range(n)], dtype=np.int64)
    return Window(f"cycle{n}", nb, 0, np.zeros(n, dtype=bool), np.zeros(n, dtype=int))


def test_union_find():
    uf = UnionFind(6)
    uf.union(0, 1)
    uf.union(2, 3)
    uf.union(1, 3)
    assert uf.find(0) == uf.find(2)
    assert uf.find(4) != uf.find(0)


@pytest.mark.parametrize("name", list(WINDOWS))
def test_union_find_equals_bfs(name):
    w = WINDOWS[name]()
    gen = stream(5, "uf", name)
    A, B = origin_mask(w), w.shell
    opens = gen.random((1000, w.size)) < gen.uniform(0.3, 0.8, (1000, 1))
    opens[:, w.origin] |= gen.random(1000) < 0.8
    fast = connected_batch(opens, w.neighbors, A, B)
    slow = np.array([bfs_connected(o, w.neighbors, A, B) for o in opens])
    assert np.array_equal(fast, slow)
    assert 0 < fast.sum() < 1000


def test_cluster_labels_partition():
    w = WINDOWS["Z2"]()
    o = stream(1, "labels").random(w.size) < 0.6
    lab = cluster_labels(o, w.neighbors)
    assert np.all((lab == -1) == ~o)
    for u in np.flatnonzero(o):
        for v in w.neighbors[u]:
            if v >= 0 and o[v]:
                assert lab[u] == lab[v]


def test_connectivity_examples():
    w = path_window(5)
    cfg = PercConfig(w, np.ones(5, dtype=bool))
    assert cfg.connected([0], [4])
    closed = PercConfig(w, np.zeros(5, dtype=bool))
    assert not closed.connected([0], [0])
    labels, conn = closed.clusters_and_connectivity([0], [4])
    assert not conn and np.all(labels == -1)


def test_pivotal_examples():
    w = path_window(3)
    cfg = PercConfig(w, np.array([True, False, True]))
    closed, opened = pivotal_set(cfg, [0], [2])
    assert closed.tolist() == [False, True, False] and not opened.any()
    c = cycle_window(8)
    cfg = PercConfig(c, np.ones(8, dtype=bool))
    closed, opened = pivotal_set(cfg, [0], [4])
    # two disjoint arcs: only the endpoints themselves are pivotal
    assert set(np.flatnonzero(opened).tolist()) == {0, 4} and not closed.any()


@pytest.mark.parametrize("name", ["Z2", "H3", "F2"])
def test_fast_pivotal_equals_bruteforce(name):
    w = ball_window({"Z2": FreeAbelian(2), "H3": Heisenberg3(), "F2": FreeGroup(2)}[name], 2)
    gen = stream(6, "piv", name)
    A, B = origin_mask(w), w.shell
    for _ in range(1000):
        o = gen.random(w.size) < gen.uniform(0.3, 0.9)
        cfg = PercConfig(w, o)
        fc, fo = pivotal_set(cfg, A, B)
        bc, bo = pivotal_bruteforce(cfg, A, B)
        assert np.array_equal(fc, bc) and np.array_equal(fo, bo)
        assert not np.any(fc & fo)


def test_closed_pivotal_counts_match_marks():
    w = WINDOWS["Z2"]()
    gen = stream(7, "marks")
    opens = gen.random((200, w.size)) < 0.55
    counts, conn, marks = closed_pivotal_batch(opens, w.neighbors, origin_mask(w), w.shell, keep_marks=True)
    assert np.array_equal(counts, marks.sum(axis=1))
    assert np.array_equal(conn, connected_batch(opens, w.neighbors, origin_mask(w), w.shell))
    assert not np.any(marks & opens)


def test_exact_russo_identity_on_tiny_window():
    # full enumeration of Z^2 ball R=2 (13 vertices): d/dt P = sum_x P[x closed pivotal], p = 1 - e^-t
    w = ball_window(FreeAbelian(2), 2)
    V = w.size
    bits = (np.arange(2**V)[:, None] >> np.arange(V)[None, :]) & 1
    opens = bits.astype(bool)
    A, B = origin_mask(w), w.shell
    conn = connected_batch(opens, w.neighbors, A, B)
    piv, _ = closed_pivotal_batch(opens, w.neighbors, A, B)
    k = opens.sum(axis=1)
    p = Fraction(3, 5)
    q = 1 - p
    weight = [p**int(j) * q ** (V - int(j)) for j in range(V + 1)]
    dweight = [weight[j] * (Fraction(j) / p - Fraction(V - j) / q) for j in range(V + 1)]
    dPdp = sum(dweight[int(j)] for j, c in zip(k, conn) if c)
    lhs = q * dPdp  # dP/dt = (dp/dt) dP/dp = (1 - p) dP/dp
    rhs = sum(weight[int(j)] * int(c) for j, c in zip(k, piv))
    assert lhs == rhs
    assert lhs > 0


def test_minimax_thresholds_match_coupled_sweep():
    w = WINDOWS["Z2"]()
    gen = stream(8, "sweep")
    U = gen.random((300, w.size))
    thr = minimax_thresholds(U, w.neighbors, origin_mask(w), w.shell)
    grid = np.linspace(0.05, 0.95, 19)
    prev = np.zeros(300, dtype=bool)
    for p in grid:
        now = connected_batch(U < p, w.neighbors, origin_mask(w), w.shell)
        assert np.all(now >= prev)
        assert np.array_equal(now, thr < p)
        prev = now


def test_provenance_bits():
    w = path_window(4)
    prov = np.array([1, 0, 2 | 4, 0], dtype=np.uint64)
    cfg = PercConfig(w, prov != 0, prov)
    assert cfg.opened_by(0).tolist() == [True, False, False, False]
    assert cfg.opened_by(2).tolist() == [False, False, True, False]
    with pytest.raises(ValueError):
        PercConfig(w, np.zeros(4, dtype=bool), prov)
