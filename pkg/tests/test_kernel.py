from fractions import Fraction

import numpy as np
import pytest

from cayperc.cayley import build_ball
from cayperc.groups import FreeAbelian, FreeGroup, Heisenberg3, check_minimality, default_generators
from cayperc.kernel import (ExactnessError, green_block, green_blocks, green_truncated, heat_kernel, kernel_table,
                            max_kernel_profile, return_prob_checks, scale_range, scale_window, verify_blocks)

# lattice Green function of Z^3 at the origin (Watson's integral)
WATSON_Z3 = 1.516386059151978


def ball(model, R):
    return build_ball(model, default_generators(model), R)


def matrix_power_row(b, n):
    """Exact p_n(o, .) by powers of the rational transition matrix."""
    V, D = b.size, b.degree
    P = [[Fraction(0)] * V for _ in range(V)]
    for u in range(V):
        for v in b.neighbors[u]:
            if v >= 0:
                P[u][v] += Fraction(1, D)
    row = [Fraction(0)] * V
    row[b.origin] = Fraction(1)
    for _ in range(n):
        row = [sum(row[u] * P[u][v] for u in range(V)) for v in range(V)]
    return row


def test_kernel_examples():
    Z = ball(FreeAbelian(1), 6)
    assert heat_kernel(Z, Z.origin, 2).fraction(Z.origin) == Fraction(1, 2)
    Z2 = ball(FreeAbelian(2), 4)
    e1 = Z2.locate((1, 0))
    assert heat_kernel(Z2, Z2.origin, 1).fraction(e1) == Fraction(1, 4)
    assert heat_kernel(Z2, Z2.origin, 3).fraction(Z2.origin) == 0


def test_exact_rows_match_matrix_powers():
    b = ball(FreeAbelian(2), 4)
    for n in range(5):
        row = heat_kernel(b, b.origin, n)
        assert [row.fraction(i) for i in range(b.size)] == matrix_power_row(b, n)


@pytest.mark.parametrize("model", [FreeAbelian(3), Heisenberg3(), FreeGroup(2)], ids=lambda m: m.name)
def test_mass_conservation_and_symmetry(model):
    b = ball(model, 6)
    for n in range(1, 5):
        row = heat_kernel(b, b.origin, n)
        assert int(row.counts.sum()) == row.denominator
    # p_n(o, y) = p_n(y, o) for y near the origin
    n = 3
    row = heat_kernel(b, b.origin, n, exact=False)
    for y in np.flatnonzero(b.dist <= 2):
        back = heat_kernel(b, int(y), n, exact=False)
        assert abs(back.values[b.origin] - row.values[y]) <= 1e-12


def test_support_precondition():
    b = ball(FreeAbelian(2), 3)
    with pytest.raises(ExactnessError):
        heat_kernel(b, b.origin, 4)


def test_scale_bookkeeping():
    assert scale_window(1) == (0, 1)
    assert scale_window(2) == (2, 5)
    assert scale_range(1) == 2 and scale_range(3) == 14


def test_green_block_examples():
    Z = ball(FreeAbelian(1), 4)
    g2 = green_block(Z, 2)
    assert g2.diag == 7 / 8
    for model in (FreeAbelian(2), Heisenberg3(), FreeGroup(2)):
        b = ball(model, 4)
        g1 = green_block(b, 1)
        assert g1.diag == 1.0
        M = g1.dense()
        far = g1.pair_dist > 2
        assert np.all(M[far] == 0)


def test_block_consistency_exact():
    b = ball(FreeAbelian(2), 13)
    N = 3
    total = sum(Fraction(g.diag) for g in green_blocks(b, range(1, N + 1)))
    exact = sum(heat_kernel(b, b.origin, k).fraction(b.origin) for k in range(scale_window(N)[1] + 1))
    assert total == exact


def test_verify_blocks_and_injected_fault():
    b = ball(FreeAbelian(2), 6)
    blocks = green_blocks(b, [1, 2])
    rep = verify_blocks(blocks)
    assert rep.passed
    bad = green_block(b, 1)
    bad.matrix = bad.matrix.copy()
    bad.matrix[0, 1] = -bad.matrix[0, 1] - 0.1
    r = bad.verify()
    assert r.status == "fail" and not r.nonneg_ok


def test_window_too_small_is_skipped():
    b = ball(FreeAbelian(2), 4)
    blocks = green_blocks(b, [1, 3], max_kernel_radius=6)
    assert not blocks[0].skipped and blocks[1].skipped
    rep = verify_blocks(blocks)
    assert rep.blocks[1].status == "skipped"
    with pytest.raises(ExactnessError):
        green_block(b, 3, kernel_ball=ball(FreeAbelian(2), 6))


def test_tree_sectors_match_dense_spectrum():
    b = ball(FreeGroup(2), 4)
    for blk in green_blocks(b, [1, 2, 3]):
        sector = blk.verify().min_eig
        dense = np.linalg.eigvalsh(blk.dense())[0]
        assert abs(sector - dense) <= 1e-12


def test_tree_block_matches_generic_path():
    b = ball(FreeGroup(2), 3)
    tree = green_blocks(b, [2])[0].dense()
    kb = ball(FreeGroup(2), 7)
    table = kernel_table(kb, 5)
    G = table[2:6].sum(axis=0)
    M = np.array([[G[kb.index[b.model.mul(b.model.inv(x), y)]] for y in b.elements] for x in b.elements])
    assert np.allclose(tree, M, atol=1e-14)


def test_green_truncated_z3_approaches_watson():
    b = ball(FreeAbelian(3), 1)
    tr = green_truncated(b, 5)
    assert not tr.recurrent_warning
    partial = np.cumsum(tr.increments)
    assert np.all(np.diff(partial) > 0)
    assert partial[-1] < WATSON_Z3
    assert abs(partial[-1] + tr.tail_estimate - WATSON_Z3) <= tr.tail_estimate


def test_green_truncated_z2_warns():
    b = ball(FreeAbelian(2), 1)
    with pytest.warns(RuntimeWarning, match="recurrent"):
        tr = green_truncated(b, 4)
    assert tr.recurrent_warning and tr.tail_estimate == float("inf")


def test_green_truncated_single_scale():
    b = ball(FreeAbelian(2), 3)
    tr = green_truncated(b, 1)
    assert np.allclose(tr.partial, green_block(b, 1).row(b.origin))


def test_return_prob_examples():
    Z = ball(FreeAbelian(1), 10)
    assert heat_kernel(Z, Z.origin, 4).fraction(Z.origin) == Fraction(6, 16)
    rep = return_prob_checks(Z, 10, check_minimality(Z.gens))
    assert rep.passed
    F = ball(FreeGroup(2), 6)
    assert heat_kernel(F, F.origin, 2).fraction(F.origin) == Fraction(1, 4)
    rep = return_prob_checks(F, 6, check_minimality(F.gens))
    assert rep.one_over_D[1] and rep.passed
    assert heat_kernel(F, F.origin, 1).fraction(F.origin) == 0


def test_max_kernel_profile_tree_matches_generic():
    F = ball(FreeGroup(2), 6)
    tree = max_kernel_profile(F, 6)
    generic = [Fraction(1)] + [heat_kernel(F, F.origin, n).max_fraction() for n in range(1, 7)]
    assert tree == generic
