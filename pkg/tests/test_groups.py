import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cayperc.groups import (DirectProduct, FreeAbelian, FreeGroup, GroupError, Heisenberg3, Minimality,
                            check_minimality, default_generators, evaluate_word, group_from_config, make_group,
                            quotient_hom, symmetrize)

ints = st.integers(-50, 50)


def heis_matrix(g):
    a, b, c = g
    return np.array([[1, a, c], [0, 1, b], [0, 0, 1]], dtype=object)


def random_elements(model, rng, count):
    if isinstance(model, FreeGroup):
        out = []
        for _ in range(count):
            n = rng.integers(0, 9)
            letters = rng.integers(1, model.k + 1, n) * rng.choice([-1, 1], n)
            out.append(model.check([int(x) for x in letters]))
        return out
    if isinstance(model, DirectProduct):
        per = [random_elements(f, rng, count) for f in model.factors]
        return [tuple(p[i] for p in per) for i in range(count)]
    width = 3 if isinstance(model, Heisenberg3) else model.d
    return [tuple(int(x) for x in row) for row in rng.integers(-1000, 1001, (count, width))]


FAMILIES = [FreeAbelian(1), FreeAbelian(3), Heisenberg3(), FreeGroup(2), FreeGroup(3),
            DirectProduct((FreeGroup(2), FreeAbelian(1)))]


@pytest.mark.parametrize("model", FAMILIES, ids=lambda m: m.name)
def test_axioms_on_ten_thousand_triples(model):
    rng = np.random.default_rng(12345)
    xs, ys, zs = (random_elements(model, rng, 10_000) for _ in range(3))
    e = model.identity()
    for g, h, k in zip(xs, ys, zs):
        assert model.mul(model.mul(g, h), k) == model.mul(g, model.mul(h, k))
        assert model.mul(g, model.inv(g)) == e
        assert model.mul(model.inv(g), g) == e
        assert model.mul(g, e) == g == model.mul(e, g)


@given(st.tuples(ints, ints, ints), st.tuples(ints, ints, ints))
@settings(max_examples=300, deadline=None)
def test_heisenberg_matches_matrix_oracle(g, h):
    H = Heisenberg3()
    assert np.array_equal(heis_matrix(H.mul(g, h)), heis_matrix(g).dot(heis_matrix(h)))


@given(st.lists(st.integers(-3, 3).filter(bool), max_size=12), st.lists(st.integers(-3, 3).filter(bool), max_size=12))
@settings(max_examples=300, deadline=None)
def test_free_group_products_are_reduced(a, b):
    F = FreeGroup(3)
    g = F.mul(F.check(a), F.check(b))
    assert all(g[i] != -g[i + 1] for i in range(len(g) - 1))
    assert F.mul(F.inv(g), g) == ()


@given(st.lists(st.tuples(ints, ints, ints), min_size=2, max_size=40, unique=True))
@settings(max_examples=200, deadline=None)
def test_codes_injective(elems):
    H = Heisenberg3()
    assert len({H.code(g) for g in elems}) == len(elems)


def test_batch_ops_agree_with_scalar():
    rng = np.random.default_rng(3)
    for model in (FreeAbelian(2), Heisenberg3()):
        a = np.array(random_elements(model, rng, 500))
        b = np.array(random_elements(model, rng, 500))
        prod = model.batch_mul(a, b)
        inv = model.batch_inv(a)
        for i in range(500):
            assert tuple(prod[i]) == model.mul(tuple(a[i]), tuple(b[i]))
            assert tuple(inv[i]) == model.inv(tuple(a[i]))


def test_identity_encodings():
    assert FreeAbelian(2).identity() == (0, 0)
    assert Heisenberg3().identity() == (0, 0, 0)
    with pytest.raises(GroupError):
        FreeAbelian(0)
    with pytest.raises(GroupError):
        make_group("Nope")


def test_arithmetic_examples():
    Z2 = FreeAbelian(2)
    assert Z2.mul((1, 0), (0, 1)) == (1, 1)
    F = FreeGroup(2)
    a = F.parse("a")
    assert F.mul(a, F.inv(a)) == ()
    H = Heisenberg3()
    a, b = (1, 0, 0), (0, 1, 0)
    comm = H.mul(H.mul(H.mul(a, b), H.inv(a)), H.inv(b))
    assert comm == (0, 0, 1)
    # the central element computed by 3x3 integer matrices
    M = heis_matrix(a).dot(heis_matrix(b)).dot(heis_matrix(H.inv(a))).dot(heis_matrix(H.inv(b)))
    assert np.array_equal(M, heis_matrix(comm))


def test_symmetrize_examples():
    F = FreeGroup(2)
    S = symmetrize(F, ["a", "b"])
    assert S.degree == 4
    assert set(S.elements) == {(1,), (-1,), (2,), (-2,)}
    Z2 = FreeAbelian(2)
    assert symmetrize(Z2, [(1, 0), (-1, 0), (0, 1)]).degree == 4
    with pytest.raises(GroupError):
        symmetrize(Z2, [(0, 0)])
    for i, j in enumerate(S.inverse_index):
        assert F.mul(S.elements[i], S.elements[j]) == ()


def test_minimality_examples():
    Z2 = FreeAbelian(2)
    assert check_minimality(default_generators(Z2)).kind is Minimality.MINIMAL_CERTIFIED
    S = symmetrize(Z2, [(1, 0), (0, 1), (1, 1)])
    v = check_minimality(S)
    assert v.kind is Minimality.NOT_MINIMAL
    assert v.witnesses
    for g, word in v.witnesses:
        assert evaluate_word(S, word) == S.elements[g]
    assert check_minimality(default_generators(FreeGroup(2))).certified
    assert check_minimality(default_generators(Heisenberg3())).certified


def test_minimality_heisenberg_redundant_central_generator():
    H = Heisenberg3()
    S = symmetrize(H, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    v = check_minimality(S)
    assert v.kind is Minimality.NOT_MINIMAL
    for g, word in v.witnesses:
        assert evaluate_word(S, word) == S.elements[g]


def test_quotient_examples():
    Z3, Z2, Z1 = FreeAbelian(3), FreeAbelian(2), FreeAbelian(1)
    q = quotient_hom(default_generators(Z3), Z2, [(1, 0), (0, 1), (0, 0)])
    assert set(q.generators.elements) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert len(q.dropped) == 2
    q = quotient_hom(default_generators(Z2), Z1, [(1,), (1,)])
    assert set(q.generators.elements) == {(1,), (-1,)}
    with pytest.raises(GroupError):
        quotient_hom(default_generators(Z3), Z2, [(1, 0), (0, 1)])


def test_group_from_config():
    model, gens = group_from_config({"family": "FreeGroup", "k": 2})
    assert gens.degree == 4
    model, gens = group_from_config({"family": "FreeAbelian", "d": 2, "generators": [[1, 0], [0, 1], [1, 1]]})
    assert gens.degree == 6
    model, gens = group_from_config({"family": "DirectProduct",
                                     "factors": [{"family": "FreeGroup", "k": 2}, {"family": "FreeAbelian", "d": 1}]})
    assert gens.degree == 6
