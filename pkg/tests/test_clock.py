import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clockrc.clock import build_weight_table, enumerate_spins, hamiltonian, pair_class
from clockrc.errors import DomainError
from clockrc.lattice import Graph
from clockrc.reflection import reflect


def float_table(q, beta):
    """Level table built by bucketing W over all spin pairs with float arithmetic."""
    w = {}
    for a in range(q):
        for b in range(q):
            val = math.exp(-beta * (1 - math.cos(2 * math.pi * (a - b) / q)))
            key = round(val, 12)
            w[key] = w.get(key, 0) + 1
    t = sorted(w)
    return np.array(t), np.array([w[v] for v in t])


def test_q2_table():
    wt = build_weight_table(2, 1.0)
    assert wt.k == 1
    np.testing.assert_allclose(wt.t, [math.exp(-2), 1.0], rtol=1e-15)
    np.testing.assert_allclose(wt.r, [math.exp(-2), 1 - math.exp(-2)], rtol=1e-14)
    assert wt.K.tolist() == [2, 2]


def test_q4_table():
    wt = build_weight_table(4, 1.0)
    assert wt.k == 2
    np.testing.assert_allclose(wt.t, [0.13533528323661, 0.36787944117144, 1.0], atol=1e-13)
    np.testing.assert_allclose(wt.r, [0.13533528323661, 0.23254415793483, 0.63212055882856], atol=1e-13)
    assert wt.K.tolist() == [4, 8, 4]


def test_q3_table():
    wt = build_weight_table(3, 2.0)
    assert wt.k == 1
    np.testing.assert_allclose(wt.t, [math.exp(-3), 1.0], rtol=1e-14)
    assert wt.K.tolist() == [6, 3]


@pytest.mark.parametrize("q,beta", [(2, 0.3), (5, 1.7), (6, 0.9), (7, 3.0), (12, 0.5)])
def test_table_matches_float_bucketing(q, beta):
    wt = build_weight_table(q, beta)
    t, K = float_table(q, beta)
    np.testing.assert_allclose(wt.t, t, atol=1e-12)
    assert wt.K.tolist() == K.tolist()


@pytest.mark.parametrize("q,beta", [(1, 1.0), (2, 0.0), (3, -1.0), (2.5, 1.0)])
def test_table_domain(q, beta):
    with pytest.raises(DomainError):
        build_weight_table(q, beta)


@settings(max_examples=200, deadline=None)
@given(q=st.integers(2, 64), beta=st.floats(0.01, 20.0))
def test_table_invariants(q, beta):
    wt = build_weight_table(q, beta)
    assert wt.k == (q // 2)
    assert abs(wt.r.sum() - 1.0) <= 1e-12
    assert np.all(np.diff(wt.t) > 0)
    assert wt.t[-1] == 1.0
    assert np.all((wt.r > 0) & (wt.r <= 1))
    assert wt.K.sum() == q * q and wt.K[-1] == q
    c = wt.class_of_level(np.arange(wt.k + 1))
    expect = np.where((c == 0) | (2 * c == q), q, 2 * q)
    assert np.array_equal(wt.K, expect)


def test_pair_class_examples():
    assert pair_class(3, 3, 7) == 0
    assert pair_class(0, 2, 4) == 2
    assert pair_class(1, 4, 5) == 2


@settings(max_examples=300)
@given(q=st.integers(2, 40), data=st.data())
def test_pair_class_symmetries(q, data):
    i = data.draw(st.integers(0, q - 1))
    j = data.draw(st.integers(0, q - 1))
    s = data.draw(st.integers(0, q - 1))
    a = data.draw(st.integers(0, q - 1))
    c = pair_class(i, j, q)
    assert c == pair_class(j, i, q) == pair_class((i + s) % q, (j + s) % q, q)
    assert c == pair_class(reflect(i, a, q), reflect(j, a, q), q)
    assert 0 <= c <= q // 2


@settings(max_examples=100)
@given(q=st.integers(2, 30), beta=st.floats(0.05, 5.0), data=st.data())
def test_weight_of_class_is_level(q, beta, data):
    wt = build_weight_table(q, beta)
    i = data.draw(st.integers(0, q - 1))
    j = data.draw(st.integers(0, q - 1))
    direct = math.exp(-beta * (1 - math.cos(2 * math.pi * (i - j) / q)))
    assert wt.t[wt.level_of_pair(i, j)] == pytest.approx(direct, rel=1e-12)
    assert wt.weight(i - j) == pytest.approx(direct, rel=1e-12)


def test_hamiltonian_examples():
    wt2 = build_weight_table(2, 1.0)
    assert hamiltonian(Graph(2, (1,), ((0, 1),)), [0, 0], wt2) == 0.0
    assert hamiltonian(Graph(2, (1,), ((0, 1),)), [1, 0], wt2) == pytest.approx(2.0)
    tri = Graph(3, (2,), ((0, 1), (0, 2), (1, 2)))
    assert hamiltonian(tri, [0, 1, 2], build_weight_table(3, 1.0)) == pytest.approx(4.5)


def test_hamiltonian_zero_iff_constant_on_components(corpus):
    wt = build_weight_table(3, 1.0)
    for g in corpus[:10]:
        for sigma in enumerate_spins(g, 3):
            h = hamiltonian(g, sigma, wt)
            assert h >= 0
            assert (h == 0) == all(sigma[a] == sigma[b] for a, b in g.edges)


def test_enumerate_spins_order_and_guard():
    g = Graph(3, (2,), ((0, 1), (1, 2)))
    s = enumerate_spins(g, 3)
    assert s.shape == (9, 3)
    assert np.all(s[:, 2] == 0)
    assert s[:4].tolist() == [[0, 0, 0], [0, 1, 0], [0, 2, 0], [1, 0, 0]]
    with pytest.raises(DomainError):
        enumerate_spins(g, 3, limit=8)
