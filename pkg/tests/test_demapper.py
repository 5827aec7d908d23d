import numpy as np
import pytest

from fuzzing import Q7, check_against_oracle
from oracles import sc_llrs
from pacfano import DemapperTree, f_min_sum, g_update
from pacfano.demapper import DemapperError, boxplus


def test_f_min_sum_examples():
    assert f_min_sum(0, 17, Q7) == 0
    assert f_min_sum(0, -17, Q7) == 0
    assert f_min_sum(8, -12, Q7) == -8
    assert f_min_sum(-8, -12, Q7) == 8


def test_f_min_sum_magnitude_bound():
    rng = np.random.default_rng(0)
    a, b = rng.integers(-64, 64, (2, 10000))
    assert (np.abs(f_min_sum(a, b)) <= np.minimum(np.abs(a), np.abs(b))).all()


def test_g_update_examples():
    assert g_update(5, 7, 0, Q7) == 12
    assert g_update(5, 7, 1, Q7) == 2
    assert g_update(60, 60, 0, Q7) == 63
    assert g_update(60, -60, 1, Q7) == -64


def test_g_update_wide_oracle():
    rng = np.random.default_rng(1)
    a, b = rng.integers(-64, 64, (2, 10000))
    u = rng.integers(0, 2, 10000)
    wide = b.astype(np.int64) + np.where(u == 1, -a, a)
    assert np.array_equal(g_update(a, b, u, Q7), np.clip(wide, -64, 63))


def test_boxplus_matches_tanh_rule():
    rng = np.random.default_rng(2)
    a, b = rng.normal(0, 6, (2, 2000))
    assert np.allclose(boxplus(a, b), 2 * np.arctanh(np.tanh(a / 2) * np.tanh(b / 2)), atol=1e-9)


def test_n1_passthrough():
    tree = DemapperTree(1, Q7).reset([-7])
    assert tree.demap(0, []) == (-7, 0)


def test_n2_hand_example():
    tree = DemapperTree(2, Q7).reset([8, 12])
    assert tree.demap(0, []) == (8, 1)
    assert tree.demap(1, [0]) == (20, 1)
    assert tree.demap(1, [1]) == (4, 1)


def test_n8_forward_pass_cost():
    rng = np.random.default_rng(3)
    l = rng.integers(-64, 64, 8)
    u = rng.integers(0, 2, 8).astype(np.uint8)
    tree = DemapperTree(8, Q7).reset(l)
    total = 0
    for i in range(8):
        z, cost = tree.demap(i, u)
        assert z == sc_llrs(l, u, i, -64, 63)
        total += cost
    assert total == 14 == tree.activations


@pytest.mark.parametrize("N", [2, 4, 8, 16, 32])
def test_backtracking_requests_match_oracle(N):
    assert check_against_oracle(N, vectors=600, seed=N) > 0


def test_float_tree_uses_exact_boxplus():
    rng = np.random.default_rng(4)
    l = rng.normal(1.0, 2.0, 16)
    u = rng.integers(0, 2, 16).astype(np.uint8)
    tree = DemapperTree(16).reset(l)
    for i in range(16):
        z, _ = tree.demap(i, u)
        assert z == pytest.approx(sc_llrs(l, u, i, exact=True), abs=1e-9)


def test_cache_hit_costs_nothing():
    tree = DemapperTree(16, Q7).reset(np.arange(-8, 8))
    u = np.zeros(16, np.uint8)
    z, cost = tree.demap(5, u)
    assert cost > 0
    assert tree.demap(5, u) == (z, 0)
    assert tree.cached(5) == z


def test_prefix_change_invalidates():
    l = np.array([3, -9, 14, 2, -5, 7, 11, -1])
    tree = DemapperTree(8, Q7).reset(l)
    u = np.zeros(8, np.uint8)
    for i in range(8):
        tree.demap(i, u)
    u[2] = 1
    for i in range(3, 8):
        z, _ = tree.demap(i, u)
        assert z == sc_llrs(l, u, i, -64, 63)
    with pytest.raises(DemapperError):
        DemapperTree(8, Q7).reset(l).cached(4)


def test_reset_semantics():
    l = np.array([5, -3, 12, 0])
    fresh = DemapperTree(4, Q7).reset(l)
    used = DemapperTree(4, Q7).reset([1, 1, 1, 1])
    used.demap(3, [1, 0, 1])
    used.reset(l)
    u = np.array([1, 0, 0, 1], np.uint8)
    assert [fresh.demap(i, u) for i in range(4)] == [used.demap(i, u) for i in range(4)]


def test_errors():
    tree = DemapperTree(8, Q7)
    with pytest.raises(DemapperError):
        tree.demap(0, [])
    with pytest.raises(DemapperError):
        tree.reset(np.zeros(7))
    tree.reset(np.zeros(8))
    with pytest.raises(DemapperError):
        tree.demap(8, np.zeros(8))
    with pytest.raises(DemapperError):
        tree.demap(4, [0, 1])
    with pytest.raises(ValueError):
        DemapperTree(6)
