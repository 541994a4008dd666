import json

import numpy as np
import pytest

import oracles
from netresist import codingtree as ct
from netresist import entropy as en
from netresist import generators as gen
from netresist.errors import CapacityError, InputError
from netresist.experiments import random_connected_graph
from netresist.graph import Graph, Partition
from netresist.partition_search import exact_h2

# brute force over all set partitions (tests/oracles.py)
H2_C6 = 1.7924812503605783
HP_K4 = 1.6666666666666665


def test_flat_tree_gives_h1(k4, c6):
    for g in (k4, c6, gen.grid(3)):
        assert ct.hT(g, ct.CodingTree.flat(g.n)) == pytest.approx(en.h1(g), abs=1e-12)
    assert ct.hT(gen.path(2), ct.CodingTree.flat(2)) == 1.0


def test_two_level_tree_equals_hp():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 20))
        g = random_connected_graph(n, rng, p=0.3, weighted=bool(rng.random() < 0.5))
        p = Partition(rng.integers(0, int(rng.integers(1, n + 1)), size=n))
        assert ct.hT(g, ct.CodingTree.from_partition(p)) == pytest.approx(en.hP(g, p), abs=1e-9)


def test_cut_module_function_is_hT(c6):
    rng = np.random.default_rng(0)
    for _ in range(20):
        t = ct.random_coding_tree(6, rng)
        assert ct.hT_with_module_function(c6, t, ct.CUT) == ct.hT(c6, t)


def test_volume_module_function_gives_h1_for_any_tree(k4):
    g = random_connected_graph(15, 1, p=0.3, weighted=True)
    rng = np.random.default_rng(1)
    for _ in range(100):
        t = ct.random_coding_tree(15, rng)
        assert abs(ct.hT_with_module_function(g, t, ct.VOLUME) - en.h1(g)) < 1e-9
        t4 = ct.random_coding_tree(4, rng)
        assert ct.hT_with_module_function(k4, t4, ct.VOLUME) == pytest.approx(2.0, abs=1e-12)


def test_additive_module_function_collapses():
    g = random_connected_graph(12, 2, p=0.4)
    deg = g.degrees
    rng = np.random.default_rng(2)
    f_deg = ct.ModuleFunction.additive(deg)
    masses = rng.uniform(0, 1, size=12)
    masses *= g.vol / masses.sum() * 0.9
    f_any = ct.ModuleFunction.additive(masses)
    target_any = -np.sum(masses / g.vol * np.log2(deg / g.vol))
    for _ in range(30):
        t = ct.random_coding_tree(12, rng)
        assert ct.hT_with_module_function(g, t, f_deg) == pytest.approx(en.h1(g), abs=1e-9)
        assert ct.hT_with_module_function(g, t, f_any) == pytest.approx(target_any, abs=1e-9)


def test_module_function_validation():
    with pytest.raises(InputError):
        ct.ModuleFunction("flow")
    with pytest.raises(InputError):
        ct.ModuleFunction.additive([-1.0, 2.0])
    g = gen.path(3)
    with pytest.raises(InputError):
        ct.hT_with_module_function(g, ct.CodingTree.flat(3), ct.ModuleFunction.additive([100.0, 0, 0]))


def test_validate_tree(k4):
    assert ct.validate_tree(k4, ct.CodingTree.flat(4))
    assert not ct.validate_tree(k4, ((0, 1), (1, 2, 3)))
    assert not ct.validate_tree(k4, ((0, 1), (2,)))
    assert not ct.validate_tree(k4, ((0, 1), (2, 3, 7)))
    assert any("missing" in s for s in ct.tree_problems(4, ((0, 1), 2)))
    with pytest.raises(InputError):
        ct.hT(k4, ((0, 1), (1, 2, 3)))


def test_tree_json_round_trip_and_canonical_form():
    t = ct.CodingTree.from_json("[[2,[3,4]],[0,1]]")
    assert t.to_json() == "[[0,1],[2,[3,4]]]"
    assert ct.CodingTree.from_json(t.to_json()) == t
    assert ct.CodingTree(((0, 1), ((2, 3),))) == ct.CodingTree(((0, 1), (2, 3)))
    assert t.height == 3
    with pytest.raises(InputError):
        ct.CodingTree.from_json("[[0, []]]")
    assert json.loads(ct.CodingTree.flat(3).to_json()) == [0, 1, 2]


def test_from_partition_shapes():
    assert ct.CodingTree.from_partition(Partition.trivial(3)) == ct.CodingTree.flat(3)
    assert ct.CodingTree.from_partition(Partition.singletons(3)) == ct.CodingTree.flat(3)
    assert ct.CodingTree.from_partition(Partition([0, 0, 1])).root == ((0, 1), 2)


def test_hk_exact_examples(k4, c6):
    v1, t1 = ct.hK_exact(c6, 1)
    assert t1 == ct.CodingTree.flat(6) and v1 == pytest.approx(en.h1(c6))
    v, t = ct.hK_exact(k4, 2)
    assert v == pytest.approx(oracles.h2(4, list(k4.edges())), abs=1e-12)
    assert v == pytest.approx(HP_K4, abs=1e-12)
    v, t = ct.hK_exact(c6, 2)
    assert v == pytest.approx(H2_C6, abs=1e-12)
    assert t.height <= 2



def test_hk_two_routes_agree():
    rng = np.random.default_rng(9)
    for _ in range(25):
        g = random_connected_graph(int(rng.integers(3, 8)), rng, p=0.4)
        enum = ct.hK_exact(g, 2)
        dp = ct.hK_exact(g, 2, method="dp")
        assert dp[0] == pytest.approx(enum[0], abs=1e-12)
        assert enum[0] == exact_h2(g)[0]


def test_height_monotone_on_tiny_graphs():
    rng = np.random.default_rng(4)
    for _ in range(15):
        g = random_connected_graph(int(rng.integers(3, 8)), rng, p=0.3)
        values = [ct.hK_exact(g, k)[0] for k in (1, 2, 3, 4)]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-9
        _, t3 = ct.hK_exact(g, 3)
        assert t3.height <= 3 and ct.validate_tree(g, t3)


def test_hk_exact_limits():
    with pytest.raises(CapacityError):
        ct.hK_exact(gen.cycle(11), 2)
    with pytest.raises(CapacityError):
        ct.hK_exact(gen.cycle(9), 3)
    with pytest.raises(InputError):
        ct.hK_exact(gen.cycle(5), 0)


def test_hk_greedy(k4, c6):
    v, _ = ct.hK_greedy(k4, 2)
    assert ct.hK_exact(k4, 2)[0] - 1e-9 <= v <= en.h1(k4) + 1e-9
    assert ct.hK_greedy(c6, 2)[0] == pytest.approx(ct.hK_exact(c6, 2)[0], abs=1e-12)
    g = gen.complete_binary_tree(10)
    v2, t2 = ct.hK_greedy(g, 2)
    assert v2 <= en.hP(g, gen.tree_partition(10, 3)) + 1e-9
    v3, t3 = ct.hK_greedy(g, 3)
    assert t3.height <= 3 and v3 <= v2 + 1e-9
    with pytest.raises(InputError):
        ct.hK_greedy(g, 4)


def test_hk_greedy_is_upper_bound_for_k3():
    rng = np.random.default_rng(8)
    for _ in range(10):
        g = random_connected_graph(int(rng.integers(4, 9)), rng, p=0.35)
        assert ct.hK_greedy(g, 3)[0] >= ct.hK_exact(g, 3)[0] - 1e-9
