import collections
import math

import numpy as np
import pytest

from netresist import entropy as en
from netresist import generators as gen
from netresist.errors import InputError
from netresist.graph import Graph


def degree_histogram(g):
    return dict(collections.Counter(g.degrees.astype(int).tolist()))


def test_complete_binary_tree():
    g = gen.complete_binary_tree(2)
    assert g == gen.path(3).__class__(3, [(0, 1), (0, 2)]) and g.vol == 4
    g = gen.complete_binary_tree(3)
    assert g.n == 7 and g.vol == 12
    g = gen.complete_binary_tree(10)
    assert degree_histogram(g) == {2: 1, 1: 512, 3: 510}
    assert g.vol == 2**11 - 4
    with pytest.raises(InputError):
        gen.complete_binary_tree(1)


def test_tree_partition_sizes():
    p = gen.tree_partition(3, 1)
    assert sorted(p.sizes().tolist()) == [1, 1, 1, 1, 3]
    for H in range(3, 12):
        for k in range(1, H):
            p = gen.tree_partition(H, k)
            sizes = sorted(p.sizes().tolist())
            expected = sorted([2**k - 1] * 2 ** (H - k) + [2 ** (H - k) - 1])
            assert sizes == expected
    with pytest.raises(InputError):
        gen.tree_partition(5, 5)


def test_tree_partition_modules_are_subtrees():
    g = gen.complete_binary_tree(8)
    p = gen.tree_partition(8, 3)
    for mod in p.modules():
        sub = set(mod.tolist())
        internal = sum(1 for a, b, _ in g.edges() if a in sub and b in sub)
        assert internal == len(sub) - 1


def test_tree_partition_h12_bound():
    g = gen.complete_binary_tree(12)
    assert en.hP(g, gen.tree_partition(12, 3)) <= 8.0


def test_grid():
    assert gen.grid(2) == gen.cycle(4).__class__(4, [(0, 1), (1, 3), (3, 2), (2, 0)])
    g = gen.grid(3)
    assert g.vol == 24
    g = gen.grid(10)
    assert g.m == 180 and g.vol == 4 * 10 * 9
    assert degree_histogram(g) == {2: 4, 3: 32, 4: 64}
    with pytest.raises(InputError):
        gen.grid(1)


def test_grid_partition():
    p = gen.grid_partition(4, 2)
    assert p.L == 4 and p.sizes().tolist() == [4, 4, 4, 4]
    g = gen.grid(64)
    p = gen.grid_partition(64, 6)
    assert en.hP(g, p) <= 2 * math.log2(6) + 7 / 6
    sizes = sorted(set(p.sizes().tolist()))
    assert sizes == [16, 24, 36]
    p = gen.grid_partition(3, 3)
    assert p.L == 1
    assert en.hP(gen.grid(3), p) == pytest.approx(en.h1(gen.grid(3)))


def test_small_families():
    assert gen.complete_graph(4).m == 6
    assert set(gen.cycle(6).degrees.tolist()) == {2.0}
    assert gen.path(2) == Graph(2, [(0, 1)])
    assert gen.star(3).degrees.tolist() == [3.0, 1.0, 1.0, 1.0]
    for bad in (lambda: gen.complete_graph(1), lambda: gen.cycle(2), lambda: gen.path(1)):
        with pytest.raises(InputError):
            bad()


def test_complete_partition_is_near_equal():
    for n in (7, 16, 64):
        p = gen.complete_partition(n)
        assert p.L in (2, 3) and p.sizes().max() - p.sizes().min() <= 1


def test_random_regular():
    g = gen.random_regular(4, 3, 0)
    assert g == gen.complete_graph(4)
    for seed in range(20):
        g = gen.random_regular(6, 2, seed)
        assert g.is_connected and degree_histogram(g) == {2: 6}
    g = gen.random_regular(100, 3, 1)
    assert degree_histogram(g) == {3: 100}
    assert g == gen.random_regular(100, 3, 1)
    with pytest.raises(InputError):
        gen.random_regular(5, 3, 0)


def test_level_parameter():
    assert gen.level_parameter(8, 2) == 1
    assert gen.level_parameter(2**16, 2) == 3
    assert gen.level_parameter(256, 3) == 1


def test_spanning_tree_partition_examples():
    p = gen.spanning_tree_partition(gen.path(8))
    assert p.as_lists() == [[0, 1], [2, 3], [4, 5], [6, 7]]
    p = gen.spanning_tree_partition(gen.star(5))
    assert p.L == 1
    cert = gen.bounded_degree_certificate(gen.star(5))
    assert cert.certified_resistance == 0.0


def test_spanning_tree_modules_are_connected():
    g = gen.random_regular(256, 3, 2)
    p = gen.spanning_tree_partition(g)
    cert = gen.bounded_degree_certificate(g, p)
    assert cert.size_range_ok
    for mod in p.modules()[:-1]:
        sub = Graph.from_arrays(len(mod), *_induced(g, mod))
        assert sub.is_connected
        assert sub.m >= len(mod) - 1


def _induced(g, mod):
    index = {v: i for i, v in enumerate(mod.tolist())}
    u, v = [], []
    for a, b, _ in g.edges():
        if a in index and b in index:
            u.append(index[a])
            v.append(index[b])
    return u, v


def test_certificate_chain_is_monotone():
    for n in (64, 256):
        cert = gen.bounded_degree_certificate(gen.random_regular(n, 3, n))
        assert all(cert.steps_hold)
        assert cert.satisfied
        assert cert.lines["conductance_form"] == pytest.approx(cert.certified_resistance, abs=1e-9)


def test_security_model_a0_all_seeds():
    g, tr = gen.security_model(gen.SecurityModelParams(n=300, a=0.0, d=3, rng_seed=1))
    assert tr.color_count == 300 and all(tr.seed_flags)
    p = gen.natural_partition(tr)
    assert p.L == 300
    assert en.hP(g, p) == pytest.approx(en.h1(g))
    stats = gen.trace_statistics(tr, g)
    assert stats["max_community_size"] == 1
    assert stats["global_edge_branch"] == "a=0"


def test_security_model_is_deterministic_and_simple():
    prm = gen.SecurityModelParams(n=3000, a=1.5, d=4, rng_seed=42)
    g1, t1 = gen.security_model(prm)
    g2, t2 = gen.security_model(prm)
    assert list(g1.edges()) == list(g2.edges())
    assert t1.to_json() == t2.to_json()
    assert g1.is_connected
    assert t1.color_count == len(set(t1.colors)) == gen.natural_partition(t1).L
    assert sum(t1.seed_flags) == t1.color_count


def test_security_model_edge_accounting():
    prm = gen.SecurityModelParams(n=2000, a=1.5, d=4, rng_seed=3)
    g, tr = gen.security_model(prm)
    n0 = prm.seed_size
    assert g.m + tr.shortfall == n0 * (n0 - 1) // 2 + prm.d * (prm.n - n0)
    col = np.asarray(tr.colors)
    for a, b, _ in g.edges():
        later = max(a, b)
        if not tr.seed_flags[later]:
            assert col[a] == col[b]
        else:
            assert col[a] != col[b] or later < n0


def test_security_model_params():
    with pytest.raises(InputError):
        gen.SecurityModelParams(n=5, a=1.0, d=4)
    with pytest.raises(InputError):
        gen.SecurityModelParams(n=50, a=-1.0, d=4)
    with pytest.raises(InputError):
        gen.SecurityModelParams(n=50, a=1.0, d=1)
    prm = gen.SecurityModelParams(n=50, a=1.0, d=4)
    assert prm.p(2) == 1.0
    assert prm.p(3) == pytest.approx(1 / math.log(3))
    assert prm.p(100) == pytest.approx(1 / math.log(100))


def test_trace_statistics_branches():
    for a, branch, coef in ((2.0, "a>1", 2.5 * 3), (0.5, "0<a<1", 5)):
        prm = gen.SecurityModelParams(n=4000, a=a, d=4, rng_seed=1)
        g, tr = gen.security_model(prm)
        stats = gen.trace_statistics(tr, g, b=1.0)
        assert stats["global_edge_branch"] == branch
        lnln = math.log(math.log(4000))
        assert stats["global_edge_bound"] == pytest.approx(coef * lnln**2)
        assert stats["local_edges"] + stats["global_edges"] == g.m
