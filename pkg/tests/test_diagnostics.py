import numpy as np
import pytest

from rgl import diagnostics
from rgl.diagnostics import (SmallGraph, core_peel, count_paths, cycle_counts,
                             densest_small_subsets, essential_edges, orient_essential_fractions,
                             short_cycle_census, split_susceptibility_check)
from rgl.edges import EdgeStream, StreamConfig
from rgl.orientation import Infeasible, exact_r_orientation


def path_graph(n):
    return SmallGraph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return SmallGraph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return SmallGraph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def gnm(n, m, seed):
    us, vs = EdgeStream(StreamConfig(n, seed, "gnm", m=m)).take(m)
    return SmallGraph(n, list(zip(us.tolist(), vs.tolist())))


def test_small_graph_collapses_repeats():
    g = SmallGraph(3, [(0, 1), (1, 0), (1, 2)], colors=[0, 1, 1])
    assert g.edges == [(0, 1), (1, 2)] and g.colors == [0, 1]
    with pytest.raises(ValueError):
        SmallGraph(3, [(1, 1)])


def test_count_paths_examples():
    assert count_paths(path_graph(6), 0, 5) == 1
    c = cycle_graph(7)
    assert all(count_paths(c, 0, v) == 2 for v in range(1, 7))
    # theta graph: 0 and 1 joined by three internally disjoint paths
    theta = SmallGraph(7, [(0, 2), (2, 1), (0, 3), (3, 4), (4, 1), (0, 5), (5, 6), (6, 1)])
    assert count_paths(theta, 0, 1) == 3
    assert count_paths(complete_graph(6), 0, 1, cap=10) == 10


def test_essential_edges_examples():
    assert essential_edges(path_graph(5), [0, 1, 2, 3, 4]) == [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert essential_edges(cycle_graph(6), [0, 1, 2, 3]) == []
    two_triangles = SmallGraph(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)])
    assert essential_edges(two_triangles, [0, 2, 3, 5]) == [(2, 3)]
    with pytest.raises(ValueError):
        essential_edges(path_graph(4), [0, 2])


def test_cycle_census_examples():
    assert short_cycle_census(complete_graph(3), 3) == 1
    assert cycle_counts(complete_graph(4), 4) == {3: 4, 4: 3}
    assert short_cycle_census(complete_graph(4), 4) == 7
    assert short_cycle_census(path_graph(30), 12) == 0
    assert cycle_counts(cycle_graph(9), 12)[9] == 1
    with pytest.raises(ValueError):
        cycle_counts(path_graph(3), 13)


def test_short_cycles_in_sparse_random_graphs():
    n, lam, L = 2000, 1.5, 8
    budget = 3 * sum(lam**k / (2 * k) for k in range(3, L + 1))
    for seed in range(20):
        assert short_cycle_census(gnm(n, int(lam * n / 2), seed), L) <= budget


def test_densest_subsets_examples():
    ratio, _ = densest_small_subsets(path_graph(8))
    assert ratio < 1
    ratio, witness = densest_small_subsets(complete_graph(4))
    assert ratio == 1.5 and witness == [0, 1, 2, 3]
    ratio, _ = densest_small_subsets(cycle_graph(40), max_size=10)
    assert ratio == pytest.approx(9 / 10)


def test_infeasible_witness_is_dense():
    g = complete_graph(5)
    us, vs = zip(*g.edges)
    o = exact_r_orientation(us, vs, 5, 1)
    assert isinstance(o, Infeasible)
    sub = SmallGraph(5, [e for e in g.edges if e[0] in o.vertices and e[1] in o.vertices])
    ratio, _ = densest_small_subsets(sub)
    assert ratio > 1


def test_core_peel_examples():
    assert core_peel(path_graph(10), 2) == ([], 0.0)
    core, avg = core_peel(complete_graph(5), 3)
    assert core == [0, 1, 2, 3, 4] and avg == 4


def test_three_core_of_dense_random_graph():
    n = 10**4
    hits = sum(core_peel(gnm(n, int(2.2 * n), seed), 3)[1] > 4 for seed in range(10))
    assert hits >= 9


def test_split_susceptibility_single_edge():
    res = split_susceptibility_check(SmallGraph(2, [(0, 1)], colors=[1]))
    assert res["S"] == 2 and res["S_split"] == 3
    assert res["forest"] and res["bound"] == 3 and res["holds"]


def test_split_susceptibility_monochromatic_tree():
    n = 20
    res = split_susceptibility_check(SmallGraph(n, [(i, i + 1) for i in range(n - 1)],
                                                colors=[0] * (n - 1)))
    assert res["S_split"] == res["S"] + 1


def test_split_susceptibility_random_forests():
    assert diagnostics.check_split_forests(1000, 100).passed


def test_split_susceptibility_cyclic_allowance():
    # K_6 with both color classes spanning: the split sum exceeds S by s^2/n,
    # more than 1 + 2 * (cyclic vertex fraction)
    n, s = 6, 6
    path_a = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]
    path_b = [(0, 2), (2, 4), (4, 1), (1, 3), (3, 5)]
    edges = path_a + path_b
    g = SmallGraph(n, edges, colors=[0] * 5 + [1] * 5)
    res = split_susceptibility_check(g)
    assert not res["forest"]
    assert res["S_split"] - res["S"] == pytest.approx(s * s / n)
    assert res["S_split"] > res["S"] + 1 + 2 * s / n
    assert res["holds"]


def test_essential_fractions_are_fractions():
    fr = orient_essential_fractions(n=2000, r=3, samples=20, seed=1)
    assert len(fr) > 0
    assert all(0 <= f <= 1 for f in fr)


def test_battery_passes():
    results = diagnostics.run_battery(0)
    assert len(results) == 8
    for res in results:
        assert res.passed, f"{res.name}: {res.detail}"
