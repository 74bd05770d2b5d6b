import math

import numpy as np
import pytest

from rgl import rng
from rgl.diagnostics import scan_matchings
from rgl.edges import EdgeStream, StreamConfig
from rgl.graph_state import DISCARD, ProcessState
from rgl.oracles import build_projective_plane
from rgl.strategies import (BLUE, DEFAULT_A1, RED, AdaptiveTwoPhase, BlockMatrixStrategy,
                            IsolatedMatching, OfflineOrientation, Orient,
                            ProjectivePlaneStrategy, RandomColoring, StrategySpec, Tag, block_of,
                            build_strategy, offline_orientation_coloring)


def stream(n, m, seed=0):
    return EdgeStream(StreamConfig(n, seed, m=m)).take(m)


def key(*path):
    return rng.derive_key(0, *path)


def test_random_coloring_frequencies():
    n, m, r = 1000, 60_000, 3
    us, vs = stream(n, m)
    colors, _, tags = RandomColoring(r, key(1)).play(ProcessState(n, r), us, vs)
    freq = np.bincount(colors, minlength=r) / m
    assert np.all(np.abs(freq - 1 / r) < 0.01)
    assert np.all(tags == Tag.RANDOM)


def test_orient_first_edge_and_overflow():
    s = ProcessState(10, 2)
    strat = Orient(2, key(2))
    d = strat.step(s, 0, 1)
    assert d.color == 0 and d.tag == Tag.ORIENT_LEVEL
    # force everything at one head; color saturates at r-1
    s.in_degree[:] = 5
    d = strat.decide(s, 2, 3)
    assert d.color == 1 and d.tag == Tag.ORIENT_OVERFLOW


def test_orient_colors_track_head_in_degree():
    n, r = 500, 4
    us, vs = stream(n, 2000, 3)
    state = ProcessState(n, r)
    colors, heads, _ = Orient(r, key(3)).play(state, us, vs)
    indeg = np.zeros(n, dtype=np.int64)
    for c, h in zip(colors, heads):
        indeg[h] += 1
        assert c == min(indeg[h], r) - 1
    assert np.array_equal(indeg, state.in_degree)


def test_isolated_matching_examples():
    s = ProcessState(6, 2)
    strat = IsolatedMatching(2, key(4))
    s.add_colored_edge(0, 1, BLUE)
    d = strat.decide(s, 1, 2)
    assert d.color == RED and d.tag == Tag.ISO_NEIGHBOR_BLUE
    s.add_colored_edge(3, 4, RED)
    d = strat.decide(s, 4, 5)
    assert d.color == BLUE and d.tag == Tag.ISO_NEIGHBOR_RED
    assert strat.decide(s, 0, 3).tag == Tag.ISO_BOTH_RANDOM
    assert strat.decide(s, 2, 5).tag == Tag.ISO_NONE_RANDOM
    with pytest.raises(ValueError):
        IsolatedMatching(3, key(4))


def test_isolated_matching_bookkeeping():
    n = 400
    us, vs = stream(n, 700, 5)
    state = ProcessState(n, 2)
    strat = IsolatedMatching(2, key(5))
    records = []
    for u, v in zip(us.tolist(), vs.tolist()):
        d = strat.step(state, u, v)
        records.append((u, v, d.color))
    iso, per = scan_matchings(state, records)
    mc = state.matching_counts
    assert (mc["I"], mc["B"], mc["R"]) == (iso, per.get(0, 0), per.get(1, 0))


@pytest.mark.parametrize("make", [
    lambda: RandomColoring(3, key(6)),
    lambda: Orient(3, key(6)),
    lambda: IsolatedMatching(2, key(6)),
    lambda: ProjectivePlaneStrategy(2, key(6)),
    lambda: BlockMatrixStrategy(None, key(6)),
    lambda: AdaptiveTwoPhase(0.2, key(6)),
])
def test_step_and_play_agree(make):
    n = 350
    us, vs = stream(n, 1200, 6)
    a, b = make(), make()
    sa = ProcessState(n, a.r, log=True)
    sb = ProcessState(n, b.r, log=True)
    per_edge = [a.step(sa, u, v) for u, v in zip(us.tolist(), vs.tolist())]
    colors = []
    for lo in range(0, len(us), 257):
        c, _, _ = b.play(sb, us[lo:lo + 257], vs[lo:lo + 257])
        colors.extend(c.tolist())
    assert [d.color for d in per_edge] == colors
    assert sa.edge_log == sb.edge_log
    assert np.array_equal(sa.stats, sb.stats)
    assert np.array_equal(sa.counts, sb.counts)


def test_block_of_is_contiguous_and_balanced():
    b = block_of(np.arange(700), 700, 7)
    assert np.all(np.diff(b) >= 0)
    assert np.bincount(b).tolist() == [100] * 7


def test_projective_plane_colors_by_line():
    q, n = 2, 700
    plane = build_projective_plane(q)
    strat = ProjectivePlaneStrategy(q, key(7))
    s = ProcessState(n, strat.r)
    assert strat.decide(s, 0, 99).color == DISCARD
    us, vs = stream(n, 3000, 7)
    colors, _, tags = strat.decide_batch(s, us, vs)
    bi, bj = block_of(us, n, 7), block_of(vs, n, 7)
    for c, i, j in zip(colors, bi, bj):
        if i == j:
            assert c == DISCARD
        else:
            assert i in plane.lines[c] and j in plane.lines[c]
    assert np.all((tags == Tag.PLANE_DISCARD) == (colors == DISCARD))


def test_block_matrix_table():
    n = 300
    strat = BlockMatrixStrategy(None, key(8))
    s = ProcessState(n, 2)
    assert strat.decide(s, 0, 150).color == 0
    assert strat.decide(s, 0, 250).color == 1
    assert strat.decide(s, 210, 299).color == 1
    us, vs = stream(n, 2000, 8)
    colors, _, _ = strat.decide_batch(s, us, vs)
    a1 = np.array(DEFAULT_A1)
    assert np.array_equal(colors == 0, a1[us * 3 // n, vs * 3 // n] == 1)


def test_adaptive_phases():
    n = 100
    strat = AdaptiveTwoPhase(0.2, key(9))
    s = ProcessState(n, 2)
    assert strat.switch_round(n) == 20
    us, vs = stream(n, 60, 9)
    colors, _, tags = strat.play(s, us, vs)
    assert np.all(colors[:20] == RED) and np.all(tags[:20] == Tag.PHASE_ONE)
    touched = np.zeros(n, dtype=bool)
    touched[us[:20]] = touched[vs[:20]] = True
    inside = touched[us[20:]] & touched[vs[20:]]
    assert np.array_equal(colors[20:] == RED, inside)
    with pytest.raises(ValueError):
        AdaptiveTwoPhase(0.5)


def test_adaptive_touched_fraction():
    n, t = 10**6, 0.189
    fracs = []
    for trial in range(20):
        m = int(t * n) + 1
        us, vs = EdgeStream(StreamConfig(n, trial, m=m)).take(m)
        strat = AdaptiveTwoPhase(t, key(10, trial))
        s = ProcessState(n, 2)
        strat.play(s, us, vs)
        fracs.append(strat.in_r.mean())
    assert abs(np.mean(fracs) - (1 - math.exp(-2 * t))) <= 0.003


def test_offline_small_cases():
    res = offline_orientation_coloring([0, 1, 2], [1, 2, 0], 3, 1, 0.0, key(11))
    assert res.feasible and res.kept.all()
    assert res.largest == [3]
    us, vs = zip(*[(a, b) for a in range(4) for b in range(a + 1, 4)])
    res = offline_orientation_coloring(us, vs, 4, 1, 0.0, key(11))
    assert not res.feasible and res.witness.density > 1
    res = offline_orientation_coloring([0, 1, 2], [1, 2, 0], 3, 1, 1.0, key(11))
    assert not res.kept.any() and res.largest == [1]


def test_offline_deletion_rate():
    n, r, eps = 10**4, 3, 0.2
    us, vs = EdgeStream(StreamConfig(n, 3, "gnm", m=2 * n)).take(2 * n)
    res = OfflineOrientation(r, eps, key(12)).run(us, vs, n)
    assert res.feasible
    assert abs(1 - res.kept.mean() - eps) < 0.01
    for c in range(r):
        sel = res.kept & (res.colors == c)
        assert np.bincount(res.vs[sel], minlength=n).max() <= 1


@pytest.mark.parametrize("spec", [
    StrategySpec("Nope", 2),
    StrategySpec("RandomColoring", 0),
    StrategySpec("IsolatedMatching", 3),
    StrategySpec("AdaptiveTwoPhase", 2, t=0.7),
    StrategySpec("ProjectivePlane", 7, q=4),
    StrategySpec("ProjectivePlane", 8, q=2),
    StrategySpec("BlockMatrix", 2, A1=[[1, 0], [1, 1]]),
    StrategySpec("OfflineOrientation", 2, eps=1.5),
])
def test_spec_validation(spec):
    with pytest.raises(ValueError):
        spec.validate()


def test_spec_round_trip_and_build():
    spec = StrategySpec("ProjectivePlane", 7, seed=3, q=2)
    assert StrategySpec.from_dict(spec.to_dict()) == spec
    assert isinstance(build_strategy(spec, 5), ProjectivePlaneStrategy)
    off = build_strategy(StrategySpec("OfflineOrientation", 2, eps=0.1), 5)
    assert not off.online
    a = build_strategy(StrategySpec("RandomColoring", 4), 1).draws.take(0, 50)
    b = build_strategy(StrategySpec("RandomColoring", 4), 2).draws.take(0, 50)
    assert not np.array_equal(a, b)
