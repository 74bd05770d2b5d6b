"""Structural checkers for small graphs, plus the verification battery.

These are deliberately naive (DFS, BFS, subset enumeration) so they can
serve as independent references for the fast incremental machinery.
"""

import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import oracles, rng
from .graph_state import ProcessState, replay
from .orientation import (Infeasible, exact_r_orientation, greedy_indeg_coloring,
                          simple_edges)


class SmallGraph:
    """Simple undirected graph with optional per-edge colors.

    Repeated pairs are collapsed, keeping the first occurrence's color.
    """

    def __init__(self, n, edges, colors=None):
        self.n = n
        self.edges = []
        self.colors = [] if colors is not None else None
        seen = set()
        for i, (u, v) in enumerate(edges):
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            self.edges.append(key)
            if colors is not None:
                self.colors.append(int(colors[i]))
        self.adj = [[] for _ in range(n)]
        for u, v in self.edges:
            self.adj[u].append(v)
            self.adj[v].append(u)

    def color_class(self, color):
        return SmallGraph(self.n, [e for e, c in zip(self.edges, self.colors) if c == color])

    def has_edge(self, u, v):
        return v in self.adj[u]

    def components(self):
        """Vertex lists of the connected components, by BFS."""
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [s], deque([s])
            while queue:
                x = queue.popleft()
                for y in self.adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        comp.append(y)
                        queue.append(y)
            comps.append(comp)
        return comps

    def susceptibility(self):
        return sum(len(c) ** 2 for c in self.components()) / self.n


def count_paths(graph, u, v, cap=3):
    """Number of simple u-v paths, saturating at ``cap``."""
    if u == v:
        return 1
    count = 0
    on_path = [False] * graph.n
    on_path[u] = True
    stack = [(u, iter(graph.adj[u]))]
    while stack and count < cap:
        x, it = stack[-1]
        y = next(it, None)
        if y is None:
            on_path[x] = False
            stack.pop()
            continue
        if on_path[y]:
            continue
        if y == v:
            count += 1
            continue
        on_path[y] = True
        stack.append((y, iter(graph.adj[y])))
    return min(count, cap)


def _connected_without(graph, a, b, removed):
    seen = {a}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if x == b:
            return True
        for y in graph.adj[x]:
            if (min(x, y), max(x, y)) == removed or y in seen:
                continue
            seen.add(y)
            queue.append(y)
    return False


def essential_edges(graph, path):
    """Edges of ``path`` that every path between its two endpoints must use."""
    if len(path) < 2:
        return []
    for x, y in zip(path, path[1:]):
        if not graph.has_edge(x, y):
            raise ValueError(f"({x}, {y}) is not an edge of the graph")
    a, b = path[0], path[-1]
    out = []
    for x, y in zip(path, path[1:]):
        edge = (min(x, y), max(x, y))
        if not _connected_without(graph, a, b, edge):
            out.append(edge)
    return out


def cycle_counts(graph, max_len):
    """``{length: number of simple cycles}`` for lengths 3..max_len.

    Each cycle is enumerated from its smallest vertex, in both directions,
    and halved at the end.
    """
    if max_len > 12:
        raise ValueError("cycle census is limited to length 12")
    counts = {k: 0 for k in range(3, max_len + 1)}
    for s in range(graph.n):
        stack = [(s, [s])]
        while stack:
            x, path = stack.pop()
            for y in graph.adj[x]:
                if y == s and len(path) >= 3:
                    counts[len(path)] += 1
                elif y > s and y not in path and len(path) < max_len:
                    stack.append((y, path + [y]))
    return {k: c // 2 for k, c in counts.items()}


def short_cycle_census(graph, max_len):
    return sum(cycle_counts(graph, max_len).values())


def densest_small_subsets(graph, max_size=None):
    """Largest ``|E(U)| / |U|`` over small vertex sets; returns ``(ratio, U)``.

    Exhaustive over all subsets when n <= 20, otherwise over BFS balls.
    """
    n = graph.n
    max_size = n if max_size is None else max_size
    if n <= 20:
        masks = np.arange(1, 1 << n, dtype=np.int64)
        sizes = np.zeros_like(masks)
        for x in range(n):
            sizes += (masks >> x) & 1
        counts = np.zeros_like(masks)
        for u, v in graph.edges:
            counts += ((masks >> u) & 1) & ((masks >> v) & 1)
        ok = sizes <= max_size
        ratio = np.where(ok, counts / sizes, -1.0)
        best = int(np.argmax(ratio))
        witness = [x for x in range(n) if (masks[best] >> x) & 1]
        return float(ratio[best]), witness
    best, witness = -1.0, []
    for s in range(n):
        ball, frontier = {s}, [s]
        while frontier and len(ball) < max_size:
            nxt = []
            for x in frontier:
                for y in graph.adj[x]:
                    if y not in ball and len(ball) < max_size:
                        ball.add(y)
                        nxt.append(y)
            frontier = nxt
            e = sum(1 for u, v in graph.edges if u in ball and v in ball)
            if e / len(ball) > best:
                best, witness = e / len(ball), sorted(ball)
    return best, witness


def core_peel(graph, k):
    """k-core vertex set and the average degree of the subgraph it induces."""
    deg = [len(a) for a in graph.adj]
    alive = [True] * graph.n
    queue = deque(x for x in range(graph.n) if deg[x] < k)
    for x in queue:
        alive[x] = False
    while queue:
        x = queue.popleft()
        for y in graph.adj[x]:
            if alive[y]:
                deg[y] -= 1
                if deg[y] < k:
                    alive[y] = False
                    queue.append(y)
    core = [x for x in range(graph.n) if alive[x]]
    if not core:
        return core, 0.0
    return core, sum(deg[x] for x in core) / len(core)


def split_susceptibility_check(graph):
    """Compare the two color-class susceptibilities with the whole graph's.

    Tree components can raise ``S1 + S2`` above ``S`` by at most their
    vertex count over n; a component with a cycle and s vertices by at most
    ``s^2 / n``.  ``bound`` adds those allowances to S, so on forests it is
    exactly ``S + 1``.
    """
    n = graph.n
    comps = graph.components()
    comp_of = {}
    for i, c in enumerate(comps):
        for x in c:
            comp_of[x] = i
    edge_count = [0] * len(comps)
    for u, _ in graph.edges:
        edge_count[comp_of[u]] += 1
    s_total = sum(len(c) ** 2 for c in comps) / n
    s_split = graph.color_class(0).susceptibility() + graph.color_class(1).susceptibility()
    tree_vertices = sum(len(c) for i, c in enumerate(comps) if edge_count[i] == len(c) - 1)
    cyclic_sq = sum(len(c) ** 2 for i, c in enumerate(comps) if edge_count[i] >= len(c))
    forest = tree_vertices == n
    bound = s_total + (tree_vertices + cyclic_sq) / n
    return {
        "S": s_total,
        "S_split": s_split,
        "bound": bound,
        "slack": bound - s_split,
        "forest": forest,
        "holds": s_split <= bound + 1e-12,
    }


# -- brute-force references ----------------------------------------------------

def brute_force_orientable(us, vs, n, r):
    """Whether some of the 2^m orientations has every in-degree <= r."""
    m = len(us)
    if m > 22:
        raise ValueError("brute force limited to 22 edges")
    if m == 0:
        return True
    masks = np.arange(1 << m, dtype=np.int64)
    indeg = np.zeros((1 << m, n), dtype=np.int64)
    for i, (u, v) in enumerate(zip(us, vs)):
        bit = (masks >> i) & 1
        indeg[:, v] += bit
        indeg[:, u] += 1 - bit
    return bool((indeg.max(axis=1) <= r).any())


def bfs_component_sizes(n, us, vs):
    return sorted(len(c) for c in SmallGraph(n, list(zip(us, vs))).components()) if len(us) \
        else [1] * n


def scan_matchings(state, colors_of_edges):
    """From-scratch counts of isolated vertices and isolated monochromatic edges.

    ``colors_of_edges`` maps every processed (u, v, color) record; a vertex is
    on an isolated edge of color c when its only incident edge goes to a
    vertex whose only incident edge is that same one.
    """
    n = state.n
    incident = [[] for _ in range(n)]
    for u, v, c in colors_of_edges:
        if c < 0:
            continue
        incident[u].append((v, c))
        incident[v].append((u, c))
    iso = sum(1 for x in range(n) if not incident[x])
    per_color = {}
    for x in range(n):
        if len(incident[x]) == 1:
            y, c = incident[x][0]
            if len(incident[y]) == 1:
                per_color[c] = per_color.get(c, 0) + 1
    return iso, per_color


def orient_structure_ok(n, r, us, vs, colors, heads):
    """Every color d < r-1 has in-degree <= 1 and only unicyclic components."""
    for d in range(r - 1):
        sel = colors == d
        if not sel.any():
            continue
        if np.bincount(heads[sel], minlength=n).max() > 1:
            return False
        st = ProcessState(n, 1)
        st.apply_batch(us[sel], vs[sel], np.zeros(sel.sum(), dtype=np.int64))
        labels = st.tracker(0).labels()
        edges_per = np.bincount(labels[us[sel]], minlength=n)
        verts_per = np.bincount(labels, minlength=n)
        if np.any(edges_per > verts_per):
            return False
    return True


def shortest_path(graph, a, b):
    prev = {a: None}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if x == b:
            path = [b]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for y in graph.adj[x]:
            if y not in prev:
                prev[y] = x
                queue.append(y)
    return None


def orient_essential_fractions(n=2000, r=3, rounds=None, samples=50, min_len=8, seed=0):
    """Essential-edge fraction along shortest paths in ORIENT's overflow color.

    Reported only; the more-than-half statement is asymptotic.
    """
    from .strategies import Orient

    rounds = r * n if rounds is None else rounds
    key = rng.derive_key(seed, 109)
    pairs = rng.BlockedDraws(key, lambda g, s: g.integers(0, n, size=(s, 2)))
    raw = pairs.take(0, rounds)
    raw = raw[raw[:, 0] != raw[:, 1]]
    us, vs = raw[:, 0].copy(), raw[:, 1].copy()
    state = ProcessState(n, r)
    colors, _, _ = Orient(r, rng.derive_key(seed, 110)).play(state, us, vs)
    sel = colors == r - 1
    g = SmallGraph(n, list(zip(us[sel].tolist(), vs[sel].tolist())))
    gen = rng.block_generator(rng.derive_key(seed, 111), 0)
    fractions = []
    for _ in range(samples * 20):
        if len(fractions) >= samples:
            break
        a, b = (int(x) for x in gen.integers(0, n, size=2))
        path = shortest_path(g, a, b) if a != b else None
        if path is None or len(path) - 1 < min_len:
            continue
        fractions.append(len(essential_edges(g, path)) / (len(path) - 1))
    return fractions


# -- verification battery --------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_orientation_exactness(cases=500, seed=0):
    gen = rng.block_generator(rng.derive_key(seed, 101), 0)
    bad = 0
    for _ in range(cases):
        n = int(gen.integers(2, 9))
        r = int(gen.integers(1, 3))
        pairs = list(itertools.combinations(range(n), 2))
        hi = min(len(pairs), 16, r * n + 3)
        m = int(gen.integers(0, hi + 1))
        pick = gen.choice(len(pairs), size=m, replace=False)
        us = np.array([pairs[i][0] for i in pick], dtype=np.int64)
        vs = np.array([pairs[i][1] for i in pick], dtype=np.int64)
        res = exact_r_orientation(us, vs, n, r)
        truth = brute_force_orientable(us, vs, n, r)
        if isinstance(res, Infeasible):
            ok = (not truth) and res.induced_edges > r * len(res.vertices)
        else:
            ok = truth and res.consistent() and res.max_in_degree <= r
        bad += not ok
    return CheckResult("orientation_vs_bruteforce", bad == 0, f"{cases - bad}/{cases} agree")


def check_dsu_against_bfs(cases=500, seed=0):
    gen = rng.block_generator(rng.derive_key(seed, 102), 0)
    bad = 0
    for _ in range(cases):
        n = int(gen.integers(2, 201))
        r = int(gen.integers(1, 4))
        m = int(gen.integers(0, 2 * n))
        us = gen.integers(0, n, size=m)
        vs = (us + gen.integers(1, n, size=m)) % n
        cs = gen.integers(0, r, size=m)
        state = ProcessState(n, r, log=True)
        for u, v, c in zip(us.tolist(), vs.tolist(), cs.tolist()):
            state.add_colored_edge(u, v, c)
        ok = True
        for c in range(r):
            sel = cs == c
            sizes = bfs_component_sizes(n, us[sel], vs[sel])
            tr = state.tracker(c)
            ok &= sorted(tr.component_sizes().tolist()) == sizes
            ok &= tr.sum_sq == sum(s * s for s in sizes)
            ok &= tr.largest == max(sizes)
            ok &= tr.largest ** 2 <= tr.sum_sq
        again = replay(state.edge_log, n, r)
        ok &= np.array_equal(again.stats, state.stats)
        bad += not ok
    return CheckResult("dsu_vs_bfs", bad == 0, f"{cases - bad}/{cases} agree")


def check_planes(qs=(2, 3, 5, 7)):
    failures = []
    for q in qs:
        plane = oracles.build_projective_plane(q)
        r = q * q + q + 1
        ok = len(plane.lines) == r and all(len(line) == q + 1 for line in plane.lines)
        cover = {}
        for idx, line in enumerate(plane.lines):
            for pair in itertools.combinations(sorted(line), 2):
                cover[pair] = cover.get(pair, 0) + 1
        ok &= len(cover) == r * (r - 1) // 2 and set(cover.values()) == {1}
        ok &= r * math.comb(q + 1, 2) == math.comb(r, 2)
        if not ok:
            failures.append(q)
    return CheckResult("plane_pair_coverage", not failures,
                       f"q in {list(qs)}" + (f", failed {failures}" if failures else ""))


def check_spectral(max_k=50, tol=1e-9):
    worst = 0.0
    for k in range(2, max_k + 1):
        j = np.ones((k, k))
        worst = max(worst, abs(oracles.spectral_radius(j) - k))
        worst = max(worst, abs(oracles.spectral_radius(j - np.eye(k)) - (k - 1)))
        for t in (1, (2 * k) // 3, k - 1):
            a1, a2 = oracles.block_matrices(k, t)
            rho1, rho2 = oracles.block_eigen_closed_form(k, t)
            worst = max(worst, abs(oracles.spectral_radius(a1) - rho1),
                        abs(oracles.spectral_radius(a2) - rho2))
    return CheckResult("spectral_closed_forms", worst < tol, f"max deviation {worst:.2e}")


def check_split_forests(cases=1000, n=100, seed=0):
    gen = rng.block_generator(rng.derive_key(seed, 103), 0)
    bad = 0
    for _ in range(cases):
        # random forest: attach each vertex to an earlier one with prob 0.8
        edges, colors = [], []
        perm = gen.permutation(n)
        for i in range(1, n):
            if gen.random() < 0.8:
                edges.append((int(perm[i]), int(perm[gen.integers(0, i)])))
                colors.append(int(gen.integers(0, 2)))
        res = split_susceptibility_check(SmallGraph(n, edges, colors))
        bad += not (res["forest"] and res["S_split"] <= res["S"] + 1 + 1e-12)
    return CheckResult("split_susceptibility_forests", bad == 0, f"{cases - bad}/{cases} hold")


def check_greedy_paths(cases=20, n=50, seed=0):
    gen = rng.block_generator(rng.derive_key(seed, 104), 0)
    bad = 0
    for _ in range(cases):
        r = int(gen.integers(1, 4))
        m = int(gen.integers(n // 2, int(r * n * 0.8)))
        us = gen.integers(0, n, size=m)
        vs = (us + gen.integers(1, n, size=m)) % n
        us, vs = simple_edges(us, vs, n)
        orient = exact_r_orientation(us, vs, n, r)
        if isinstance(orient, Infeasible):
            continue
        colors = greedy_indeg_coloring(orient, r)
        g = SmallGraph(n, list(zip(orient.tails, orient.heads)), colors)
        for c in range(r):
            cls = g.color_class(c)
            if any(count_paths(cls, a, b) > 2 for a in range(n) for b in range(a + 1, n)):
                bad += 1
                break
    return CheckResult("greedy_coloring_path_counts", bad == 0, f"{cases - bad}/{cases} hold")


def check_orient_structure(trials=5, n=500, rounds=3000, r=4, seed=0):
    from .strategies import Orient

    bad = 0
    for trial in range(trials):
        key = rng.derive_key(seed, 105, trial)
        pairs = rng.BlockedDraws(key, lambda g, s: g.integers(0, n, size=(s, 2)))
        raw = pairs.take(0, rounds)
        keep = raw[:, 0] != raw[:, 1]
        us, vs = raw[keep, 0].copy(), raw[keep, 1].copy()
        state = ProcessState(n, r)
        colors, heads, _ = Orient(r, rng.derive_key(seed, 106, trial)).play(state, us, vs)
        bad += not orient_structure_ok(n, r, us, vs, colors, heads)
    return CheckResult("orient_unicyclic_classes", bad == 0, f"{trials - bad}/{trials} hold")


def check_matching_bookkeeping(n=300, rounds=600, seed=0):
    from .strategies import IsolatedMatching

    key = rng.derive_key(seed, 107)
    pairs = rng.BlockedDraws(key, lambda g, s: g.integers(0, n, size=(s, 2)))
    raw = pairs.take(0, rounds)
    raw = raw[raw[:, 0] != raw[:, 1]]
    state = ProcessState(n, 2)
    strat = IsolatedMatching(2, rng.derive_key(seed, 108))
    records, ok = [], True
    for u, v in raw.tolist():
        d = strat.step(state, u, v)
        records.append((u, v, d.color))
        if state.round % 50 == 0:
            iso, per = scan_matchings(state, records)
            mc = state.matching_counts
            ok &= (mc["I"], mc["B"], mc["R"]) == (iso, per.get(0, 0), per.get(1, 0))
    return CheckResult("matching_bookkeeping", ok, f"{state.round} rounds scanned")


def run_battery(seed=0):
    return [
        check_orientation_exactness(seed=seed),
        check_dsu_against_bfs(seed=seed),
        check_planes(),
        check_spectral(),
        check_split_forests(seed=seed),
        check_greedy_paths(seed=seed),
        check_orient_structure(seed=seed),
        check_matching_bookkeeping(seed=seed),
    ]
