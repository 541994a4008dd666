"""Graph families and their constructive partitions.

Covers complete binary trees, grids, complete graphs, cycles, paths, stars,
random regular graphs, the security model S(n, a, d) with its color trace,
and the spanning-tree partitioner for bounded-degree graphs.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field

import numpy as np

from . import entropy
from .errors import DomainError, InputError, RetryableError
from .graph import Graph, Partition


# ---- deterministic families --------------------------------------------------


def complete_binary_tree(depth: int) -> Graph:
    """Complete binary tree with ``depth`` levels in heap order (children of i: 2i+1, 2i+2)."""
    if depth < 2:
        raise InputError("tree depth must be at least 2")
    n = 2**depth - 1
    child = np.arange(1, n)
    return Graph.from_arrays(n, (child - 1) // 2, child, meta={"family": "tree", "depth": depth})


def tree_partition(depth: int, k: int) -> Partition:
    """Cut off every subtree of height k; the remaining top levels form one module.

    Gives 2^(H-k) modules of size 2^k - 1 plus a top module of size 2^(H-k) - 1.
    """
    H = depth
    if not 1 <= k <= H - 1:
        raise InputError(f"level cut k must lie in [1, {H - 1}]")
    n = 2**H - 1
    v = np.arange(n)
    level = np.floor(np.log2(v + 1)).astype(np.int64) + 1  # root is level 1
    top = H - k
    labels = np.zeros(n, dtype=np.int64)
    low = level > top
    # ancestor at level top+1, in heap indexing
    anc = ((v[low] + 1) >> (level[low] - (top + 1))) - 1
    labels[low] = anc - (2**top - 1) + 1
    return Partition(labels)


def grid(side: int) -> Graph:
    """side x side grid; vertex (r, c) has id r*side + c."""
    n = side
    if n < 2:
        raise InputError("grid side must be at least 2")
    idx = np.arange(n * n).reshape(n, n)
    u = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    v = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return Graph.from_arrays(n * n, u, v, meta={"family": "grid", "side": n})


def grid_partition(side: int, k: int) -> Partition:
    """Axis-aligned k x k blocks; blocks on the last row/column may be smaller."""
    n = side
    if not 2 <= k <= n:
        raise InputError(f"block size must lie in [2, {n}]")
    per_row = -(-n // k)
    r, c = np.divmod(np.arange(n * n), n)
    return Partition((r // k) * per_row + c // k)


def complete_graph(n: int) -> Graph:
    if n < 2:
        raise InputError("complete graph needs n >= 2")
    u, v = np.triu_indices(n, k=1)
    return Graph.from_arrays(n, u, v, meta={"family": "complete"})


def complete_partition(n: int, choices=(1, 2, 3)) -> Partition:
    """Best of the near-equal splits of K_n into L contiguous modules, L in ``choices``."""
    g = complete_graph(n)
    best = None
    for L in choices:
        if L > n:
            continue
        p = Partition(np.repeat(np.arange(L), [len(b) for b in np.array_split(np.arange(n), L)]))
        val = entropy.hP(g, p)
        if best is None or val < best[0] - 1e-12:
            best = (val, p)
    return best[1]


def cycle(n: int) -> Graph:
    if n < 3:
        raise InputError("cycle needs n >= 3")
    u = np.arange(n)
    return Graph.from_arrays(n, u, (u + 1) % n, meta={"family": "cycle"})


def path(n: int) -> Graph:
    if n < 2:
        raise InputError("path needs n >= 2")
    u = np.arange(n - 1)
    return Graph.from_arrays(n, u, u + 1, meta={"family": "path"})


def star(leaves: int) -> Graph:
    if leaves < 1:
        raise InputError("star needs at least one leaf")
    return Graph.from_arrays(leaves + 1, np.zeros(leaves, dtype=np.int64), np.arange(1, leaves + 1),
                             meta={"family": "star"})


def random_regular(n: int, d: int, rng_seed=None, max_tries: int = 10_000) -> Graph:
    """Connected simple d-regular graph from the pairing model.

    Any self-loop, repeated pair or disconnected outcome discards the whole
    pairing and starts over.
    """
    if n * d % 2:
        raise InputError("n*d must be even")
    if not 0 < d < n:
        raise InputError("need 0 < d < n")
    rng = np.random.default_rng(rng_seed)
    points = np.repeat(np.arange(n), d)
    for _ in range(max_tries):
        perm = rng.permutation(points).reshape(-1, 2)
        a, b = perm[:, 0], perm[:, 1]
        if np.any(a == b):
            continue
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        if len(np.unique(lo * n + hi)) != len(lo):
            continue
        g = Graph.from_arrays(n, lo, hi, meta={"family": "regular", "d": d})
        if g.is_connected:
            return g
    raise RetryableError(f"no connected simple {d}-regular graph on {n} vertices after {max_tries} pairings")


# ---- spanning-tree partition for bounded-degree graphs ---------------------------------


def _bfs_tree(g: Graph, root: int = 0):
    adj = g.adjacency_lists()
    parent = [-1] * g.n
    depth = [0] * g.n
    seen = [False] * g.n
    seen[root] = True
    order = [root]
    for v in order:
        for x in adj[v]:
            if not seen[x]:
                seen[x] = True
                parent[x] = v
                depth[x] = depth[v] + 1
                order.append(x)
    return parent, depth


def level_parameter(n: int, d: int) -> int:
    """l = max(1, floor(log_d log2 n) - 1), computed without float rounding at exact powers."""
    d = max(d, 2)
    target = math.log2(n) if n > 1 else 0.0
    t = 0
    while d ** (t + 1) <= target * (1 + 1e-12):
        t += 1
    return max(1, t - 1)


def spanning_tree_partition(g: Graph, l: int | None = None) -> Partition:
    """Modules cut from a BFS spanning tree rooted at vertex 0.

    Repeatedly take the deepest remaining vertex (ties to the smallest id),
    climb l ancestors (stopping at the root), and remove that ancestor's
    remaining subtree as one module.
    """
    g.require_connected()
    n = g.n
    d = int(g.neighbor_counts.max()) if n > 1 else 2
    if l is None:
        l = level_parameter(n, d)
    parent, depth = _bfs_tree(g)
    children = [[] for _ in range(n)]
    for v in range(n):
        if parent[v] >= 0:
            children[parent[v]].append(v)
    removed = [False] * n
    labels = np.full(n, -1, dtype=np.int64)
    j = 0
    for v in sorted(range(n), key=lambda x: (-depth[x], x)):
        if removed[v]:
            continue
        a = v
        for _ in range(l):
            if parent[a] < 0:
                break
            a = parent[a]
        stack = [a]
        while stack:
            x = stack.pop()
            removed[x] = True
            labels[x] = j
            stack.extend(c for c in children[x] if not removed[c])
        j += 1
    return Partition(labels)


@dataclass
class BoundedDegreeCertificate:
    """Every line of the bounded-degree lower-bound chain, evaluated at finite n.

    ``lines`` runs from the certified resistance down to the last finite-n
    expression; ``steps_hold[i]`` says whether lines[i] >= lines[i+1] - tol.
    """

    n: int
    d: int
    l: int
    module_sizes: list[int]
    lines: dict[str, float]
    steps_hold: list[bool]
    certified_resistance: float
    bound: float
    satisfied: bool
    size_range_ok: bool

    def to_dict(self):
        return asdict(self)


def bounded_degree_certificate(g: Graph, p: Partition | None = None, tol: float = 1e-6) -> BoundedDegreeCertificate:
    """Evaluate the lower-bound chain for R(G) on the spanning-tree partition."""
    if p is None:
        p = spanning_tree_partition(g)
    n = g.n
    d = max(int(g.neighbor_counts.max()), 2)
    l = level_parameter(n, d)
    vol = g.vol
    V, cut = entropy.module_volumes_and_cuts(g, p)
    V, cut = V.tolist(), cut.tolist()
    sizes = p.sizes().tolist()
    last = p.L - 1
    r_cert = entropy.resistance_of_partition(g, p)

    def ent(x, ref):
        return 0.0 if x == 0 else -(x / ref) * math.log2(x / ref)

    phi = [c / min(Vj, vol - Vj) if min(Vj, vol - Vj) > 0 else 0.0 for Vj, c in zip(V, cut)]
    phi_form = math.fsum((1 - ph) * ent(Vj, vol) for ph, Vj in zip(phi, V))
    size_form = math.fsum((2 / d - 2 / (d * s)) * ent(Vj, vol) for s, Vj in zip(sizes, V))
    drop_last = math.fsum((2 / d - 2 / (d * l)) * ent(V[j], vol) for j in range(last))
    rest = vol - V[last]
    factor = (2 / d) * (1 - 1 / l)
    normalized = factor * (rest / vol) * math.fsum(ent(V[j], rest) for j in range(last)) if rest > 0 else 0.0
    cap = d * math.log2(n)
    max_module = factor * (rest / vol) * math.log2(rest / cap) if rest > 0 else 0.0
    final = factor * ((vol - cap) / vol) * math.log2((vol - cap) / cap) if vol > cap else -math.inf
    lines = {
        "resistance_by_partition": r_cert,
        "conductance_form": phi_form,
        "size_form": size_form,
        "drop_last_module": drop_last,
        "renormalized_entropy": normalized,
        "max_module_volume": max_module,
        "volume_corrected": final,
    }
    vals = list(lines.values())
    steps = [vals[i] >= vals[i + 1] - tol for i in range(len(vals) - 1)]
    size_ok = all(l <= s <= d ** (l + 1) for s in sizes[:last]) if last > 0 else True
    return BoundedDegreeCertificate(
        n=n, d=d, l=l, module_sizes=sizes, lines=lines, steps_hold=steps,
        certified_resistance=r_cert, bound=final, satisfied=r_cert >= final - tol,
        size_range_ok=size_ok,
    )


# ---- security model --------------------------------------------------------------


@dataclass(frozen=True)
class SecurityModelParams:
    n: int
    a: float
    d: int
    n0: int | None = None  # default d + 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.a < 0:
            raise InputError("homophyly exponent a must be >= 0")
        if self.d < 2:
            raise InputError("d must be at least 2")
        if self.seed_size < 2:
            raise InputError("seed graph needs at least 2 vertices")
        if self.n <= self.seed_size:
            raise InputError(f"n={self.n} must exceed the seed size {self.seed_size}")

    @property
    def seed_size(self) -> int:
        return self.d + 1 if self.n0 is None else self.n0

    def p(self, i: int) -> float:
        """Probability that the vertex created at step i starts a new color."""
        if self.a == 0:
            return 1.0
        li = math.log(i)
        return 1.0 if li <= 1.0 else min(1.0, li ** -self.a)


@dataclass
class GenerationTrace:
    params: SecurityModelParams
    colors: list[int]
    seed_flags: list[bool]
    birth: list[int]                # step at which each color's seed was created
    seed_counts: list[tuple[int, int]] = field(default_factory=list)  # (t, |C_t|)
    shortfall: int = 0
    community_sizes: list[int] = field(default_factory=list)
    global_edge_counts: list[float] = field(default_factory=list)

    @property
    def color_count(self) -> int:
        return len(self.birth)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["params"] = asdict(self.params)
        out["seed_counts"] = [list(x) for x in self.seed_counts]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _checkpoints(n0, n):
    pts = set()
    t = max(n0 + 1, 16)
    while t < n:
        pts.add(t)
        t *= 2
    pts.update(range(max(n0 + 1, n // 20), n, max(1, n // 20)))
    pts.add(n)
    return pts


def security_model(params: SecurityModelParams) -> tuple[Graph, GenerationTrace]:
    """Grow a graph from S(n, a, d); deterministic given ``params.rng_seed``."""
    rng = random.Random(params.rng_seed)
    n, d, n0 = params.n, params.d, params.seed_size
    colors = list(range(n0))
    seed_flags = [True] * n0
    birth = [0] * n0
    seeds = list(range(n0))
    members = [[v] for v in range(n0)]
    # each vertex appears once per incident edge, giving degree-proportional sampling
    endpoints = []
    color_endpoints = [[] for _ in range(n0)]
    us, vs = [], []
    nbrs = [set() for _ in range(n)]

    def add_edge(x, y):
        us.append(x)
        vs.append(y)
        nbrs[x].add(y)
        nbrs[y].add(x)
        endpoints.append(x)
        endpoints.append(y)
        color_endpoints[colors[x]].append(x)
        color_endpoints[colors[y]].append(y)

    for x in range(n0):
        for y in range(x + 1, n0):
            add_edge(x, y)

    checkpoints = _checkpoints(n0, n)
    counts = []
    shortfall = 0
    retry = 50 * d
    for step in range(n0 + 1, n + 1):
        v = step - 1
        if rng.random() < params.p(step):
            c = len(birth)
            colors.append(c)
            seed_flags.append(True)
            birth.append(step)
            members.append([v])
            color_endpoints.append([])
            target = endpoints[rng.randrange(len(endpoints))]
            pool = min(d, len(seeds))
            picks = [s for s in rng.sample(seeds, pool) if s != target][: d - 1]
            shortfall += (d - 1) - len(picks)
            seeds.append(v)
            for u in [target] + picks:
                add_edge(v, u)
        else:
            c = rng.randrange(len(birth))
            colors.append(c)
            seed_flags.append(False)
            cls = members[c]
            if len(cls) <= d:
                targets = list(cls)
            else:
                ends = color_endpoints[c]
                chosen = set()
                tries = 0
                while len(chosen) < d and tries < retry:
                    chosen.add(ends[rng.randrange(len(ends))])
                    tries += 1
                targets = sorted(chosen)
            shortfall += d - len(targets)
            members[c].append(v)
            for u in targets:
                add_edge(v, u)
        if step in checkpoints:
            counts.append((step, len(birth)))

    g = Graph.from_arrays(n, us, vs, meta={"family": "security", "colors": colors, "a": params.a, "d": d})
    col = np.asarray(colors)
    sizes = np.bincount(col, minlength=len(birth))
    cross = col[g.u] != col[g.v]
    gS = np.bincount(col[g.u][cross], minlength=len(birth)) + np.bincount(col[g.v][cross], minlength=len(birth))
    trace = GenerationTrace(
        params=params, colors=colors, seed_flags=seed_flags, birth=birth, seed_counts=counts,
        shortfall=shortfall, community_sizes=sizes.tolist(), global_edge_counts=gS.astype(float).tolist(),
    )
    return g, trace


def natural_partition(trace: GenerationTrace) -> Partition:
    """Modules are the color classes."""
    return Partition(trace.colors)


def trace_statistics(trace: GenerationTrace, graph: Graph | None = None, b: float = 1.0) -> dict:
    """Monitored statistics for the color-class growth and global-edge counts.

    Natural logarithms throughout. T1 = ln^(a+1) n, T2 = n / ln^b n.
    """
    prm = trace.params
    n, a = prm.n, prm.a
    ln = math.log(n)
    lnln = math.log(ln)
    T1 = ln ** (a + 1)
    T2 = n / ln**b
    colors = trace.color_count
    lo_c, hi_c = n / (2 * ln**a), 2 * n / ln**a
    size_cap = 4 * ln ** (a + 1)
    sizes = np.asarray(trace.community_sizes, dtype=float)
    births = np.asarray(trace.birth, dtype=float)
    gS = np.asarray(trace.global_edge_counts, dtype=float)

    checks_1 = [
        {"t": t, "colors": c, "low": t / (2 * math.log(t) ** a), "high": 2 * t / math.log(t) ** a}
        for t, c in trace.seed_counts if t >= T1
    ]
    for row in checks_1:
        row["within"] = row["low"] <= row["colors"] <= row["high"]

    late = births >= T1
    late &= births < n
    growth = ln ** (a + 1) - np.log(np.maximum(births[late], 2.0)) ** (a + 1)
    ratio = sizes[late] / np.where(growth > 0, growth, np.nan)
    ratio = ratio[np.isfinite(ratio)]

    old = births >= T2
    if a > 1:
        g_bound, branch = 2.5 * (a + 1) * b**2 * lnln**2, "a>1"
    elif a == 1:
        g_bound, branch = 8 * b**2 * lnln**2, "a=1"
    elif a > 0:
        g_bound, branch = 5 * b**2 * lnln**2, "0<a<1"
    else:
        g_bound, branch = math.nan, "a=0"

    out = {
        "n": n, "a": a, "d": prm.d, "b": b,
        "color_count": colors,
        "color_count_bounds": [lo_c, hi_c],
        "color_count_within": bool(lo_c <= colors <= hi_c),
        "checkpoints_within": sum(r["within"] for r in checks_1),
        "checkpoints_total": len(checks_1),
        "max_community_size": int(sizes.max()) if len(sizes) else 0,
        "community_size_cap": size_cap,
        "max_community_within": bool(sizes.max() <= size_cap) if len(sizes) else True,
        "size_growth_ratio": _quantiles(ratio),
        "late_communities": int(old.sum()),
        "mean_global_edges_late": float(gS[old].mean()) if old.any() else math.nan,
        "global_edge_bound": g_bound,
        "global_edge_branch": branch,
        "shortfall": trace.shortfall,
    }
    if graph is not None:
        out["local_edges"] = int(graph.m - gS.sum() / 2)
        out["global_edges"] = int(gS.sum() / 2)
    return out


def _quantiles(x):
    if len(x) == 0:
        return {"count": 0}
    q = np.quantile(x, [0.25, 0.5, 0.75])
    return {"count": int(len(x)), "q25": float(q[0]), "median": float(q[1]), "q75": float(q[2])}
