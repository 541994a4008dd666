"""Desk-scale experiment runners and property suites behind the CLI."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import codingtree as ct
from . import entropy as en
from . import generators as gen
from . import partition_search as ps
from . import spectral as sp
from .errors import InputError
from .graph import Graph, Partition

COLUMNS = ["family", "n", "param", "h1", "h2", "resistance", "security_index", "bound", "bound_satisfied", "seed"]
WORKERS_ENV = "NETRESIST_WORKERS"
LOG2E = math.log2(math.e)

BOUNDS = {
    "tree": ("resistance >= log2(n) - log2(log2(n)) - 5", "param = depth H, n = 2^H - 1, construction k = ceil(log2 H) - 1"),
    "grid": ("resistance >= log2(s(s-1)) - 2 log2(k) - (log2(s) + 1)/k - 0.5", "param = side s, n = s^2, k = ceil(log2 s)"),
    "complete": ("resistance < log2(e)", "param = modules in the equal split"),
    "bounded-degree": ("resistance >= (2/d)(1 - 1/l)((vol - d log2 n)/vol) log2((vol - d log2 n)/(d log2 n))",
                       "param = d, l = max(1, floor(log_d log2 n) - 1), spanning-tree partition"),
    "security": ("security_index >= 1 - (log2(max community size) + log2(2m) * 2 m_global / 2m) / h1",
                 "param = a, natural (color) partition, d = 4 unless given"),
    "spectral": ("bound = lambda_k / 2 <= max conductance of the k blocks",
                 "param = block size k for a grid of side n^(1/2)"),
}


@dataclass
class ExperimentSpec:
    name: str
    sizes: list[int]
    trials: int = 1
    rng_seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in BOUNDS:
            raise InputError(f"unknown experiment {self.name!r}; choose from {sorted(BOUNDS)}")
        if not self.sizes or any(s <= 0 for s in self.sizes):
            raise InputError("sizes must be positive")
        if self.trials < 1:
            raise InputError("trials must be >= 1")


def _row(family, n, param, rep: en.EntropyReport, bound, ok, seed):
    return {
        "family": family, "n": n, "param": param, "h1": rep.h1, "h2": rep.h2,
        "resistance": rep.resistance, "security_index": rep.security_index,
        "bound": bound, "bound_satisfied": bool(ok), "seed": seed,
    }


def _tree(H, seed, params):
    g = gen.complete_binary_tree(H)
    rep = ps.resistance(g, "construction")
    n = g.n
    bound = math.log2(n) - math.log2(math.log2(n)) - 5
    return _row("tree", n, H, rep, bound, rep.resistance >= bound, seed)


def _grid(s, seed, params):
    g = gen.grid(s)
    k = min(max(2, math.ceil(math.log2(s))), s)
    rep = en.make_report(g, gen.grid_partition(s, k), f"construction:grid(k={k})")
    bound = math.log2(s * (s - 1)) - 2 * math.log2(k) - (math.log2(s) + 1) / k - 0.5
    return _row("grid", g.n, s, rep, bound, rep.resistance >= bound, seed)


def _complete(n, seed, params):
    g = gen.complete_graph(n)
    p = gen.complete_partition(n)
    rep = en.make_report(g, p, "construction:complete")
    return _row("complete", n, p.L, rep, LOG2E, rep.resistance < LOG2E, seed)


def _bounded(n, seed, params):
    d = int(params.get("d", 3))
    g = gen.random_regular(n, d, seed)
    p = gen.spanning_tree_partition(g)
    cert = gen.bounded_degree_certificate(g, p)
    rep = en.make_report(g, p, "construction:spanning-tree")
    return _row("bounded-degree", n, d, rep, cert.bound, cert.satisfied, seed)


def security_index_floor(g: Graph, p: Partition, h1_bits: float) -> float:
    """Instance-level lower bound on θ from log2(max module size) and the global-edge count."""
    _, cut = en.module_volumes_and_cuts(g, p)
    vol = g.vol
    h2_cap = math.log2(int(p.sizes().max())) + math.log2(vol) * math.fsum(cut.tolist()) / vol
    return 1 - h2_cap / h1_bits


def _security(n, seed, params):
    a = float(params.get("a", 1.5))
    d = int(params.get("d", 4))
    g, trace = gen.security_model(gen.SecurityModelParams(n=n, a=a, d=d, rng_seed=seed))
    p = gen.natural_partition(trace)
    rep = en.make_report(g, p, "construction:natural")
    bound = security_index_floor(g, p, rep.h1)
    return _row("security", n, a, rep, bound, rep.security_index >= bound - 1e-12, seed)


def _spectral(s, seed, params):
    g = gen.grid(s)
    k = min(max(2, math.ceil(math.log2(s))), s)
    p = gen.grid_partition(s, k)
    rep = en.make_report(g, p, f"construction:grid(k={k})")
    spec = sp.graph_spectrum(g, vectors=False)
    L, max_phi = sp.k_way_conductance_upper(g, p)
    lam = float(spec.eigenvalues[L - 1]) / 2
    return _row("spectral", g.n, k, rep, lam, sp.cheeger_lower_check(spec, L, max_phi), seed)


RUNNERS = {
    "tree": (_tree, False), "grid": (_grid, False), "complete": (_complete, False),
    "bounded-degree": (_bounded, True), "security": (_security, True), "spectral": (_spectral, False),
}


def _call(job):
    name, size, seed, params = job
    return RUNNERS[name][0](size, seed, params)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> list[dict]:
    """Rows for every (size, trial); trial t uses seed rng_seed + t."""
    randomized = RUNNERS[spec.name][1]
    trials = spec.trials if randomized else 1
    jobs = [(spec.name, s, spec.rng_seed + t, spec.params) for s in spec.sizes for t in range(trials)]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_call, jobs))
    else:
        rows = [_call(j) for j in jobs]
    rows.sort(key=lambda r: (r["n"], r["param"], r["seed"]))
    return rows


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


def experiment_meta(spec: ExperimentSpec) -> dict:
    formula, notes = BOUNDS[spec.name]
    return {
        "experiment": spec.name, "bound": formula, "notes": notes, "sizes": spec.sizes,
        "trials": spec.trials, "seed": spec.rng_seed, "params": spec.params,
        "log": "log2 in entropy quantities; natural log inside the security model",
    }


def summarize(rows: list[dict]) -> dict:
    """Median security index per n, for trial-based experiments."""
    out = {}
    for n in sorted({r["n"] for r in rows}):
        vals = [r["security_index"] for r in rows if r["n"] == n]
        out[n] = float(np.median(vals))
    return out


# ---- property suites --------------------------------------------------------------


def random_connected_graph(n: int, rng, p: float = 0.3, weighted: bool = False) -> Graph:
    """Random spanning tree plus independent extra edges."""
    rng = np.random.default_rng(rng)
    edges = {}
    order = rng.permutation(n)
    for i in range(1, n):
        a, b = int(order[i]), int(order[rng.integers(0, i)])
        edges[(min(a, b), max(a, b))] = 1.0
    iu, ju = np.triu_indices(n, k=1)
    extra = rng.random(len(iu)) < p
    for a, b in zip(iu[extra].tolist(), ju[extra].tolist()):
        edges[(a, b)] = 1.0
    if weighted:
        for key in edges:
            edges[key] = float(rng.integers(1, 5))
    return Graph(n, [(a, b, w) for (a, b), w in edges.items()])


def random_partition(n: int, rng) -> Partition:
    rng = np.random.default_rng(rng)
    L = int(rng.integers(1, n + 1))
    return Partition(rng.integers(0, L, size=n))


def suite_resistance_law(count=200, seed=0):
    rng = np.random.default_rng(seed)
    ok = 0
    for _ in range(count):
        n = int(rng.integers(2, 51))
        g = random_connected_graph(n, rng, p=float(rng.uniform(0.02, 0.4)), weighted=bool(rng.random() < 0.3))
        part = random_partition(n, rng)
        ok += abs((en.h1(g) - en.hP(g, part)) - en.resistance_of_partition(g, part)) < 1e-9
    return ok, count


def suite_merge_split(graphs=50, splits=20, seed=0):
    rng = np.random.default_rng(seed)
    ok = total = 0
    for gi in range(graphs):
        while True:
            n = int(rng.integers(6, 25))
            d = int(rng.integers(2, min(6, n)))
            if n * d % 2 == 0:
                break
        g = gen.random_regular(n, d, int(rng.integers(2**32)))
        for _ in range(splits):
            ok_one = check_merge_split_once(g, rng)
            ok += ok_one
            total += 1
    return ok, total


def check_merge_split_once(g: Graph, rng) -> bool:
    n = g.n
    lab = rng.integers(0, int(rng.integers(1, 5)), size=n)
    base = Partition(lab)
    j = int(rng.integers(0, base.L))
    X = base.modules()[j]
    if len(X) < 2:
        lab = lab.copy()
        X = np.flatnonzero(lab == lab[0])
        if len(X) < 2:
            lab[:] = 0
            X = np.arange(n)
        base = Partition(lab)
    mask = rng.random(len(X)) < 0.5
    if mask.all() or not mask.any():
        mask[0] = not mask[0]
    Y1, Y2 = X[mask], X[~mask]
    split = np.array(base.labels)
    split[Y2] = split.max() + 1
    diff = en.hP(g, Partition(split)) - en.hP(g, base)
    res = ps.merge_split_criterion(g, X, Y1, Y2)
    if abs(diff) < 1e-9:
        return res.sign == 0
    return res.sign == (1 if diff > 0 else -1)


def suite_volume_invariance(graphs=20, trees=100, seed=0):
    rng = np.random.default_rng(seed)
    ok = total = 0
    for _ in range(graphs):
        n = int(rng.integers(2, 40))
        g = random_connected_graph(n, rng, p=float(rng.uniform(0.05, 0.5)), weighted=bool(rng.random() < 0.5))
        h = en.h1(g)
        for _ in range(trees):
            t = ct.random_coding_tree(n, rng)
            ok += abs(ct.hT_with_module_function(g, t, ct.VOLUME) - h) < 1e-9
            total += 1
    return ok, total


def cheeger_pairs():
    """(graph, modules) pairs drawn from the tree, grid, complete and security suites."""
    for n in (16, 64, 256):
        yield f"complete-{n}", gen.complete_graph(n), gen.complete_partition(n)
    for H in range(8, 13):
        k = max(1, math.ceil(math.log2(H)) - 1)
        yield f"tree-{H}", gen.complete_binary_tree(H), gen.tree_partition(H, k)
    for s in (16, 32):
        k = math.ceil(math.log2(s))
        yield f"grid-{s}", gen.grid(s), gen.grid_partition(s, k)
    g, trace = gen.security_model(gen.SecurityModelParams(n=1000, a=1.5, d=4, rng_seed=7))
    yield "security-1000", g, gen.natural_partition(trace)


def suite_cheeger():
    ok = total = 0
    for _, g, p in cheeger_pairs():
        spec = sp.graph_spectrum(g, vectors=False)
        k, phi = sp.k_way_conductance_upper(g, p)
        ok += sp.cheeger_lower_check(spec, k, phi) and sp.cheeger_lower_check(spec, 1, phi)
        total += 1
    return ok, total


def suite_height_monotonicity(count=20, seed=0):
    rng = np.random.default_rng(seed)
    ok = 0
    for _ in range(count):
        n = int(rng.integers(3, 8))
        g = random_connected_graph(n, rng, p=0.4)
        h1v = ct.hK_exact(g, 1)[0]
        h2v = ct.hK_exact(g, 2)[0]
        h3v = ct.hK_exact(g, 3)[0]
        ok += h2v <= h1v + 1e-9 and h3v <= h2v + 1e-9
    return ok, count


SUITES = {
    "resistance-law": suite_resistance_law,
    "merge-split": suite_merge_split,
    "volume-invariance": suite_volume_invariance,
    "height-monotonicity": suite_height_monotonicity,
    "cheeger": suite_cheeger,
}


def dumps_rows_json(rows):
    return json.dumps(rows, indent=2)
