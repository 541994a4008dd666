"""Two-dimensional structure entropy: exhaustive and greedy partition search."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import entropy
from .entropy import EntropyReport, hP, make_report
from .errors import CapacityError, DomainError, InputError
from .graph import Graph, Partition

EXACT_LIMIT = 12
EXACT_HARD_LIMIT = 13  # the label table is held in memory; Bell(13) rows is ~360 MB
TIE_TOL = 1e-12
# merges whose gain is within float noise of zero are not taken
MERGE_TOL = 1e-12


def restricted_growth_strings(n: int) -> np.ndarray:
    """All set partitions of n items as restricted-growth strings, lexicographic order."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    rows = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)  # max label used so far in each row
    for _ in range(1, n):
        choices = top.astype(np.int64) + 2
        idx = np.repeat(np.arange(len(rows)), choices)
        starts = np.cumsum(choices) - choices
        new = (np.arange(len(idx)) - np.repeat(starts, choices)).astype(np.int8)
        rows = np.concatenate([rows[idx], new[:, None]], axis=1)
        top = np.maximum(top[idx], new)
    return rows


def bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _hp_batch(g: Graph, R: np.ndarray) -> np.ndarray:
    """H^P for every row of a label matrix, used only to rank candidates.

    Uses vol·H^P = Σ_j V_j log2 V_j - Σ_i d_i log2 d_i - Σ_j g_j log2(V_j/vol),
    with g_j = V_j minus twice the internal weight of module j.
    """
    n = g.n
    vol = g.vol
    deg = np.asarray(g.degrees, dtype=float)
    A = np.zeros((n, n))
    A[g.u, g.v] = g.w
    A[g.v, g.u] = g.w
    acc = np.full(len(R), -float(np.sum(deg * np.log2(deg))))
    for j in range(int(R.max()) + 1 if len(R) else 0):
        M = (R == j).astype(float)
        V = M @ deg
        cut = V - np.einsum("bi,bi->b", M @ A, M)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = V * np.log2(V) - cut * np.log2(V / vol)
        acc += np.where(V > 0, term, 0.0)
    return acc / vol


def exact_h2(g: Graph, limit: int = EXACT_LIMIT) -> tuple[float, Partition]:
    """Global minimum of H^P over all set partitions.

    Ties (within 1e-12) go to the lexicographically least restricted-growth
    string. The returned value is the canonical evaluation of the argmin.
    """
    g.require_connected()
    if g.n > limit:
        raise CapacityError(f"exact_h2 enumerates Bell(n) partitions; n={g.n} > limit={limit}")
    if g.n > EXACT_HARD_LIMIT:
        raise CapacityError(f"exact_h2 supports n <= {EXACT_HARD_LIMIT}, got n={g.n}")
    R = restricted_growth_strings(g.n)
    vals = np.concatenate([_hp_batch(g, R[s:s + 200_000]) for s in range(0, len(R), 200_000)])
    best = vals.min()
    k = int(np.argmax(vals <= best + TIE_TOL))
    p = Partition(R[k])
    return hP(g, p), p


# ---- greedy agglomeration ------------------------------------------------------


def _module_cost(V, cut, parent_vol):
    # part of a module's contribution to the code length that depends on the grouping
    return V * math.log2(V) - cut * math.log2(V / parent_vol)


def agglomerate(g: Graph, vertices=None, parent_vol=None) -> dict[int, list[int]]:
    """Greedy merging of edge-adjacent modules while the code length drops.

    Works inside ``vertices`` (default: all of V) with the enclosing node's
    volume ``parent_vol`` (default: vol(G)); boundary weights are always
    measured against the whole graph. Returns modules keyed by their
    smallest vertex. Ties on the gain go to the smallest ``(i, j)`` pair.
    """
    if vertices is None:
        vertices = range(g.n)
    verts = sorted(int(v) for v in vertices)
    inside = set(verts)
    P = g.vol if parent_vol is None else parent_vol
    deg = g.degrees.tolist()
    indptr, nbrs, wts = g._csr
    ip, nb, wt = indptr.tolist(), nbrs.tolist(), wts.tolist()

    members = {v: [v] for v in verts}
    vol = {v: deg[v] for v in verts}
    cut = {v: deg[v] for v in verts}
    adj = {v: {} for v in verts}
    for v in verts:
        for k in range(ip[v], ip[v + 1]):
            x = nb[k]
            if x in inside:
                adj[v][x] = adj[v].get(x, 0.0) + wt[k]
    version = {v: 0 for v in verts}
    cost = {v: _module_cost(vol[v], cut[v], P) for v in verts}

    def gain(i, j):
        e = adj[i][j]
        V = vol[i] + vol[j]
        c = cut[i] + cut[j] - 2 * e
        return _module_cost(V, c, P) - cost[i] - cost[j]

    heap = []
    for i in verts:
        for j in adj[i]:
            if i < j:
                heap.append((gain(i, j), i, j, 0, 0))
    heapq.heapify(heap)

    while heap:
        delta, i, j, vi, vj = heapq.heappop(heap)
        if i not in members or j not in members or version[i] != vi or version[j] != vj:
            continue
        if delta >= -MERGE_TOL:
            break
        e = adj[i].pop(j)
        del adj[j][i]
        members[i].extend(members.pop(j))
        vol[i] += vol.pop(j)
        cut[i] = cut[i] + cut.pop(j) - 2 * e
        for k, w in adj.pop(j).items():
            del adj[k][j]
            adj[i][k] = adj[i].get(k, 0.0) + w
            adj[k][i] = adj[i][k]
        cost.pop(j)
        cost[i] = _module_cost(vol[i], cut[i], P)
        version.pop(j)
        version[i] += 1
        for k in adj[i]:
            a, b = (i, k) if i < k else (k, i)
            heapq.heappush(heap, (gain(a, b), a, b, version[a], version[b]))
    return members


def greedy_h2(g: Graph) -> tuple[float, Partition]:
    """Upper bound on H² from agglomerative merging starting at singletons."""
    g.require_connected()
    members = agglomerate(g)
    labels = np.empty(g.n, dtype=np.int64)
    for j, mods in enumerate(members.values()):
        labels[mods] = j
    p = Partition(labels)
    return hP(g, p), p


@dataclass(frozen=True)
class MergeDelta:
    i: int
    j: int
    delta_hP: float
    cut_ij: float
    vol_i: float
    vol_j: float


def merge_delta(g: Graph, p: Partition, i: int, j: int) -> MergeDelta:
    """Change in H^P from merging modules ``i`` and ``j`` of ``p``, computed locally."""
    p.check(g)
    if i == j or not (0 <= i < p.L and 0 <= j < p.L):
        raise InputError(f"invalid module pair ({i}, {j}) for a partition with {p.L} modules")
    lab = p.labels
    sel = ((lab[g.u] == i) & (lab[g.v] == j)) | ((lab[g.u] == j) & (lab[g.v] == i))
    e = math.fsum(g.w[sel].tolist())
    V, cut = entropy.module_volumes_and_cuts(g, p)
    Vi, Vj, ci, cj = float(V[i]), float(V[j]), float(cut[i]), float(cut[j])
    vol = g.vol
    before = _module_cost(Vi, ci, vol) + _module_cost(Vj, cj, vol)
    after = _module_cost(Vi + Vj, ci + cj - 2 * e, vol)
    return MergeDelta(i, j, (after - before) / vol, e, Vi, Vj)


def apply_merge(p: Partition, i: int, j: int) -> Partition:
    lab = p.labels.copy()
    lab[lab == j] = i
    return Partition(lab)


@dataclass(frozen=True)
class MergeSplit:
    lhs: float
    rhs: float
    sign: int  # +1: splitting raises H^P, -1: lowers it, 0: no change


def merge_split_criterion(g: Graph, x1, y1, y2, tol: float = 1e-9) -> MergeSplit:
    """Closed-form test of whether splitting X₁ into Y₁ ∪ Y₂ raises H^P (regular graphs).

    lhs = e(Y₁,Y₂) log2(n/|X₁|), rhs = Σ_i e(Y_i,Y_i) log2(|X₁|/|Y_i|), where
    e(Y,Y) is the internal edge weight of Y.
    """
    if not g.is_regular:
        raise DomainError("merge_split_criterion requires a regular graph")
    X = set(g.vertex_set(x1).tolist())
    A = g.vertex_set(y1, allow_empty=False)
    B = g.vertex_set(y2, allow_empty=False)
    sa, sb = set(A.tolist()), set(B.tolist())
    if sa & sb or (sa | sb) != X:
        raise InputError("y1 and y2 must partition x1")
    ma, mb = g.mask(A), g.mask(B)
    w = g.w
    e12 = math.fsum(w[(ma[g.u] & mb[g.v]) | (mb[g.u] & ma[g.v])].tolist())
    e11 = math.fsum(w[ma[g.u] & ma[g.v]].tolist())
    e22 = math.fsum(w[mb[g.u] & mb[g.v]].tolist())
    nx, n1, n2 = len(X), len(sa), len(sb)
    lhs = e12 * math.log2(g.n / nx)
    rhs = e11 * math.log2(nx / n1) + e22 * math.log2(nx / n2)
    diff = lhs - rhs
    sign = 0 if abs(diff) <= tol else (1 if diff > 0 else -1)
    return MergeSplit(lhs, rhs, sign)


# ---- resistance ------------------------------------------------------------------


def construction_partition(g: Graph) -> tuple[Partition, str] | None:
    """The explicit witness partition for a generated family, if there is one."""
    from . import generators

    fam = g.meta.get("family")
    if fam == "tree":
        H = g.meta["depth"]
        k = min(max(1, math.ceil(math.log2(H)) - 1), H - 1)
        return generators.tree_partition(H, k), f"construction:tree(k={k})"
    if fam == "grid":
        n = g.meta["side"]
        k = min(max(2, math.ceil(math.log2(n))), n)
        return generators.grid_partition(n, k), f"construction:grid(k={k})"
    if fam == "complete":
        return generators.complete_partition(g.n), "construction:complete"
    if fam == "security" and "colors" in g.meta:
        return Partition(g.meta["colors"]), "construction:natural"
    return None


def resistance(g: Graph, mode: str = "exact", limit: int = EXACT_LIMIT) -> EntropyReport:
    """R(G) = H¹ - H² with H² from the chosen search mode.

    Only ``exact`` gives the true resistance; ``greedy`` and ``construction``
    give lower bounds, flagged by ``report.exact``.
    """
    g.require_connected()
    if mode == "exact":
        _, p = exact_h2(g, limit=limit)
        return make_report(g, p, "exact", exact=True)
    if mode == "greedy":
        _, p = greedy_h2(g)
        return make_report(g, p, "greedy")
    if mode == "construction":
        found = construction_partition(g)
        if found is None:
            _, p = greedy_h2(g)
            return make_report(g, p, "greedy")
        p, name = found
        return make_report(g, p, name)
    raise InputError(f"unknown mode {mode!r}")
