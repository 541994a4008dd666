"""Coding trees, H^T under a module function, and height-restricted tree search.

A coding tree is stored as nested tuples: an ``int`` is a leaf (a vertex),
a tuple is an internal node whose marker is the union of its children's
markers. The root is always a tuple, so its marker is V.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entropy import info_term
from .errors import CapacityError, InputError
from .graph import Graph, Partition

K2_LIMIT = 10
K3_LIMIT = 8
TIE_TOL = 1e-12


def _canon(node):
    if isinstance(node, (int, np.integer)):
        return int(node)
    kids = [_canon(c) for c in node]
    # a single-child node adds a zero term; replace it with its child
    while len(kids) == 1 and not isinstance(kids[0], int):
        kids = list(kids[0])
    kids.sort(key=_min_leaf)
    return tuple(kids)


def _min_leaf(node):
    if isinstance(node, int):
        return node
    return min(_min_leaf(c) for c in node)


def _leaves(node, out):
    if isinstance(node, int):
        out.append(node)
    else:
        for c in node:
            _leaves(c, out)
    return out


def _height(node):
    if isinstance(node, int):
        return 0
    return 1 + max((_height(c) for c in node), default=0)


class CodingTree:
    """Immutable coding tree; equality is on the canonical form.

    Canonical form: children ordered by smallest leaf, no single-child
    internal nodes below the root.
    """

    __slots__ = ("root",)

    def __init__(self, root):
        if isinstance(root, (int, np.integer)):
            root = (int(root),)
        self.root = _canon(root)

    @classmethod
    def flat(cls, n: int) -> "CodingTree":
        return cls(tuple(range(n)))

    @classmethod
    def from_partition(cls, p: Partition) -> "CodingTree":
        """Two-level tree: one child per module, singleton modules become leaves."""
        if p.L <= 1:
            return cls.flat(p.n)
        kids = []
        for mod in p.modules():
            kids.append(int(mod[0]) if len(mod) == 1 else tuple(mod.tolist()))
        return cls(tuple(kids))

    @classmethod
    def from_json(cls, text) -> "CodingTree":
        data = json.loads(text) if isinstance(text, str) else text

        def conv(x):
            if isinstance(x, bool):
                raise InputError("tree leaves must be integers")
            if isinstance(x, int):
                return x
            if isinstance(x, list):
                if not x:
                    raise InputError("tree has an empty internal node")
                return tuple(conv(c) for c in x)
            raise InputError(f"unexpected tree element {x!r}")

        if not isinstance(data, list):
            raise InputError("tree JSON must be an array")
        return cls(conv(data))

    def to_json(self) -> str:
        def conv(x):
            return x if isinstance(x, int) else [conv(c) for c in x]

        return json.dumps(conv(self.root), separators=(",", ":"))

    @property
    def height(self) -> int:
        return _height(self.root)

    def leaves(self) -> list[int]:
        return _leaves(self.root, [])

    def to_partition(self, n: int) -> Partition:
        """Modules = leaf sets of the root's children (only meaningful for height ≤ 2)."""
        labels = np.empty(n, dtype=np.int64)
        for j, c in enumerate(self.root):
            labels[_leaves(c, [])] = j
        return Partition(labels)

    def __eq__(self, other):
        if not isinstance(other, CodingTree):
            return NotImplemented
        return self.root == other.root

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"CodingTree({self.to_json()})"


def tree_problems(n: int, root) -> list[str]:
    """Structural defects of a nested-sequence tree against vertex set 0..n-1."""
    problems = []
    seen = {}

    def walk(node, path):
        if isinstance(node, (int, np.integer)) and not isinstance(node, bool):
            v = int(node)
            if not 0 <= v < n:
                problems.append(f"leaf {v} at {path} is outside 0..{n - 1}")
            elif v in seen:
                problems.append(f"vertex {v} appears under two nodes ({seen[v]} and {path})")
            else:
                seen[v] = path
            return
        if not isinstance(node, (tuple, list)):
            problems.append(f"node at {path} is neither a vertex nor a list")
            return
        if len(node) == 0:
            problems.append(f"internal node at {path} has no children")
        for k, c in enumerate(node):
            walk(c, path + (k,))

    if isinstance(root, CodingTree):
        root = root.root
    if isinstance(root, (int, np.integer)):
        root = (root,)
    walk(root, ())
    missing = sorted(set(range(n)) - set(seen))
    if missing:
        problems.append(f"vertices missing from the leaves: {missing[:10]}")
    return problems


def validate_tree(g: Graph, t) -> bool:
    return not tree_problems(g.n, t)


def _require_valid(g: Graph, t) -> CodingTree:
    raw = t.root if isinstance(t, CodingTree) else t
    probs = tree_problems(g.n, raw)
    if probs:
        raise InputError("invalid coding tree: " + "; ".join(probs))
    return t if isinstance(t, CodingTree) else CodingTree(t)


# ---- module functions ----------------------------------------------------------


@dataclass(frozen=True)
class ModuleFunction:
    """g(X) for marker sets: ``volume``, ``cut``, or ``additive`` with per-vertex masses."""

    kind: str
    masses: tuple = ()

    def __post_init__(self):
        if self.kind not in ("volume", "cut", "additive"):
            raise InputError(f"unknown module function kind {self.kind!r}")
        if self.kind == "additive" and any(x < 0 for x in self.masses):
            raise InputError("additive masses must be non-negative")

    @classmethod
    def additive(cls, masses: Sequence[float]) -> "ModuleFunction":
        return cls("additive", tuple(float(x) for x in masses))


VOLUME = ModuleFunction("volume")
CUT = ModuleFunction("cut")


class _Evaluator:
    """Marker volumes and cuts with a stamp array, exact for integer weights."""

    def __init__(self, g: Graph):
        self.deg = g.degrees.tolist()
        indptr, nbrs, wts = g._csr
        ip, nb, wt = indptr.tolist(), nbrs.tolist(), wts.tolist()
        self.adj = [list(zip(nb[ip[i]:ip[i + 1]], wt[ip[i]:ip[i + 1]])) for i in range(g.n)]
        self.stamp = [0] * g.n
        self.clock = 0

    def vol(self, marker):
        return math.fsum(self.deg[v] for v in marker)

    def cut(self, marker):
        self.clock += 1
        c = self.clock
        st = self.stamp
        for v in marker:
            st[v] = c
        return math.fsum(w for v in marker for x, w in self.adj[v] if st[x] != c)


def _tree_terms(g: Graph, root, f: ModuleFunction):
    ev = _Evaluator(g)
    total = g.vol
    if f.kind == "additive":
        if len(f.masses) != g.n:
            raise InputError("additive module function needs one mass per vertex")
        if math.fsum(f.masses) > total * (1 + 1e-12):
            raise InputError("additive masses exceed vol(G)")
    terms = []

    def value(marker, vol_m):
        if f.kind == "volume":
            return vol_m
        if f.kind == "cut":
            return ev.cut(marker)
        return math.fsum(f.masses[v] for v in marker)

    def visit(node):
        # returns (marker, vol) and appends the children's terms
        if isinstance(node, int):
            return [node], ev.deg[node]
        kids = [visit(c) for c in node]
        marker = [v for mk, _ in kids for v in mk]
        vol_node = ev.vol(marker)
        for mk, vk in kids:
            terms.append(info_term(value(mk, vk), vk, vol_node, total))
        return marker, vol_node

    visit(root)
    return terms


def hT_with_module_function(g: Graph, t, f: ModuleFunction) -> float:
    """-Σ_{α≠root} (f(T_α)/vol) log2(vol(α)/vol(parent of α))."""
    g.require_connected()
    t = _require_valid(g, t)
    return math.fsum(_tree_terms(g, t.root, f))


def hT(g: Graph, t) -> float:
    """Structure entropy of ``g`` by coding tree ``t`` (cut module function)."""
    return hT_with_module_function(g, t, CUT)


def random_coding_tree(n: int, rng, flat_prob: float = 0.2) -> CodingTree:
    """Recursive random splits of V; a node stops splitting and goes flat with ``flat_prob``."""
    rng = np.random.default_rng(rng)

    def build(items):
        if len(items) == 1:
            return items[0]
        if len(items) == 2 or rng.random() < flat_prob:
            return tuple(items)
        perm = rng.permutation(items).tolist()
        cut = int(rng.integers(1, len(perm)))
        return (build(perm[:cut]), build(perm[cut:]))

    root = build(list(range(n)))
    return CodingTree(root if isinstance(root, tuple) else (root,))


# ---- height-restricted search ----------------------------------------------------


def _partitions_lex(n):
    """Set partitions of range(n) as label lists, lexicographic RGS order (recursive)."""
    labels = [0] * n

    def rec(i, top):
        if i == n:
            yield list(labels)
            return
        for lab in range(top + 2):
            labels[i] = lab
            yield from rec(i + 1, max(top, lab))

    if n == 0:
        yield []
        return
    labels[0] = 0
    yield from rec(1, 0)


def _first_min(values, tol=TIE_TOL):
    best = min(values)
    return next(k for k, x in enumerate(values) if x <= best + tol)


def _two_level_scorer(g: Graph):
    """H^T of the two-level tree built from a label list, evaluated node by node."""
    n = g.n
    deg = g.degrees.tolist()
    total = g.vol
    edges = list(g.edges())

    def score(lab):
        L = max(lab) + 1
        if L == 1 or L == n:
            return math.fsum(info_term(d, d, total, total) for d in deg)
        vol = [0.0] * L
        size = [0] * L
        for v in range(n):
            vol[lab[v]] += deg[v]
            size[lab[v]] += 1
        cut = [0.0] * L
        for a, b, w in edges:
            if lab[a] != lab[b]:
                cut[lab[a]] += w
                cut[lab[b]] += w
        terms = []
        for j in range(L):
            if size[j] > 1:
                terms.append(info_term(cut[j], vol[j], total, total))
        for v in range(n):
            j = lab[v]
            # a singleton module is a leaf hanging from the root
            parent = vol[j] if size[j] > 1 else total
            terms.append(info_term(deg[v], deg[v], parent, total))
        return math.fsum(terms)

    return score


def _hk2_exact(g: Graph):
    score = _two_level_scorer(g)
    labs = list(_partitions_lex(g.n))
    values = [score(lab) for lab in labs]
    t = CodingTree.from_partition(Partition(labs[_first_min(values)]))
    return hT(g, t), t


def _hk_dp(g: Graph, k: int):
    """Exact minimum over trees of height ≤ k by dynamic programming over vertex subsets."""
    n = g.n
    deg = g.degrees.tolist()
    total = g.vol
    ev = _Evaluator(g)
    full = (1 << n) - 1
    members = [[v for v in range(n) if s >> v & 1] for s in range(full + 1)]
    vol = [ev.vol(members[s]) for s in range(full + 1)]
    cut = [ev.cut(members[s]) if s else 0.0 for s in range(full + 1)]

    memo = {}

    def best(X, h):
        """Min cost of the subtree under node X with h levels below it (X's own term excluded)."""
        key = (X, h)
        if key in memo:
            return memo[key]
        flat_val = math.fsum(info_term(deg[v], deg[v], vol[X], total) for v in members[X])
        result = (flat_val, None)
        if h >= 2 and len(members[X]) >= 3:
            child = {}
            # cost of making Y a child of X, its own subtree included
            for Y in _submasks(X):
                if Y == X:
                    continue
                if Y & (Y - 1) == 0:
                    v = Y.bit_length() - 1
                    child[Y] = (info_term(deg[v], deg[v], vol[X], total), None)
                else:
                    sub = best(Y, h - 1)
                    child[Y] = (info_term(cut[Y], vol[Y], vol[X], total) + sub[0], sub[1])
            D = {0: (0.0, ())}
            for S in sorted(_submasks(X)):
                if S == 0:
                    continue
                low = S & -S
                cands = []
                rest = S ^ low
                for R in sorted(_submasks(rest)):
                    Y = low | R
                    if Y == X:
                        continue
                    if S ^ Y not in D:
                        continue
                    cands.append((child[Y][0] + D[S ^ Y][0], D[S ^ Y][1] + (Y,)))
                if cands:
                    D[S] = cands[_first_min([c[0] for c in cands])]
            if X in D and D[X][0] < flat_val - TIE_TOL:
                blocks = D[X][1]
                result = (D[X][0], tuple((Y, child[Y][1]) for Y in blocks))
        memo[key] = result
        return result

    def build(X, choice):
        if choice is None:
            return tuple(members[X])
        kids = []
        for Y, sub in choice:
            if Y & (Y - 1) == 0:
                kids.append(Y.bit_length() - 1)
            else:
                kids.append(build(Y, sub))
        return tuple(kids)

    _, choice = best(full, k)
    t = CodingTree(build(full, choice))
    return hT(g, t), t


def _submasks(X):
    s = X
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & X


def hK_exact(g: Graph, k: int, limit: int | None = None, method: str = "auto") -> tuple[float, CodingTree]:
    """Minimum of H^T over coding trees of height at most ``k``, with a witness.

    k=2 enumerates set partitions in lexicographic restricted-growth order
    (limit 10 vertices); k≥3 runs a subset DP (limit 8). Ties within 1e-12
    go to the first tree found.
    """
    g.require_connected()
    if k < 1:
        raise InputError("height must be at least 1")
    if k == 1 or g.n <= 2:
        t = CodingTree.flat(g.n)
        return hT(g, t), t
    if method == "auto":
        method = "enumerate" if k == 2 else "dp"
    cap = limit if limit is not None else (K2_LIMIT if method == "enumerate" else K3_LIMIT)
    if g.n > cap:
        raise CapacityError(f"hK_exact(k={k}) is exhaustive; n={g.n} > limit={cap}")
    if method == "enumerate":
        if k != 2:
            raise InputError("partition enumeration only covers k=2")
        return _hk2_exact(g)
    if method == "dp":
        return _hk_dp(g, k)
    raise InputError(f"unknown method {method!r}")


def _lift(g: Graph, modules, depth_left: int):
    """Tree node for a module, refined greedily when more levels are available."""
    from .partition_search import agglomerate

    mods = [sorted(m) for m in modules]
    kids = []
    for mod in mods:
        if len(mod) == 1:
            kids.append(mod[0])
        elif depth_left >= 2 and len(mod) >= 3:
            vol_m = math.fsum(g.degrees[mod].tolist())
            inner = agglomerate(g, mod, parent_vol=vol_m)
            if 1 < len(inner) < len(mod):
                kids.append(_lift(g, inner.values(), depth_left - 1))
            else:
                kids.append(tuple(mod))
        else:
            kids.append(tuple(mod))
    return tuple(kids)


def hK_greedy(g: Graph, k: int) -> tuple[float, CodingTree]:
    """Upper bound on H^k for k in {2, 3} from greedy agglomeration."""
    from .partition_search import greedy_h2

    if k not in (2, 3):
        raise InputError("hK_greedy supports k=2 and k=3")
    _, p = greedy_h2(g)
    if p.L <= 1 or p.L == g.n:
        t = CodingTree.flat(g.n)
    else:
        t = CodingTree(_lift(g, [m.tolist() for m in p.modules()], k - 1))
    return hT(g, t), t
