"""Weighted undirected simple graphs, partitions, and the set-level primitives.

Vertices are dense integer ids ``0..n-1``. A :class:`Graph` is immutable
after construction; every derived index (CSR adjacency, degrees,
connectivity) is computed once and cached.
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapacityError, DomainError, InputError

EXHAUSTIVE_CONDUCTANCE_LIMIT = 20


class Graph:
    """Weighted undirected simple graph on vertices ``0..n-1``.

    ``edges`` is an iterable of ``(u, v)`` or ``(u, v, w)``; missing weights
    default to 1.0. Self-loops, duplicate pairs (in either orientation) and
    non-positive weights are rejected. ``meta`` is free-form family metadata
    set by the generators (e.g. ``{"family": "grid", "side": 8}``); it does
    not take part in equality.
    """

    def __init__(self, n: int, edges: Iterable[Sequence[float]] = (), meta: dict | None = None):
        us, vs, ws = [], [], []
        for e in edges:
            if len(e) == 2:
                a, b = e
                w = 1.0
            elif len(e) == 3:
                a, b, w = e
            else:
                raise InputError(f"edge must be (u, v) or (u, v, w), got {e!r}")
            us.append(a)
            vs.append(b)
            ws.append(w)
        self._init_arrays(
            n,
            np.asarray(us, dtype=np.int64),
            np.asarray(vs, dtype=np.int64),
            np.asarray(ws, dtype=np.float64),
            meta,
        )

    @classmethod
    def from_arrays(cls, n, u, v, w=None, meta=None) -> "Graph":
        g = cls.__new__(cls)
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.ones(len(u)) if w is None else np.asarray(w, dtype=np.float64)
        g._init_arrays(n, u, v, w, meta)
        return g

    def _init_arrays(self, n, u, v, w, meta):
        n = int(n)
        if n < 0:
            raise InputError("vertex count must be non-negative")
        if not (len(u) == len(v) == len(w)):
            raise InputError("edge arrays differ in length")
        if len(u):
            if u.min() < 0 or v.min() < 0 or u.max() >= n or v.max() >= n:
                raise InputError(f"edge endpoint outside 0..{n - 1}")
            if np.any(u == v):
                bad = int(np.flatnonzero(u == v)[0])
                raise InputError(f"self-loop at vertex {int(u[bad])}")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise InputError("edge weights must be finite and strictly positive")
            lo = np.minimum(u, v)
            hi = np.maximum(u, v)
            keys = lo * n + hi
            uniq, counts = np.unique(keys, return_counts=True)
            if len(uniq) != len(keys):
                k = int(uniq[np.argmax(counts > 1)])
                raise InputError(f"duplicate edge ({k // n}, {k % n})")
            u, v = lo, hi
        for arr in (u, v, w):
            arr.setflags(write=False)
        self.n = n
        self.u = u
        self.v = v
        self.w = w
        self.meta = dict(meta or {})

    # ---- basic accessors -------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.u)

    def __repr__(self):
        fam = self.meta.get("family")
        tag = f", family={fam!r}" if fam else ""
        return f"Graph(n={self.n}, m={self.m}{tag})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self._sorted_edges[0], other._sorted_edges[0])
            and np.array_equal(self._sorted_edges[1], other._sorted_edges[1])
        )

    __hash__ = None

    @cached_property
    def _sorted_edges(self):
        order = np.lexsort((self.v, self.u))
        keys = np.stack([self.u[order], self.v[order]])
        return keys, self.w[order]

    def edges(self):
        """Iterate ``(u, v, w)`` with ``u < v`` in insertion order."""
        for a, b, c in zip(self.u.tolist(), self.v.tolist(), self.w.tolist()):
            yield a, b, c

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.bincount(self.u, weights=self.w, minlength=self.n)
        d += np.bincount(self.v, weights=self.w, minlength=self.n)
        d.setflags(write=False)
        return d

    @cached_property
    def neighbor_counts(self) -> np.ndarray:
        c = np.bincount(self.u, minlength=self.n) + np.bincount(self.v, minlength=self.n)
        c.setflags(write=False)
        return c

    @cached_property
    def total_weight(self) -> float:
        return math.fsum(self.w.tolist())

    @cached_property
    def vol(self) -> float:
        """vol(G), the sum of weighted degrees (= twice the total edge weight)."""
        return 2.0 * self.total_weight

    @cached_property
    def weight_ratio(self) -> float:
        if self.m == 0:
            return 1.0
        return float(self.w.max() / self.w.min())

    @cached_property
    def is_unweighted(self) -> bool:
        return bool(np.all(self.w == 1.0))

    @cached_property
    def _csr(self):
        a = np.concatenate([self.u, self.v])
        b = np.concatenate([self.v, self.u])
        ww = np.concatenate([self.w, self.w])
        order = np.lexsort((b, a))
        a, b, ww = a[order], b[order], ww[order]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(a, minlength=self.n), out=indptr[1:])
        return indptr, b, ww

    def neighbors(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        indptr, nbrs, _ = self._csr
        return nbrs[indptr[v]:indptr[v + 1]]

    def neighbor_weights(self, v: int):
        self._check_vertex(v)
        indptr, nbrs, wts = self._csr
        return nbrs[indptr[v]:indptr[v + 1]], wts[indptr[v]:indptr[v + 1]]

    def adjacency_lists(self) -> list[list[int]]:
        indptr, nbrs, _ = self._csr
        nb = nbrs.tolist()
        ip = indptr.tolist()
        return [nb[ip[i]:ip[i + 1]] for i in range(self.n)]

    def sparse_adjacency(self) -> csr_matrix:
        indptr, nbrs, wts = self._csr
        return csr_matrix((wts, nbrs, indptr), shape=(self.n, self.n))

    @cached_property
    def components(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=np.int64)
        _, labels = connected_components(self.sparse_adjacency(), directed=False)
        return labels

    @cached_property
    def is_connected(self) -> bool:
        return self.n > 0 and int(self.components.max()) == 0

    @cached_property
    def is_regular(self) -> bool:
        """True when all weighted degrees coincide."""
        d = self.degrees
        return self.n > 0 and bool(np.allclose(d, d[0], rtol=0, atol=1e-12 * max(1.0, d[0])))

    def require_connected(self):
        if not self.is_connected:
            raise DomainError("graph must be connected")

    def _check_vertex(self, v):
        if not (0 <= int(v) < self.n):
            raise InputError(f"vertex {v} outside 0..{self.n - 1}")

    # ---- vertex sets -----------------------------------------------------

    def vertex_set(self, s, allow_empty=True) -> np.ndarray:
        """Validate ``s`` and return it as a sorted int array."""
        arr = np.asarray(sorted(int(x) for x in s), dtype=np.int64) if not isinstance(s, np.ndarray) \
            else np.sort(s.astype(np.int64))
        if len(arr) == 0:
            if not allow_empty:
                raise InputError("vertex set must be non-empty")
            return arr
        if arr[0] < 0 or arr[-1] >= self.n:
            raise InputError(f"vertex set has ids outside 0..{self.n - 1}")
        if np.any(arr[1:] == arr[:-1]):
            raise InputError("vertex set contains duplicates")
        return arr

    def mask(self, s) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[self.vertex_set(s)] = True
        return out


# ---- set-level primitives --------------------------------------------------


def degree(g: Graph, v: int) -> float:
    g._check_vertex(v)
    return float(g.degrees[int(v)])


def volume(g: Graph, s) -> float:
    idx = g.vertex_set(s)
    return math.fsum(g.degrees[idx].tolist())


def _boundary(g: Graph, mask: np.ndarray) -> float:
    cross = mask[g.u] != mask[g.v]
    return math.fsum(g.w[cross].tolist())


def cut_weight(g: Graph, a, b) -> float:
    """Total weight of edges with one endpoint in ``a`` and the other in ``b``."""
    ma = g.mask(a)
    mb = g.mask(b)
    if np.any(ma & mb):
        raise InputError("cut_weight needs disjoint vertex sets")
    sel = (ma[g.u] & mb[g.v]) | (mb[g.u] & ma[g.v])
    return math.fsum(g.w[sel].tolist())


def conductance(g: Graph, s) -> float:
    """Boundary weight of ``s`` over min(vol(s), vol(complement))."""
    idx = g.vertex_set(s)
    if len(idx) == 0 or len(idx) == g.n:
        raise DomainError("conductance needs a non-empty proper subset")
    mask = np.zeros(g.n, dtype=bool)
    mask[idx] = True
    vs = math.fsum(g.degrees[idx].tolist())
    denom = min(vs, g.vol - vs)
    if denom <= 0:
        raise DomainError("conductance undefined: one side has zero volume")
    return _boundary(g, mask) / denom


def graph_conductance(g: Graph, limit: int = EXHAUSTIVE_CONDUCTANCE_LIMIT) -> float:
    """Exact Φ(G) by enumerating all 2^(n-1) - 1 complementary subset pairs."""
    g.require_connected()
    if g.n > limit:
        raise CapacityError(f"graph_conductance enumerates 2^(n-1) subsets; n={g.n} > limit={limit}")
    if g.n < 2:
        raise DomainError("graph_conductance needs at least two vertices")
    n = g.n
    # vertex n-1 is always outside S, so each {S, complement} pair is seen once
    best = math.inf
    total = g.vol
    chunk = 1 << 12
    for start in range(1, 1 << (n - 1), chunk):
        masks = np.arange(start, min(start + chunk, 1 << (n - 1)), dtype=np.int64)
        bits_u = (masks[:, None] >> g.u[None, :]) & 1
        bits_v = (masks[:, None] >> g.v[None, :]) & 1
        cut = (bits_u != bits_v).astype(np.float64) @ g.w
        bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
        vs = bits.astype(np.float64) @ g.degrees
        phi = cut / np.minimum(vs, total - vs)
        best = min(best, float(phi.min()))
    return best


# ---- partitions --------------------------------------------------------------


def _canonical_labels(labels: np.ndarray) -> np.ndarray:
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


class Partition:
    """Disjoint cover of ``0..n-1`` by modules with canonical ids.

    Module ids are assigned in order of first occurrence when scanning
    vertices ``0..n-1``, so ``labels`` is a restricted-growth string.
    """

    __slots__ = ("labels", "_modules")

    def __init__(self, labels):
        arr = np.asarray(labels, dtype=np.int64).reshape(-1)
        if len(arr) and arr.min() < 0:
            raise InputError("module labels must be non-negative")
        self.labels = _canonical_labels(arr) if len(arr) else arr
        self.labels.setflags(write=False)
        self._modules = None

    @classmethod
    def from_modules(cls, modules: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        mods = [list(map(int, m)) for m in modules]
        if any(len(m) == 0 for m in mods):
            raise InputError("modules must be non-empty")
        total = sum(len(m) for m in mods)
        if n is None:
            n = total
        labels = np.full(n, -1, dtype=np.int64)
        for j, mod in enumerate(mods):
            for v in mod:
                if not 0 <= v < n:
                    raise InputError(f"vertex {v} outside 0..{n - 1}")
                if labels[v] != -1:
                    raise InputError(f"vertex {v} appears in two modules")
                labels[v] = j
        if np.any(labels < 0):
            raise InputError(f"partition does not cover vertex {int(np.argmax(labels < 0))}")
        return cls(labels)

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls(np.zeros(n, dtype=np.int64))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def L(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def modules(self) -> list[np.ndarray]:
        if self._modules is None:
            order = np.argsort(self.labels, kind="stable")
            bounds = np.cumsum(np.bincount(self.labels, minlength=self.L))[:-1]
            self._modules = np.split(order, bounds)
        return self._modules

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.L)

    def check(self, g: Graph):
        if self.n != g.n:
            raise InputError(f"partition covers {self.n} vertices but graph has {g.n}")

    def as_lists(self) -> list[list[int]]:
        return [m.tolist() for m in self.modules()]

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self):
        if self.n <= 16:
            return f"Partition({self.as_lists()})"
        return f"Partition(n={self.n}, L={self.L})"


def complement(g: Graph, s) -> np.ndarray:
    return np.flatnonzero(~g.mask(s))
