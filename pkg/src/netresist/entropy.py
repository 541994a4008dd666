"""Closed-form entropy quantities: H¹, H^P, resistance by a partition, security index.

All logarithms are base 2. Sums are accumulated with :func:`math.fsum` over
per-term values produced by :func:`info_term`, so two evaluations that
produce the same multiset of terms give bit-identical totals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError
from .graph import Graph, Partition

TOL = 1e-9


def info_term(c: float, a: float, b: float, vol: float) -> float:
    """-(c / vol) * log2(a / b), with 0 * log 0 = 0."""
    if c == 0 or a == b:
        return 0.0
    return -(c / vol) * math.log2(a / b)


def _require(g: Graph):
    if g.n == 0 or g.vol <= 0:
        raise DomainError("entropy needs a graph with positive volume")
    g.require_connected()


def h1(g: Graph) -> float:
    """One-dimensional structure entropy: Shannon entropy of d_i / vol(G)."""
    _require(g)
    vol = g.vol
    return math.fsum(info_term(d, d, vol, vol) for d in g.degrees.tolist())


def module_volumes_and_cuts(g: Graph, p: Partition):
    """Per-module volume V_j and boundary weight g_j."""
    p.check(g)
    lab = p.labels
    V = np.bincount(lab, weights=g.degrees, minlength=p.L)
    cross = lab[g.u] != lab[g.v]
    w = g.w[cross]
    cut = np.bincount(lab[g.u][cross], weights=w, minlength=p.L)
    cut += np.bincount(lab[g.v][cross], weights=w, minlength=p.L)
    return V, cut


def _hp_terms(g: Graph, p: Partition):
    V, cut = module_volumes_and_cuts(g, p)
    vol = g.vol
    Vl = V.tolist()
    intra = [info_term(d, d, Vl[j], vol) for d, j in zip(g.degrees.tolist(), p.labels.tolist())]
    boundary = [info_term(c, Vj, vol, vol) for c, Vj in zip(cut.tolist(), Vl)]
    return intra, boundary, V, cut


def hP(g: Graph, p: Partition) -> float:
    """Structure entropy of ``g`` given the partition ``p`` (two-level code)."""
    _require(g)
    intra, boundary, _, _ = _hp_terms(g, p)
    return math.fsum(intra + boundary)


def resistance_of_partition(g: Graph, p: Partition) -> float:
    _require(g)
    V, cut = module_volumes_and_cuts(g, p)
    vol = g.vol
    return math.fsum(info_term(Vj - c, Vj, vol, vol) for Vj, c in zip(V.tolist(), cut.tolist()))


@dataclass(frozen=True)
class ModuleRow:
    size: int
    entropy: float      # H_j, degree entropy inside the module
    conductance: float  # Φ(X_j); nan for the trivial partition
    volume: float
    boundary: float


@dataclass(frozen=True)
class Decomposition:
    intra_term: float
    boundary_term: float
    rows: list[ModuleRow]
    additivity_rhs: float         # intra + Σ (V_j/vol) log2(vol/V_j); equals h1
    phi_form_applicable: bool     # every V_j <= vol/2
    phi_form_resistance: float    # -Σ (1-Φ_j)(V_j/vol) log2(V_j/vol)

    @property
    def total(self) -> float:
        return self.intra_term + self.boundary_term


def decompose_hP(g: Graph, p: Partition) -> Decomposition:
    _require(g)
    intra_terms, boundary_terms, V, cut = _hp_terms(g, p)
    vol = g.vol
    per_module = [[] for _ in range(p.L)]
    for t, j in zip(intra_terms, p.labels.tolist()):
        per_module[j].append(t)
    rows = []
    ps_terms = []
    for j, (Vj, c) in enumerate(zip(V.tolist(), cut.tolist())):
        Hj = math.fsum(per_module[j]) * vol / Vj
        denom = min(Vj, vol - Vj)
        phi = c / denom if denom > 0 else math.nan
        rows.append(ModuleRow(int(p.sizes()[j]), Hj, phi, Vj, c))
        if denom > 0:
            ps_terms.append(info_term((1.0 - phi) * Vj, Vj, vol, vol))
    additivity = math.fsum(intra_terms + [info_term(Vj, Vj, vol, vol) for Vj in V.tolist()])
    applicable = bool(np.all(V <= vol / 2 + 1e-12)) and p.L > 1
    return Decomposition(
        intra_term=math.fsum(intra_terms),
        boundary_term=math.fsum(boundary_terms),
        rows=rows,
        additivity_rhs=additivity,
        phi_form_applicable=applicable,
        phi_form_resistance=math.fsum(ps_terms) if applicable else math.nan,
    )


def security_index(h1_bits: float, h2_bits: float) -> float:
    """θ = (H¹ - H²) / H¹."""
    if not h1_bits > 0:
        raise DomainError("security index needs h1 > 0")
    if h2_bits > h1_bits + TOL:
        raise InputError(f"h2={h2_bits} exceeds h1={h1_bits}")
    return (h1_bits - min(h2_bits, h1_bits)) / h1_bits


@dataclass
class EntropyReport:
    n: int
    m: int
    h1: float
    h2: float
    resistance: float
    security_index: float
    method: str
    partition: Partition
    exact: bool = field(default=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "h1": self.h1,
            "h2": self.h2,
            "resistance": self.resistance,
            "security_index": self.security_index,
            "method": self.method,
            "partition": self.partition.as_lists(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def make_report(g: Graph, p: Partition, method: str, exact: bool = False, h1_bits=None) -> EntropyReport:
    """Bundle H¹, H^P(p) and the derived resistance and security index.

    When ``exact`` is false, h2 is only an upper bound on the true H², so the
    reported resistance and security index are lower bounds.
    """
    a = h1(g) if h1_bits is None else h1_bits
    b = min(hP(g, p), a)
    return EntropyReport(
        n=g.n, m=g.m, h1=a, h2=b, resistance=a - b,
        security_index=security_index(a, b) if a > 0 else 0.0,
        method=method, partition=p, exact=exact,
    )


def is_resistor_graph(report: EntropyReport, theta: float) -> bool:
    if not 0 < theta < 1:
        raise InputError("theta must lie in (0, 1)")
    return report.security_index >= theta


def h1_lower_bound_check(g: Graph) -> tuple[float, bool]:
    """Lower bound (log2 m - 1)/2 on H¹, weakened for unbalanced weights.

    For a weight ratio W > 1 the exponent ε is the smallest value with
    W <= m^ε and the bound becomes ((1-ε) log2 m - 1) / 2.
    """
    m = g.m
    if m == 0:
        return -math.inf, True
    W = g.weight_ratio
    eps = 0.0 if W == 1.0 or m == 1 else math.log(W) / math.log(m)
    bound = ((1 - eps) * math.log2(m) - 1) / 2
    return bound, h1(g) >= bound - TOL
