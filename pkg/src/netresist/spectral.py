"""Normalized Laplacian spectra, k-way conductance certificates and Cheeger checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError, InputError
from .graph import Graph, Partition, conductance

DENSE_LIMIT = 4096
TOL = 1e-8


def normalized_laplacian(g: Graph) -> np.ndarray:
    """Dense I - D^{-1/2} A D^{-1/2}."""
    if g.n > DENSE_LIMIT:
        raise CapacityError(f"dense Laplacian limited to n <= {DENSE_LIMIT}, got {g.n}")
    d = g.degrees
    if g.n and np.any(d <= 0):
        raise DomainError(f"isolated vertex {int(np.argmax(d <= 0))}")
    s = 1.0 / np.sqrt(d)
    L = np.eye(g.n)
    vals = g.w * s[g.u] * s[g.v]
    L[g.u, g.v] -= vals
    L[g.v, g.u] -= vals
    return L


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # ascending
    residual: float          # max |L v - λ v| over computed pairs
    method: str

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def problems(self, connected: bool = True, tol: float = TOL) -> list[str]:
        lam = self.eigenvalues
        out = []
        if len(lam) == 0:
            return out
        if lam[0] < -tol or lam[-1] > 2 + tol:
            out.append(f"eigenvalues leave [0, 2]: [{lam[0]}, {lam[-1]}]")
        if connected and lam[0] > tol:
            out.append(f"smallest eigenvalue {lam[0]} is not zero")
        if abs(lam.sum() - self.n) > self.n * tol:
            out.append(f"trace {lam.sum()} differs from n={self.n}")
        if self.residual > tol:
            out.append(f"residual {self.residual} above {tol}")
        return out


def jacobi_eigh(A: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100):
    """Cyclic-by-row Jacobi rotations until the off-diagonal Frobenius norm is below ``tol``."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(max(0.0, np.sum(A * A) - np.sum(np.diag(A) ** 2)))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta)) if theta != 0 else 1.0
                c = 1 / np.hypot(1.0, t)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise CapacityError(f"Jacobi did not converge in {max_sweeps} sweeps")
    lam = np.diag(A).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], V[:, order]


def eigenvalues(L: np.ndarray, method: str = "lapack", vectors: bool = True) -> Spectrum:
    """Full spectrum of a symmetric matrix, ascending.

    ``lapack`` uses numpy's symmetric eigensolver; ``jacobi`` runs the
    cyclic Jacobi routine (practical only for small matrices). With
    ``vectors=False`` the residual is not computed and reported as 0.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if n > DENSE_LIMIT:
        raise CapacityError(f"dense eigensolver limited to n <= {DENSE_LIMIT}, got {n}")
    if not np.allclose(L, L.T, atol=1e-12, rtol=0):
        raise InputError("matrix is not symmetric")
    if method == "jacobi":
        lam, V = jacobi_eigh(L)
    elif method == "lapack":
        if not vectors:
            return Spectrum(np.linalg.eigvalsh(L), 0.0, method)
        lam, V = np.linalg.eigh(L)
    else:
        raise InputError(f"unknown eigen method {method!r}")
    residual = float(np.abs(L @ V - V * lam).max()) if n else 0.0
    return Spectrum(lam, residual, method)


def graph_spectrum(g: Graph, method: str = "lapack", vectors: bool = True) -> Spectrum:
    return eigenvalues(normalized_laplacian(g), method=method, vectors=vectors)


def _module_list(g: Graph, modules):
    if isinstance(modules, Partition):
        return [m for m in modules.modules()]
    out = [g.vertex_set(m, allow_empty=False) for m in modules]
    seen = np.zeros(g.n, dtype=bool)
    for m in out:
        if np.any(seen[m]):
            raise InputError("modules overlap")
        seen[m] = True
    return out


def k_way_conductance_upper(g: Graph, modules) -> tuple[int, float]:
    """(k, max Φ over the given disjoint modules), an upper bound on φ(k)."""
    mods = _module_list(g, modules)
    if not mods:
        raise InputError("need at least one module")
    return len(mods), max(conductance(g, m) for m in mods)


def cheeger_lower_check(spectrum: Spectrum, k: int, max_phi: float, tol: float = TOL) -> bool:
    """λ_k / 2 <= max_phi, the constant-free direction of the high-order Cheeger inequality."""
    if not 1 <= k <= spectrum.n:
        raise InputError(f"k={k} outside 1..{spectrum.n}")
    return bool(spectrum.eigenvalues[k - 1] / 2 <= max_phi + tol)


def small_eigenvalue_census(g_or_spectrum, threshold: float) -> int:
    """Number of normalized-Laplacian eigenvalues at or below ``threshold``."""
    sp = g_or_spectrum if isinstance(g_or_spectrum, Spectrum) else graph_spectrum(g_or_spectrum, vectors=False)
    return int(np.count_nonzero(sp.eigenvalues <= threshold + 1e-12))


def combinatorial_census(g: Graph, p: Partition, eps: float, phi_cap: float, size_cap: int) -> dict:
    """Volume share of modules with Φ <= phi_cap and size <= size_cap (measurement only)."""
    p.check(g)
    rows = []
    qualified_vol = 0.0
    for mod in p.modules():
        size = len(mod)
        vol_m = float(g.degrees[mod].sum())
        try:
            phi = conductance(g, mod)
        except DomainError:
            phi = None
        ok = phi is not None and phi <= phi_cap and size <= size_cap
        if ok:
            qualified_vol += vol_m
        rows.append({"size": size, "volume": vol_m, "conductance": phi, "qualified": ok})
    frac = qualified_vol / g.vol if g.vol > 0 else 0.0
    return {
        "modules": len(rows),
        "qualified": sum(r["qualified"] for r in rows),
        "volume_fraction": frac,
        "target_fraction": 1 - 2 * eps,
        "meets_target": frac >= 1 - 2 * eps,
        "rows": rows,
    }
