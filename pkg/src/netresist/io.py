"""Text formats: edge lists, partitions, coding trees, entropy reports."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError
from .graph import Graph, Partition


def _lines(source):
    if isinstance(source, (str, Path)) and Path(source).exists():
        return Path(source).read_text().splitlines()
    if isinstance(source, str):
        return source.splitlines()
    return list(source)


def parse_edge_list(source) -> Graph:
    """Read ``u v [w]`` lines; ``#`` starts a comment, blank lines are skipped.

    Vertex ids must be non-negative integers. When the ids are not already
    ``0..n-1`` they are mapped densely in sorted order and the original ids
    are kept in ``graph.meta["labels"]``.
    """
    raw = []
    for lineno, line in enumerate(_lines(source), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'u v [w]', got {text!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"vertex ids must be integers, got {text!r}", lineno) from None
        if a < 0 or b < 0:
            raise ParseError("vertex ids must be non-negative", lineno)
        try:
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ParseError(f"weight must be a number, got {parts[2]!r}", lineno) from None
        if a == b:
            raise ParseError(f"self-loop at vertex {a}", lineno)
        if not w > 0 or w == float("inf"):
            raise ParseError(f"weight must be positive and finite, got {parts[2]!r}", lineno)
        raw.append((a, b, w, lineno))

    ids = sorted({x for a, b, _, _ in raw for x in (a, b)})
    dense = ids == list(range(len(ids)))
    index = {x: i for i, x in enumerate(ids)}
    seen = {}
    edges = []
    for a, b, w, lineno in raw:
        key = (min(a, b), max(a, b))
        if key in seen:
            raise ParseError(f"duplicate edge {key} (first seen on line {seen[key]})", lineno)
        seen[key] = lineno
        edges.append((index[a], index[b], w))
    meta = {} if dense else {"labels": ids}
    return Graph(len(ids), edges, meta=meta)


def format_edge_list(g: Graph) -> str:
    labels = g.meta.get("labels")
    out = []
    for a, b, w in g.edges():
        if labels is not None:
            a, b = labels[a], labels[b]
        out.append(f"{a} {b}" if w == 1.0 else f"{a} {b} {w!r}")
    return "\n".join(out) + ("\n" if out else "")


def parse_partition(source, g: Graph) -> Partition:
    """Read ``v module_id`` lines against the id mapping of ``g``."""
    labels = g.meta.get("labels")
    index = {x: i for i, x in enumerate(labels)} if labels is not None else None
    assign = np.full(g.n, -1, dtype=np.int64)
    for lineno, line in enumerate(_lines(source), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'v module_id', got {text!r}", lineno)
        try:
            v, mod = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"expected integers, got {text!r}", lineno) from None
        if index is not None:
            if v not in index:
                raise ParseError(f"unknown vertex {v}", lineno)
            v = index[v]
        if not 0 <= v < g.n:
            raise ParseError(f"vertex {v} outside 0..{g.n - 1}", lineno)
        if mod < 0:
            raise ParseError("module ids must be non-negative", lineno)
        if assign[v] != -1:
            raise ParseError(f"vertex {v} assigned twice", lineno)
        assign[v] = mod
    if np.any(assign < 0):
        raise InputError(f"partition file does not assign vertex {int(np.argmax(assign < 0))}")
    return Partition(assign)


def format_partition(p: Partition, g: Graph | None = None) -> str:
    labels = g.meta.get("labels") if g is not None else None
    rows = []
    for v, mod in enumerate(p.labels.tolist()):
        rows.append(f"{labels[v] if labels is not None else v} {mod}")
    return "\n".join(rows) + "\n"


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=None, separators=(", ", ": "))
