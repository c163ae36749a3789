"""Weighted directed graphs: construction, random generation, edge-list files.

Edges are stored as ``(src, dst, weight)``; an edge ``j -> i`` with weight
``w`` contributes ``w * g(x_i, x_j, ...)`` to the rate of node ``i``.
Weights are the deterministic means; parametric noise on them is applied
downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateEdge,
    EmptyGraph,
    GraphFormatError,
    IndexOutOfRange,
    NonpositiveFactor,
    NonpositiveWeight,
    SelfLoop,
)

__all__ = [
    "WeightedDigraph",
    "build_graph",
    "mean_weight",
    "generate_random_graph",
    "scale_weights",
    "read_graph",
    "write_graph",
]


@dataclass(frozen=True)
class WeightedDigraph:
    n: int
    edges: tuple[tuple[int, int, float], ...]

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def src(self) -> np.ndarray:
        return np.array([e[0] for e in self.edges], dtype=np.intp)

    @cached_property
    def dst(self) -> np.ndarray:
        return np.array([e[1] for e in self.edges], dtype=np.intp)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([e[2] for e in self.edges], dtype=float)

    @cached_property
    def _lookup(self) -> dict[tuple[int, int], float]:
        return {(s, d): w for s, d, w in self.edges}

    def weight(self, src: int, dst: int) -> float | None:
        """Weight of edge ``src -> dst`` or None if absent."""
        return self._lookup.get((src, dst))

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self._lookup

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n)


def build_graph(n: int, edges) -> WeightedDigraph:
    """Validate and freeze an edge list.

    Raises DuplicateEdge, IndexOutOfRange, NonpositiveWeight or SelfLoop.
    """
    n = int(n)
    if n < 1:
        raise IndexOutOfRange(f"node count must be positive, got {n}")
    seen = set()
    clean = []
    for k, edge in enumerate(edges):
        s, d, w = edge
        s, d, w = int(s), int(d), float(w)
        if not (0 <= s < n and 0 <= d < n):
            raise IndexOutOfRange(f"edge {k}: ({s}, {d}) outside [0, {n})")
        if s == d:
            raise SelfLoop(f"edge {k}: self-loop on node {s}")
        if not w > 0:
            raise NonpositiveWeight(f"edge {k}: weight {w!r} is not positive")
        if (s, d) in seen:
            raise DuplicateEdge(f"edge {k}: ({s}, {d}) already present")
        seen.add((s, d))
        clean.append((s, d, w))
    return WeightedDigraph(n, tuple(clean))


def mean_weight(g: WeightedDigraph) -> float:
    if g.m == 0:
        raise EmptyGraph("mean weight undefined for a graph without edges")
    return float(np.mean(g.weights))


def generate_random_graph(n: int, p: float, weight: float = 1.0, seed: int = 0) -> WeightedDigraph:
    """Directed Erdos-Renyi graph: each ordered pair i != j kept with probability p."""
    if n < 2:
        raise IndexOutOfRange(f"need at least 2 nodes, got {n}")
    if not 0 < p <= 1:
        raise ValueError(f"edge probability must lie in (0, 1], got {p}")
    if not weight > 0:
        raise NonpositiveWeight(f"weight {weight!r} is not positive")
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    w = float(weight)
    return WeightedDigraph(int(n), tuple((int(s), int(d), w) for s, d in zip(src, dst)))


def scale_weights(g: WeightedDigraph, factor: float) -> WeightedDigraph:
    if not factor > 0:
        raise NonpositiveFactor(f"scale factor {factor!r} is not positive")
    factor = float(factor)
    return WeightedDigraph(g.n, tuple((s, d, w * factor) for s, d, w in g.edges))


def read_graph(path) -> WeightedDigraph:
    """Parse the ``n m`` header + ``src dst weight`` line format."""
    lines = Path(path).read_text().splitlines()
    body = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.strip()]
    if not body:
        raise GraphFormatError(f"{path}: empty file")
    lineno, head = body[0]
    if len(head) != 2:
        raise GraphFormatError(f"{path}:{lineno}: header must be 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphFormatError(f"{path}:{lineno}: header values must be integers") from None
    if len(body) - 1 != m:
        raise GraphFormatError(f"{path}:{lineno}: header declares {m} edges, found {len(body) - 1}")
    if n < 1:
        raise GraphFormatError(f"{path}:{lineno}: node count must be positive")
    edges, seen = [], set()
    for lineno, fields in body[1:]:
        if len(fields) != 3:
            raise GraphFormatError(f"{path}:{lineno}: expected 'src dst weight'")
        try:
            s, d, w = int(fields[0]), int(fields[1]), float(fields[2])
        except ValueError:
            raise GraphFormatError(f"{path}:{lineno}: cannot parse {' '.join(fields)!r}") from None
        if not (0 <= s < n and 0 <= d < n):
            raise GraphFormatError(f"{path}:{lineno}: node index out of range [0, {n})")
        if s == d:
            raise GraphFormatError(f"{path}:{lineno}: self-loop on node {s}")
        if not (w > 0 and math.isfinite(w)):
            raise GraphFormatError(f"{path}:{lineno}: weight {w!r} is not a positive number")
        if (s, d) in seen:
            raise GraphFormatError(f"{path}:{lineno}: duplicate edge {s}->{d}")
        seen.add((s, d))
        edges.append((s, d, w))
    return build_graph(n, edges)


def write_graph(g: WeightedDigraph, path) -> None:
    out = [f"{g.n} {g.m}"]
    out += [f"{s} {d} {w!r}" for s, d, w in g.edges]
    Path(path).write_text("\n".join(out) + "\n")
