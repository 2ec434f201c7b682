"""Simple undirected graphs and their edge-list text format.

The text format is a header line ``"n m"`` followed by one ``"u v"`` line
per edge, 1-indexed, with ``u < v`` and lines sorted.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Graph:
    """A simple undirected graph stored as a symmetric 0/1 adjacency matrix
    with zero diagonal. Vertices are ``0 .. n-1``."""

    adjacency: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.array(self.adjacency, dtype=np.int64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {A.shape}")
        if not np.array_equal(A, A.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise ValueError("simple graphs have no loops")
        if not np.all((A == 0) | (A == 1)):
            raise ValueError("adjacency entries must be 0 or 1")
        A.setflags(write=False)
        object.__setattr__(self, "adjacency", A)

    @classmethod
    def from_edges(cls, n, edges):
        A = np.zeros((n, n), dtype=np.int64)
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            A[u, v] = A[v, u] = 1
        return cls(A)

    @classmethod
    def empty(cls, n):
        return cls(np.zeros((n, n), dtype=np.int64))

    @classmethod
    def complete(cls, n):
        return cls(np.ones((n, n), dtype=np.int64) - np.eye(n, dtype=np.int64))

    @classmethod
    def cycle(cls, n):
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def path(cls, n):
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.sum() // 2)

    def edges(self):
        iu, ju = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def degrees(self):
        return self.adjacency.sum(axis=1)

    def is_regular(self) -> bool:
        deg = self.degrees()
        return bool(deg.size == 0 or np.all(deg == deg[0]))

    def neighbors(self, v):
        return np.flatnonzero(self.adjacency[v])

    def permuted(self, perm):
        """Relabel vertex ``v`` as ``perm[v]``."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(perm.size)
        return Graph(self.adjacency[np.ix_(inv, inv)])

    def __eq__(self, other):
        return isinstance(other, Graph) and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())

    def to_edgelist(self) -> str:
        lines = [f"{self.n} {self.num_edges}"]
        lines += [f"{u + 1} {v + 1}" for u, v in self.edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edgelist(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or len(rows[0]) != 2:
            raise ValueError("missing 'n m' header")
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 2:
                raise ValueError(f"line {lineno}: expected 'u v'")
            u, v = int(row[0]) - 1, int(row[1]) - 1
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"line {lineno}: vertex out of range 1..{n}")
            edges.append((u, v))
        g = cls.from_edges(n, edges)
        if g.num_edges != m:
            raise ValueError(f"header announces {m} edges, found {g.num_edges}")
        return g
