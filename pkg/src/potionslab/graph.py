"""Undirected simple graphs with the queries the simulator and embeddings need.

Nodes are the integers 0..n-1. Edges are unordered pairs without loops or
duplicates. An optional per-node block label in {1, 2} can ride along as
metadata; nothing in the simulation reads it.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = ["Graph", "read_edge_list", "write_edge_list"]


class Graph:
    """Immutable undirected graph.

    Adjacency is stored both as a frozen edge set and as per-node neighbor
    tuples built once at construction, so partner selection in the hot
    simulation loop is a single indexed draw.
    """

    __slots__ = ("n", "_edges", "_nbrs", "labels")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]],
                 labels: Optional[Sequence[int]] = None):
        if n < 1:
            raise ValueError("graph needs at least one node")
        canon = set()
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) out of range for n={n}")
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            canon.add((i, j) if i < j else (j, i))
        self.n = n
        self._edges = frozenset(canon)
        nbrs = [[] for _ in range(n)]
        for i, j in sorted(canon):
            nbrs[i].append(j)
            nbrs[j].append(i)
        self._nbrs = tuple(tuple(sorted(a)) for a in nbrs)
        if labels is not None:
            labels = tuple(int(x) for x in labels)
            if len(labels) != n:
                raise ValueError("labels must cover every node")
            if any(x not in (1, 2) for x in labels):
                raise ValueError("labels must be 1 or 2")
        self.labels = labels

    @property
    def edges(self) -> frozenset:
        return self._edges

    def neighbors(self, i: int) -> frozenset:
        """Set of nodes adjacent to i."""
        if not (0 <= i < self.n):
            raise IndexError(f"node {i} out of range for n={self.n}")
        return frozenset(self._nbrs[i])

    def neighbor_list(self, i: int) -> tuple:
        """Neighbors of i as a sorted tuple (deterministic iteration order)."""
        if not (0 <= i < self.n):
            raise IndexError(f"node {i} out of range for n={self.n}")
        return self._nbrs[i]

    def degrees(self) -> list[int]:
        return [len(a) for a in self._nbrs]

    def degree(self, i: int) -> int:
        return len(self._nbrs[i])

    def edge_count(self) -> int:
        return len(self._edges)

    def is_connected(self) -> bool:
        """True iff a traversal from node 0 reaches every node."""
        if self.n == 1:
            return True
        seen = bytearray(self.n)
        seen[0] = 1
        stack = [0]
        count = 1
        while stack:
            u = stack.pop()
            for v in self._nbrs[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    stack.append(v)
        return count == self.n

    def adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency matrix, zero diagonal."""
        a = np.zeros((self.n, self.n))
        for i, j in self._edges:
            a[i, j] = 1.0
            a[j, i] = 1.0
        return a

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self._edges == other._edges
                and self.labels == other.labels)

    def __hash__(self):
        return hash((self.n, self._edges, self.labels))

    def __repr__(self):
        lab = "" if self.labels is None else ", labeled"
        return f"Graph(n={self.n}, edges={len(self._edges)}{lab})"


def write_edge_list(g: Graph, path) -> None:
    """Write `i j` pairs, one per line, 0-based.

    A `# n=<N>` header preserves isolated nodes; when block labels are
    present they go on a second header line (`# labels=1,1,...`), since a
    per-edge column could not round-trip labels of degree-zero nodes.
    """
    with open(path, "w") as fh:
        fh.write(f"# n={g.n}\n")
        if g.labels is not None:
            fh.write("# labels=" + ",".join(str(x) for x in g.labels) + "\n")
        for i, j in sorted(g.edges):
            fh.write(f"{i} {j}\n")


def read_edge_list(path) -> Graph:
    """Parse the format written by write_edge_list.

    The `# n=` header is optional; without it, n is inferred as
    max(node index) + 1.
    """
    n = None
    labels = None
    edges = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n="):
                    n = int(body[2:])
                elif body.startswith("labels="):
                    labels = [int(x) for x in body[7:].split(",")]
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"bad edge line: {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        n = max((max(i, j) for i, j in edges), default=-1) + 1
        if n == 0:
            raise ValueError("empty edge list with no # n= header")
    return Graph(n, edges, labels)
