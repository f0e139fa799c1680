"""Undirected connected graphs, standard families and BFS spanning trees.

Vertices are ``0..n-1``.  The text format is one line holding ``n``
followed by one ``u v`` line per edge; blank lines and lines starting
with ``#`` are ignored.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    Disconnected,
    DuplicateEdge,
    EmptyGraph,
    InvalidParameter,
    MalformedLine,
    SelfLoop,
)

FAMILIES = ("star", "path", "cycle", "random_tree", "gnp_connected")


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise EmptyGraph("graph must have at least one vertex")
        if len(self.adjacency) != self.n:
            raise InvalidParameter(
                f"adjacency has {len(self.adjacency)} rows, expected {self.n}"
            )
        for v, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise DuplicateEdge(f"adjacency of {v} is not a sorted set")
            for u in nbrs:
                if not 0 <= u < self.n:
                    raise InvalidParameter(f"vertex {u} out of range")
                if u == v:
                    raise SelfLoop(f"self-loop at {v}")
                if v not in self.adjacency[u]:
                    raise InvalidParameter(f"edge {v}-{u} is not symmetric")
        if not _is_connected(self.n, self.adjacency):
            raise Disconnected("graph is not connected")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 1:
            raise EmptyGraph("graph must have at least one vertex")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameter(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise SelfLoop(f"self-loop at {u}")
            if v in nbrs[u]:
                raise DuplicateEdge(f"duplicate edge {min(u, v)}-{max(u, v)}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def to_text(self) -> str:
        lines = [str(self.n)] + [f"{u} {v}" for u, v in self.edges()]
        return "\n".join(lines) + "\n"


def _is_connected(n: int, adjacency: Sequence[Sequence[int]]) -> bool:
    seen = [False] * n
    seen[0] = True
    stack = [0]
    while stack:
        v = stack.pop()
        for u in adjacency[v]:
            if not seen[u]:
                seen[u] = True
                stack.append(u)
    return all(seen)


def parse_graph(text: str) -> Graph:
    lines = [
        (i + 1, ln.strip())
        for i, ln in enumerate(text.splitlines())
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines:
        raise MalformedLine("missing vertex count")
    lineno, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise MalformedLine(f"line {lineno}: expected vertex count, got {head!r}") from None
    if n == 0:
        raise EmptyGraph("n = 0")
    if n < 0:
        raise MalformedLine(f"line {lineno}: negative vertex count")
    edges = []
    for lineno, ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise MalformedLine(f"line {lineno}: expected 'u v', got {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedLine(f"line {lineno}: non-integer vertex in {ln!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise MalformedLine(f"line {lineno}: vertex out of range 0..{n - 1}")
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def generate(family: str, n: int, seed: int = 0, p: float = 0.5) -> Graph:
    """Build a connected graph from a named family.

    ``random_tree`` attaches vertex ``i`` to a uniformly chosen earlier
    vertex; ``gnp_connected`` redraws G(n, p) until it is connected.  Both
    are deterministic given ``seed``.
    """
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    if family == "star":
        edges = [(0, v) for v in range(1, n)]
    elif family == "path":
        edges = [(v, v + 1) for v in range(n - 1)]
    elif family == "cycle":
        edges = [(v, v + 1) for v in range(n - 1)]
        if n >= 3:
            edges.append((0, n - 1))
    elif family == "random_tree":
        rng = np.random.default_rng(seed)
        edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
    elif family == "gnp_connected":
        if not 0.0 < p <= 1.0:
            raise InvalidParameter(f"edge probability must be in (0, 1], got {p}")
        rng = np.random.default_rng(seed)
        iu, ju = np.triu_indices(n, k=1)
        while True:
            keep = rng.random(iu.size) < p
            edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
            nbrs: list[list[int]] = [[] for _ in range(n)]
            for u, v in edges:
                nbrs[u].append(v)
                nbrs[v].append(u)
            if _is_connected(n, nbrs):
                break
    else:
        raise InvalidParameter(f"unknown family {family!r}; choose from {FAMILIES}")
    return Graph.from_edges(n, edges)


@dataclass(frozen=True)
class SpanningTree:
    root: int
    parent: tuple[Optional[int], ...]
    children: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.parent)

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (0 if self.parent[v] is None else 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in enumerate(self.parent) if p is not None]

    def adjacent(self, u: int, v: int) -> bool:
        return self.parent[u] == v or self.parent[v] == u


def spanning_tree(g: Graph, root: int = 0) -> SpanningTree:
    """Breadth-first spanning tree, neighbours explored in ascending order."""
    if not 0 <= root < g.n:
        raise InvalidParameter(f"root {root} out of range for n={g.n}")
    parent: list[Optional[int]] = [None] * g.n
    seen = [False] * g.n
    seen[root] = True
    queue = deque([root])
    children: list[list[int]] = [[] for _ in range(g.n)]
    while queue:
        v = queue.popleft()
        for u in g.adjacency[v]:
            if not seen[u]:
                seen[u] = True
                parent[u] = v
                children[v].append(u)
                queue.append(u)
    return SpanningTree(root, tuple(parent), tuple(tuple(sorted(c)) for c in children))


def leaves(t: SpanningTree) -> frozenset[int]:
    """Non-root vertices of tree degree one."""
    return frozenset(v for v in range(t.n) if v != t.root and not t.children[v])
