"""Immutable bounded-degree graphs with instrumented query access."""

from __future__ import annotations

import io
import math
import threading
from bisect import bisect_left
from collections import deque
from typing import Iterable, TextIO

__all__ = [
    "EdgeSet",
    "Graph",
    "GraphFormatError",
    "QueryCounter",
    "FAMILIES",
    "ball",
    "default_rho",
    "dumps",
    "generate",
    "load_graph",
    "loads",
    "neighbours",
    "sample_vertex",
    "save_graph",
]


class GraphFormatError(ValueError):
    """Raised when a graph file or an edge list violates the graph invariants."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class QueryCounter:
    """Thread-safe tally of neighbour-list reads, degree reads and vertex draws."""

    __slots__ = ("_lock", "neighbour_queries", "degree_queries", "vertex_samples")

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.neighbour_queries = 0
        self.degree_queries = 0
        self.vertex_samples = 0

    def add(self, neighbour: int = 0, degree: int = 0, samples: int = 0) -> None:
        with self._lock:
            self.neighbour_queries += neighbour
            self.degree_queries += degree
            self.vertex_samples += samples

    def reset(self) -> None:
        with self._lock:
            self.neighbour_queries = 0
            self.degree_queries = 0
            self.vertex_samples = 0

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return {
                "neighbour_queries": self.neighbour_queries,
                "degree_queries": self.degree_queries,
                "vertex_samples": self.vertex_samples,
            }

    def __repr__(self) -> str:
        return f"QueryCounter({self.snapshot()})"


class EdgeSet(frozenset):
    """Set of undirected edges stored as normalized ``(min, max)`` pairs."""

    def __new__(cls, edges: Iterable[tuple[int, int]] = ()):
        return super().__new__(cls, ((u, w) if u < w else (w, u) for u, w in edges))

    def sorted(self) -> list[tuple[int, int]]:
        return sorted(self)


class Graph:
    """Undirected simple graph on vertices ``0..n-1`` with a declared degree bound.

    Neighbour lists are sorted tuples.  The graph never changes after
    construction; partitioning code represents removals with its own masks.
    Every access through :meth:`neighbours`, :meth:`degree` and
    :meth:`sample_vertex` is charged to :attr:`counter`.
    """

    def __init__(self, adjacency: Iterable[Iterable[int]], d_max: int | None = None):
        adj = tuple(tuple(sorted(nbrs)) for nbrs in adjacency)
        n = len(adj)
        if n >= 1 << 32:
            raise GraphFormatError("graphs with 2**32 or more vertices are not supported")
        for v, nbrs in enumerate(adj):
            for i, u in enumerate(nbrs):
                if not 0 <= u < n:
                    raise GraphFormatError(f"vertex {v} lists out-of-range neighbour {u}")
                if u == v:
                    raise GraphFormatError(f"self-loop at vertex {v}")
                if i and nbrs[i - 1] == u:
                    raise GraphFormatError(f"parallel edge {v}-{u}")
        for v, nbrs in enumerate(adj):
            for u in nbrs:
                if not _contains(adj[u], v):
                    raise GraphFormatError(f"symmetry violation: {v} lists {u} but {u} does not list {v}")
        max_deg = max((len(a) for a in adj), default=0)
        if d_max is None:
            d_max = max_deg
        if max_deg > d_max:
            worst = next(v for v, a in enumerate(adj) if len(a) == max_deg)
            raise GraphFormatError(f"degree-bound violation: vertex {worst} has degree {max_deg} > d_max={d_max}")
        self._adj = adj
        self.n = n
        self.d_max = d_max
        self.m = sum(len(a) for a in adj) // 2
        self.counter = QueryCounter()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], d_max: int | None = None) -> "Graph":
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, w in edges:
            if u == w:
                raise GraphFormatError(f"self-loop at vertex {u}")
            adj[u].add(w)
            adj[w].add(u)
        return cls(adj, d_max)

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for graph with n={self.n}")

    def neighbours(self, v: int) -> tuple[int, ...]:
        self._check(v)
        self.counter.add(neighbour=1)
        return self._adj[v]

    def degree(self, v: int) -> int:
        self._check(v)
        self.counter.add(degree=1)
        return len(self._adj[v])

    def sample_vertex(self, rng) -> int:
        if self.n == 0:
            raise ValueError("cannot sample from an empty graph")
        self.counter.add(samples=1)
        return rng.randrange(self.n)

    def edges(self) -> list[tuple[int, int]]:
        """All edges as sorted ``(u, w)`` pairs with ``u < w``.  Not charged."""
        return [(v, u) for v, nbrs in enumerate(self._adj) for u in nbrs if v < u]

    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Raw adjacency for ground-truth oracles; bypasses the counter."""
        return self._adj

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.d_max == other.d_max and self._adj == other._adj

    def __hash__(self) -> int:
        return hash((self.d_max, self._adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, d_max={self.d_max})"


def _contains(sorted_tuple: tuple[int, ...], x: int) -> bool:
    i = bisect_left(sorted_tuple, x)
    return i < len(sorted_tuple) and sorted_tuple[i] == x


def neighbours(g: Graph, v: int) -> tuple[int, ...]:
    return g.neighbours(v)


def sample_vertex(g: Graph, rng) -> int:
    return g.sample_vertex(rng)


def ball(g, v: int, r: int, allowed=None) -> set[int]:
    """Vertices within ``r`` hops of ``v``.

    One neighbour query is charged per expanded vertex, i.e. per vertex at
    distance ``< r``.  ``allowed`` optionally restricts the search to an
    induced subgraph.
    """
    if r < 0:
        raise ValueError("radius must be non-negative")
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range for graph with n={g.n}")
    seen = {v}
    queue = deque([(v, 0)])
    while queue:
        x, dist = queue.popleft()
        if dist == r:
            continue
        for u in g.neighbours(x):
            if u not in seen and (allowed is None or u in allowed):
                seen.add(u)
                queue.append((u, dist + 1))
    return seen


# -- text format ------------------------------------------------------------


def loads(text: str) -> Graph:
    return load_graph(io.StringIO(text))


def load_graph(source: TextIO | bytes | str) -> Graph:
    """Parse the ``n d_max m`` / ``v: u1 u2 ...`` text format.

    ``source`` may be a text stream, raw bytes, or a path.  Vertex labels that
    are not exactly ``0..n-1`` are mapped to dense ids in order of appearance.
    """
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return load_graph(fh)

    header = None
    rows: list[tuple[int, str, list[str]]] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError("header must be 'n d_max m'", lineno)
            try:
                header = tuple(int(p) for p in parts)
            except ValueError:
                raise GraphFormatError("header fields must be integers", lineno) from None
            if min(header) < 0:
                raise GraphFormatError("header fields must be non-negative", lineno)
            continue
        label, sep, rest = line.partition(":")
        if not sep or not label.strip():
            raise GraphFormatError("expected 'v: u1 u2 ...'", lineno)
        rows.append((lineno, label.strip(), rest.split()))
    if header is None:
        raise GraphFormatError("missing header", 1)
    n, d_max, m = header
    if len(rows) != n:
        raise GraphFormatError(f"header declares {n} vertices but {len(rows)} vertex lines found")

    labels = [label for _, label, _ in rows]
    if sorted(labels, key=_label_sort) == [str(i) for i in range(n)]:
        index = {str(i): i for i in range(n)}
    else:
        index = {}
        for lineno, label, _ in rows:
            if label in index:
                raise GraphFormatError(f"duplicate vertex line for {label!r}", lineno)
            index[label] = len(index)

    adj: list[list[int]] = [[] for _ in range(n)]
    line_of = [0] * n
    for lineno, label, nbrs in rows:
        v = index[label]
        line_of[v] = lineno
        seen = set()
        for tok in nbrs:
            if tok not in index:
                raise GraphFormatError(f"unknown neighbour {tok!r}", lineno)
            u = index[tok]
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {label}", lineno)
            if u in seen:
                raise GraphFormatError(f"duplicate neighbour {tok} of {label}", lineno)
            seen.add(u)
            adj[v].append(u)
        if len(adj[v]) > d_max:
            raise GraphFormatError(f"degree-bound violation: vertex {label} has degree {len(adj[v])} > {d_max}", lineno)
    nbr_sets = [set(a) for a in adj]
    for v in range(n):
        for u in adj[v]:
            if v not in nbr_sets[u]:
                raise GraphFormatError(f"symmetry violation: {labels[v]} lists {labels[u]} but not vice versa", line_of[v])
    edge_count = sum(len(a) for a in adj) // 2
    if edge_count != m:
        raise GraphFormatError(f"header declares {m} edges but {edge_count} found")
    return Graph(adj, d_max)


def _label_sort(label: str):
    return (0, int(label)) if label.isdigit() else (1, label)


def dumps(g: Graph) -> str:
    out = [f"{g.n} {g.d_max} {g.m}"]
    for v, nbrs in enumerate(g.adjacency()):
        out.append(f"{v}: " + " ".join(map(str, nbrs)) if nbrs else f"{v}:")
    return "\n".join(out) + "\n"


def save_graph(g: Graph, dest: TextIO | str) -> None:
    if isinstance(dest, str):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(dumps(g))
    else:
        dest.write(dumps(g))


# -- generators -------------------------------------------------------------

FAMILIES = ("path", "cycle", "grid", "complete_graph_capped", "disjoint_triangles", "binary_tree")


def generate(family: str, *, n: int | None = None, w: int | None = None, h: int | None = None,
             m: int | None = None, d_max: int | None = None) -> Graph:
    """Deterministic member of a test family.

    ``path``/``cycle``/``complete_graph_capped``/``binary_tree`` take ``n``;
    ``grid`` takes ``w`` and ``h``; ``disjoint_triangles`` takes ``m``.
    """
    if family == "grid":
        w, h = _positive(w, "w"), _positive(h, "h")
        edges = []
        for y in range(h):
            for x in range(w):
                v = y * w + x
                if x + 1 < w:
                    edges.append((v, v + 1))
                if y + 1 < h:
                    edges.append((v, v + w))
        size = w * h
    elif family == "disjoint_triangles":
        m = _positive(m, "m")
        edges = [e for t in range(m) for e in ((3 * t, 3 * t + 1), (3 * t + 1, 3 * t + 2), (3 * t, 3 * t + 2))]
        size = 3 * m
    else:
        n = _positive(n, "n")
        size = n
        if family == "path":
            edges = [(i, i + 1) for i in range(n - 1)]
        elif family == "cycle":
            if n < 3:
                raise ValueError("cycle needs n >= 3")
            edges = [(i, (i + 1) % n) for i in range(n)]
        elif family == "complete_graph_capped":
            edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
        elif family == "binary_tree":
            edges = [((i - 1) // 2, i) for i in range(1, n)]
        else:
            raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    degree = [0] * size
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    natural = max(degree)
    if d_max is None:
        d_max = natural
    if natural > d_max:
        raise ValueError(f"{family} with these parameters has maximum degree {natural} > d_max={d_max}")
    return Graph.from_edges(size, edges, d_max)


def _positive(x: int | None, name: str) -> int:
    if x is None or int(x) < 1:
        raise ValueError(f"{name} must be a positive integer, got {x!r}")
    return int(x)


def default_rho(family: str, phi: float) -> int:
    """A part-size cap for which ``family`` is (phi, rho)-hyperfinite."""
    if phi <= 0:
        raise ValueError("phi must be positive")
    if family in ("cycle", "path"):
        return _ceil(1 / phi)
    if family == "grid":
        return _ceil(4 / phi ** 2)
    if family == "disjoint_triangles":
        return 3
    if family == "binary_tree":
        return _ceil(2 / phi)
    raise ValueError(f"no default rho for family {family!r}; supply rho explicitly")


def _ceil(x: float) -> int:
    # absorb float noise such as 4 / 0.1**2 == 399.99999999999994
    return max(1, math.ceil(x - 1e-9))
