"""Rooted k-discs, their isomorphism types, and frequency vectors."""

from __future__ import annotations

import itertools
import json
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .canonical import DEFAULT_VERTEX_CAP, DiscTooLargeError, canonical_bytes

__all__ = [
    "DiscKey",
    "DiscTooLargeError",
    "FrequencyVector",
    "RootedDisc",
    "canonical_key",
    "disc_type_count_bound",
    "enumerate_disc_types",
    "exact_frequency_vector",
    "extract_disc",
    "l1_distance",
]

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class RootedDisc:
    """Induced subgraph around a root, relabelled so the root is local vertex 0.

    Remaining vertices are numbered by (distance from root, original id).
    """

    adjacency: tuple[tuple[int, ...], ...]
    distance: tuple[int, ...]
    origin: tuple[int, ...] = field(default=(), compare=False)

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    @property
    def root(self) -> int:
        return 0

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple[int, int]], root: int = 0) -> "RootedDisc":
        """Build the disc of a connected rooted graph given as an edge list."""
        adj: list[list[int]] = [[] for _ in range(vertex_count)]
        for u, w in edges:
            adj[u].append(w)
            adj[w].append(u)
        dist = {root: 0}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for u in adj[x]:
                if u not in dist:
                    dist[u] = dist[x] + 1
                    queue.append(u)
        if len(dist) != vertex_count:
            raise ValueError("rooted graph is not connected")
        return _relabel(adj, dist, root)


def _relabel(adj, dist: Mapping[int, int], root: int) -> RootedDisc:
    order = sorted(dist, key=lambda x: (dist[x], x))
    local = {x: i for i, x in enumerate(order)}
    assert order[0] == root
    return RootedDisc(
        adjacency=tuple(tuple(sorted(local[u] for u in adj[x] if u in local)) for x in order),
        distance=tuple(dist[x] for x in order),
        origin=tuple(order),
    )


class _Uncounted:
    """Read-only view that bypasses query accounting (for ground-truth oracles)."""

    def __init__(self, g):
        self.n = g.n
        self.neighbours = g.adjacency().__getitem__


def extract_disc(g, v: int, k: int, allowed=None) -> RootedDisc:
    """Radius-``k`` disc of ``v``, optionally inside the subgraph induced by ``allowed``.

    Reads every vertex of the ball once, including depth-``k`` vertices, since
    edges between two vertices at distance ``k`` belong to the induced disc.
    """
    if k < 0:
        raise ValueError("radius must be non-negative")
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range for graph with n={g.n}")
    if allowed is not None and v not in allowed:
        raise ValueError(f"root {v} is outside the allowed vertex set")
    dist = {v: 0}
    nbrs: dict[int, tuple[int, ...]] = {}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        nbrs[x] = g.neighbours(x)
        if dist[x] == k:
            continue
        for u in nbrs[x]:
            if u not in dist and (allowed is None or u in allowed):
                dist[u] = dist[x] + 1
                queue.append(u)
    return _relabel(nbrs, dist, v)


@dataclass(frozen=True, order=True)
class DiscKey:
    canonical_bytes: bytes

    def hex(self) -> str:
        return self.canonical_bytes.hex()

    @classmethod
    def fromhex(cls, s: str) -> "DiscKey":
        return cls(bytes.fromhex(s))

    @property
    def vertex_count(self) -> int:
        return int.from_bytes(self.canonical_bytes[:2], "big")

    def __repr__(self) -> str:
        return f"DiscKey({self.hex()})"


@lru_cache(maxsize=1 << 16)
def _cached_key(adjacency, distance, cap) -> DiscKey:
    return DiscKey(canonical_bytes(adjacency, distance, cap))


def canonical_key(disc: RootedDisc, cap: int = DEFAULT_VERTEX_CAP) -> DiscKey:
    """Bytes shared by exactly the discs root-preserving isomorphic to ``disc``."""
    if disc.vertex_count > cap:
        raise DiscTooLargeError(disc.vertex_count, cap)
    return _cached_key(disc.adjacency, disc.distance, cap)


class FrequencyVector:
    """Sparse normalized distribution over disc types; values are exact fractions."""

    __slots__ = ("entries",)

    def __init__(self, entries: Mapping[DiscKey, Fraction | float]):
        entries = {k: v for k, v in entries.items() if v != 0}
        if any(v < 0 or v > 1 for v in entries.values()):
            raise ValueError("frequencies must lie in [0, 1]")
        if abs(float(sum(entries.values())) - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"frequencies sum to {float(sum(entries.values()))}, not 1")
        self.entries = dict(sorted(entries.items()))

    @classmethod
    def from_counts(cls, counts: Mapping[DiscKey, int]) -> "FrequencyVector":
        total = sum(counts.values())
        if total == 0:
            raise ValueError("cannot normalize an empty tally")
        return cls({k: Fraction(c, total) for k, c in counts.items()})

    def __getitem__(self, key: DiscKey):
        return self.entries.get(key, 0)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def items(self):
        return self.entries.items()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FrequencyVector) and self.entries == other.entries

    def __repr__(self) -> str:
        inner = ", ".join(f"{k.hex()}: {float(v):.6g}" for k, v in self.entries.items())
        return f"FrequencyVector({{{inner}}})"

    def to_json_dict(self) -> dict[str, float]:
        return {k.hex(): float(v) for k, v in sorted(self.entries.items(), key=lambda kv: kv[0].hex())}

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: Mapping[str, float]) -> "FrequencyVector":
        return cls({DiscKey.fromhex(k): Fraction(v).limit_denominator(1 << 40) for k, v in data.items()})


def exact_frequency_vector(g, k: int, cap: int = DEFAULT_VERTEX_CAP) -> FrequencyVector:
    """Ground truth: tally the disc type of every vertex.  Costs Theta(n * d**k)."""
    if k < 0:
        raise ValueError("radius must be non-negative")
    view = _Uncounted(g)
    counts = Counter(canonical_key(extract_disc(view, v, k), cap) for v in range(g.n))
    return FrequencyVector.from_counts(counts)


def l1_distance(f: FrequencyVector, h: FrequencyVector):
    return sum((abs(f[key] - h[key]) for key in f.entries.keys() | h.entries.keys()), Fraction(0))


def disc_type_count_bound(d: int, k: int) -> int | None:
    """A-priori bound on the number of rooted k-disc types under degree bound d.

    Counts labelled graphs on the largest possible ball, ``2**(B(B-1)/2)`` with
    ``B = 1 + d + ... + d**k``.  Returns ``None`` when the bound exceeds 2**62;
    callers should then rely on the observed type count.
    """
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    b = sum(d ** i for i in range(k + 1))
    exponent = b * (b - 1) // 2
    return None if exponent > 62 else 1 << exponent


def enumerate_disc_types(d: int, k: int, max_vertices: int = 6) -> set[DiscKey]:
    """Every rooted k-disc type with maximum degree <= d, by brute force over labelled graphs."""
    # Moore bound: the root has <= d children, every later vertex <= d - 1
    top = 1 + d * sum((d - 1) ** i for i in range(k))
    if top > max_vertices:
        raise ValueError(f"discs may have up to {top} vertices; exhaustive enumeration capped at {max_vertices}")
    types: set[DiscKey] = set()
    for m in range(1, top + 1):
        pairs = list(itertools.combinations(range(m), 2))
        for mask in range(1 << len(pairs)):
            edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
            deg = [0] * m
            for u, w in edges:
                deg[u] += 1
                deg[w] += 1
            if max(deg) > d:
                continue
            try:
                disc = RootedDisc.from_edges(m, edges)
            except ValueError:
                continue
            if max(disc.distance) <= k:
                types.add(canonical_key(disc))
    return types
