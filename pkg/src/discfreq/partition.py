"""Randomized isolated-neighbourhood search and the global greedy partition.

The search is written once, as a generator that asks its driver whether a
vertex is still present in the remaining graph.  The global algorithm answers
from a mask; the local oracle answers by recursively simulating lower-ranked
anchors.  Sharing the generator is what makes the two views agree exactly.
"""

from __future__ import annotations

import json
from bisect import insort
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Generator, Iterable, Sequence

from .graph import EdgeSet, Graph
from .seeding import derive_rng, rank_key

__all__ = [
    "CheckResult",
    "CutReport",
    "Part",
    "Partition",
    "PartitionParams",
    "VerificationReport",
    "bad_vertex_fraction",
    "ball_size_bound",
    "boundary_edge_count",
    "cut_report",
    "find_isolated_neighbourhood",
    "global_partition",
    "grow_isolated",
    "search_rng",
    "verify_partition",
]


@dataclass(frozen=True)
class PartitionParams:
    phi: float
    rho: int

    def __post_init__(self):
        if not self.phi > 0:
            raise ValueError(f"phi must be positive, got {self.phi}")
        if int(self.rho) != self.rho or self.rho < 1:
            raise ValueError(f"rho must be an integer >= 1, got {self.rho}")
        object.__setattr__(self, "rho", int(self.rho))


@dataclass(frozen=True)
class Part:
    members: frozenset[int]
    anchor: int

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v: int) -> bool:
        return v in self.members

    def sorted_members(self) -> list[int]:
        return sorted(self.members)


@dataclass(frozen=True)
class Partition:
    """Parts in creation order, i.e. by increasing anchor rank."""

    parts: tuple[Part, ...]
    part_of: tuple[int, ...]
    search_queries: tuple[int, ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def from_parts(cls, parts: Iterable[Part], n: int, search_queries: Sequence[int] = ()) -> "Partition":
        parts = tuple(parts)
        part_of = [-1] * n
        for i, p in enumerate(parts):
            for v in p.members:
                part_of[v] = i
        return cls(parts, tuple(part_of), tuple(search_queries))

    def __len__(self) -> int:
        return len(self.parts)

    def part(self, v: int) -> Part:
        return self.parts[self.part_of[v]]

    def sizes(self) -> list[int]:
        return [len(p) for p in self.parts]


@dataclass(frozen=True)
class CutReport:
    cut_edges: EdgeSet
    cut_fraction: Fraction
    bad_fraction: Fraction
    k: int

    @property
    def cut_edge_count(self) -> int:
        return len(self.cut_edges)


# -- search -----------------------------------------------------------------

ActivityQuery = Generator[int, bool, "set[int] | None"]


def grow_isolated(neighbours: Callable[[int], Sequence[int]], v: int, phi: float, rho: int, rng) -> ActivityQuery:
    """Grow a set from ``v`` by uniform frontier picks until it is isolated.

    Yields vertex ids whose presence in the remaining graph must be decided
    and expects a bool back.  Returns the first set ``S`` with
    ``e(S) <= phi * |S|`` (the singleton ``{v}`` included) or ``None`` once
    ``|S|`` reaches ``rho`` without passing.  The boundary count ``e`` only
    counts edges to vertices still present.
    """
    known: dict[int, bool] = {}
    frontier: list[int] = []
    in_frontier: set[int] = set()
    s = {v}
    e = 0
    for u in neighbours(v):
        alive = known[u] = yield u
        if alive:
            e += 1
            frontier.append(u)
            in_frontier.add(u)
    if e <= phi:
        return s
    while len(s) < rho and frontier:
        u = frontier.pop(rng.randrange(len(frontier)))
        in_frontier.discard(u)
        s.add(u)
        for w in neighbours(u):
            if w in s:
                e -= 1
            elif w in in_frontier:
                e += 1
            else:
                alive = known.get(w)
                if alive is None:
                    alive = known[w] = yield w
                if alive:
                    e += 1
                    insort(frontier, w)
                    in_frontier.add(w)
        if e <= phi * len(s):
            return s
    return None


def drive(gen: ActivityQuery, is_active: Callable[[int], bool]):
    """Run a search generator against a plain activity predicate."""
    try:
        q = next(gen)
        while True:
            q = gen.send(is_active(q))
    except StopIteration as stop:
        return stop.value


def search_rng(seed: int, anchor: int, attempt: int = 0):
    """Randomness for one search; depends only on (seed, anchor, attempt)."""
    return derive_rng(seed, "search", anchor, attempt)


def find_isolated_neighbourhood(g, v: int, params: PartitionParams, active=None, rng=None) -> Part | None:
    """One randomized search for a (rho, phi)-isolated neighbourhood of ``v``.

    ``active`` is a predicate (or indexable mask) for the remaining graph;
    ``None`` means every vertex is present.
    """
    if active is None:
        is_active = _always
    elif callable(active):
        is_active = active
    else:
        is_active = active.__getitem__
    if not is_active(v):
        raise ValueError(f"vertex {v} is not in the remaining graph")
    if rng is None:
        rng = search_rng(0, v)
    found = drive(grow_isolated(g.neighbours, v, params.phi, params.rho, rng), is_active)
    return None if found is None else Part(frozenset(found), v)


def _always(_v: int) -> bool:
    return True


def global_partition(g: Graph, params: PartitionParams, seed: int, retries: int = 1,
                     k: int = 1) -> tuple[Partition, CutReport]:
    """Greedy partition over a uniformly random vertex order.

    The order is the sort by per-vertex rank, and every search draws from
    randomness keyed by ``(seed, anchor, attempt)``; the local oracle relies on
    both choices.  A vertex whose searches all fail becomes a singleton.
    """
    if retries < 1:
        raise ValueError("retries must be >= 1")
    n = g.n
    order = sorted(range(n), key=lambda v: rank_key(seed, v))
    active = bytearray(b"\x01") * n
    parts: list[Part] = []
    costs: list[int] = []
    for v in order:
        if not active[v]:
            continue
        part = None
        for attempt in range(retries):
            before = g.counter.neighbour_queries
            part = find_isolated_neighbourhood(g, v, params, active, search_rng(seed, v, attempt))
            costs.append(g.counter.neighbour_queries - before)
            if part is not None:
                break
        if part is None:
            part = Part(frozenset((v,)), v)
        for u in part.members:
            active[u] = 0
        parts.append(part)
    partition = Partition.from_parts(parts, n, costs)
    return partition, cut_report(g, partition, k)


# -- verification -----------------------------------------------------------


def boundary_edge_count(g: Graph, s: Iterable[int], active=None) -> int:
    """Edges with exactly one endpoint in ``s`` whose other endpoint is present."""
    s = set(s)
    adj = g.adjacency()
    if active is None:
        return sum(1 for u in s for w in adj[u] if w not in s)
    is_active = active if callable(active) else active.__getitem__
    return sum(1 for u in s for w in adj[u] if w not in s and is_active(w))


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    witness: dict | None = None


@dataclass(frozen=True)
class VerificationReport:
    checks: dict[str, CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> dict[str, dict | None]:
        return {name: c.witness for name, c in self.checks.items() if not c.passed}

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": {name: {"passed": c.passed, "witness": c.witness} for name, c in sorted(self.checks.items())},
        }


def verify_partition(g: Graph, p: Partition, params: PartitionParams) -> VerificationReport:
    """Check non-emptiness, disjointness, coverage, connectivity and the size cap."""
    adj = g.adjacency()
    owner: dict[int, int] = {}
    checks: dict[str, CheckResult] = {}

    empty = next((i for i, part in enumerate(p.parts) if not part.members), None)
    checks["nonempty"] = CheckResult(empty is None, None if empty is None else {"part": empty})

    clash = None
    for i, part in enumerate(p.parts):
        for v in sorted(part.members):
            if v in owner and clash is None:
                clash = {"vertex": v, "parts": [owner[v], i]}
            owner.setdefault(v, i)
    checks["disjoint"] = CheckResult(clash is None, clash)

    out_of_range = sorted(v for v in owner if not 0 <= v < g.n)
    missing = next((v for v in range(g.n) if v not in owner), None)
    if out_of_range:
        checks["coverage"] = CheckResult(False, {"unknown_vertex": out_of_range[0]})
    else:
        checks["coverage"] = CheckResult(missing is None, None if missing is None else {"vertex": missing})

    oversized = next((i for i, part in enumerate(p.parts) if len(part.members) > params.rho), None)
    checks["size_cap"] = CheckResult(
        oversized is None,
        None if oversized is None else {"part": oversized, "size": len(p.parts[oversized].members), "rho": params.rho},
    )

    disconnected = None
    for i, part in enumerate(p.parts):
        if part.members and not out_of_range and not _connected(adj, part.members):
            disconnected = {"part": i, "members": sorted(part.members)}
            break
    checks["connected"] = CheckResult(disconnected is None, disconnected)

    bad_anchor = next((i for i, part in enumerate(p.parts) if part.anchor not in part.members), None)
    checks["anchor"] = CheckResult(bad_anchor is None, None if bad_anchor is None else {"part": bad_anchor})

    stale = None
    if len(p.part_of) != g.n:
        stale = {"part_of_length": len(p.part_of), "n": g.n}
    else:
        stale = next(({"vertex": v, "part_of": p.part_of[v], "owner": owner.get(v)}
                      for v in range(g.n) if p.part_of[v] != owner.get(v, -1)), None)
    checks["part_of"] = CheckResult(stale is None, stale)
    return VerificationReport(checks)


def _connected(adj, members) -> bool:
    start = next(iter(members))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for u in adj[x]:
            if u in members and u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(members)


def cut_edges(g: Graph, p: Partition) -> EdgeSet:
    return EdgeSet((u, w) for u, w in g.edges() if p.part_of[u] != p.part_of[w])


def cut_report(g: Graph, p: Partition, k: int = 1) -> CutReport:
    cut = cut_edges(g, p)
    n = max(g.n, 1)
    return CutReport(cut, Fraction(len(cut), n), bad_vertex_fraction(g, cut, k), k)


def bad_vertex_fraction(g: Graph, cut: Iterable[tuple[int, int]], k: int) -> Fraction:
    """Exact fraction of vertices within distance ``k`` of some cut-edge endpoint."""
    adj = g.adjacency()
    bad: set[int] = set()
    for edge in cut:
        for root in edge:
            dist = {root: 0}
            queue = deque([root])
            while queue:
                x = queue.popleft()
                if dist[x] == k:
                    continue
                for u in adj[x]:
                    if u not in dist:
                        dist[u] = dist[x] + 1
                        queue.append(u)
            bad.update(dist)
    return Fraction(len(bad), max(g.n, 1))


def ball_size_bound(d: int, k: int) -> int:
    """B(d, k) = 2 * (1 + d + ... + d**k): vertices within k of an edge's endpoints."""
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    if d == 1:
        return 2 * (k + 1)
    return 2 * (d ** (k + 1) - 1) // (d - 1)


def partition_to_json_dict(p: Partition, cut: CutReport, params: PartitionParams, seed: int) -> dict:
    return {
        "seed": seed,
        "phi": params.phi,
        "rho": params.rho,
        "parts": [part.sorted_members() for part in p.parts],
        "anchors": [part.anchor for part in p.parts],
        "cut_edge_count": cut.cut_edge_count,
        "cut_fraction": float(cut.cut_fraction),
        "bad_fraction": float(cut.bad_fraction),
        "k": cut.k,
    }


def partition_from_json_dict(data: dict, n: int) -> Partition:
    anchors = data.get("anchors") or [min(members, default=-1) for members in data["parts"]]
    parts = [Part(frozenset(members), anchor) for members, anchor in zip(data["parts"], anchors)]
    return Partition.from_parts(parts, n)


def dumps_partition(p: Partition, cut: CutReport, params: PartitionParams, seed: int) -> str:
    return json.dumps(partition_to_json_dict(p, cut, params, seed), sort_keys=True)
