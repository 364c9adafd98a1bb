"""Local partition oracle: answers P[v] by simulating the global greedy around v.

Each vertex gets a pseudorandom rank; sorting by rank is the permutation the
global algorithm processes.  Vertex ``y`` is still present when the anchor of
rank ``t`` runs iff ``rank(y) >= t`` and no anchor of lower rank within
``rho - 1`` hops captured it.  Deciding that means resolving those anchors,
which in turn asks about presence at even lower ranks, so the recursion
terminates.  Resolution runs on an explicit stack of generators (no Python
recursion) with a per-query budget on newly resolved anchors.
"""

from __future__ import annotations

import math
import statistics
import threading
from collections import deque
from dataclasses import dataclass

from .graph import Graph, QueryCounter
from .partition import (
    Part,
    Partition,
    PartitionParams,
    ball_size_bound,
    global_partition,
    grow_isolated,
    search_rng,
)
from .seeding import derive_rng, rank_key

__all__ = [
    "BudgetExhausted",
    "GlobalOracle",
    "OracleConfig",
    "OracleSession",
    "materialize",
    "query",
    "query_cost_profile",
    "rank",
]


class BudgetExhausted(RuntimeError):
    """Local simulation budget exhausted.

    Raised instead of returning a possibly wrong part; usually phi is too small
    for the instance or the instance is far from hyperfinite.
    """

    def __init__(self, vertex: int, anchors_resolved: int, vertices_touched: int, work_cap: int):
        self.vertex = vertex
        self.anchors_resolved = anchors_resolved
        self.vertices_touched = vertices_touched
        self.work_cap = work_cap
        super().__init__(
            f"local simulation budget exhausted answering vertex {vertex}: "
            f"{anchors_resolved} anchors resolved (cap {work_cap}), {vertices_touched} vertices touched"
        )


@dataclass(frozen=True)
class OracleConfig:
    params: PartitionParams
    seed: int = 0
    work_cap: int | None = None
    retries: int = 1

    def __post_init__(self):
        if self.work_cap is not None and self.work_cap < self.params.rho:
            raise ValueError(f"work_cap must be >= rho ({self.params.rho}), got {self.work_cap}")
        if self.retries < 1:
            raise ValueError("retries must be >= 1")

    def resolved_work_cap(self, d: int) -> int:
        if self.work_cap is not None:
            return self.work_cap
        rho = self.params.rho
        depth = math.ceil(math.log2(rho)) if rho > 1 else 0
        return max(rho, 10 * rho * ball_size_bound(max(d, 1), depth) * max(d, 1))


class OracleSession:
    """Memoized local simulation of :func:`global_partition` for one (graph, config).

    Answers do not depend on which vertices were queried before, or in what
    order.  Adjacency lists are cached per session, so :attr:`counters` counts
    distinct lists read.  Queries are serialized by a lock.
    """

    def __init__(self, g: Graph, config: OracleConfig):
        self.g = g
        self.config = config
        self.work_cap = config.resolved_work_cap(g.d_max)
        self.memo: dict[int, frozenset[int] | None] = {}
        self.counters = QueryCounter()
        self.last_depth = 0
        self._adj: dict[int, tuple[int, ...]] = {}
        self._rank: dict[int, int] = {}
        self._candidates: dict[int, list[int]] = {}
        # per vertex: [position reached in its candidate list, rank of capturing anchor or None]
        self._scan: dict[int, list] = {}
        self._lock = threading.RLock()

    @property
    def n(self) -> int:
        return self.g.n

    def neighbours(self, v: int) -> tuple[int, ...]:
        nbrs = self._adj.get(v)
        if nbrs is None:
            nbrs = self._adj[v] = self.g.neighbours(v)
            self.counters.add(neighbour=1)
        return nbrs

    def touched(self) -> set[int]:
        """Vertices whose adjacency this session has read."""
        return set(self._adj)

    def rank(self, v: int) -> int:
        r = self._rank.get(v)
        if r is None:
            r = self._rank[v] = rank_key(self.config.seed, v)
        return r

    def candidates(self, y: int) -> list[int]:
        """Anchors that could ever capture ``y``: the (rho-1)-ball, by increasing rank."""
        c = self._candidates.get(y)
        if c is None:
            radius = self.config.params.rho - 1
            dist = {y: 0}
            queue = deque([y])
            while queue:
                x = queue.popleft()
                if dist[x] == radius:
                    continue
                for u in self.neighbours(x):
                    if u not in dist:
                        dist[u] = dist[x] + 1
                        queue.append(u)
            c = self._candidates[y] = sorted(dist, key=self.rank)
        return c

    # -- generator tasks; each yields anchor ids and receives their parts --

    def _present(self, y: int, t: int):
        if self.rank(y) < t:
            return False
        state = self._scan.get(y)
        if state is None:
            state = self._scan[y] = [0, None]
        if state[1] is not None:
            return state[1] >= t
        cands = self.candidates(y)
        while state[0] < len(cands):
            c = cands[state[0]]
            rc = self.rank(c)
            if rc >= t:
                break
            part = yield c
            state[0] += 1
            if part is not None and y in part:
                state[1] = rc
                return False
        return True

    def _resolve(self, a: int):
        t = self.rank(a)
        if not (yield from self._present(a, t)):
            self.memo[a] = None
            return None
        params = self.config.params
        found = None
        for attempt in range(self.config.retries):
            search = grow_isolated(self.neighbours, a, params.phi, params.rho, search_rng(self.config.seed, a, attempt))
            try:
                q = next(search)
                while True:
                    q = search.send((yield from self._present(q, t)))
            except StopIteration as stop:
                found = stop.value
            if found is not None:
                break
        part = frozenset(found) if found is not None else frozenset((a,))
        self.memo[a] = part
        return part

    def _owner(self, v: int):
        t = self.rank(v)
        for c in self.candidates(v):
            if self.rank(c) > t:
                break
            part = yield c
            if part is not None and v in part:
                return Part(part, c)
        raise AssertionError(f"vertex {v} was not captured by any anchor")  # unreachable

    def _run(self, v: int, task):
        stack = [task]
        value = None
        started = 0
        depth = 0
        try:
            while stack:
                try:
                    request = stack[-1].send(value)
                except StopIteration as stop:
                    stack.pop()
                    value = stop.value
                    continue
                if request in self.memo:
                    value = self.memo[request]
                    continue
                started += 1
                if started > self.work_cap:
                    raise BudgetExhausted(v, started - 1, len(self._adj), self.work_cap)
                stack.append(self._resolve(request))
                depth = max(depth, len(stack) - 1)
                value = None
        finally:
            for gen in stack:
                gen.close()
            self.last_depth = depth
        return value

    def query(self, v: int) -> Part:
        if not 0 <= v < self.g.n:
            raise IndexError(f"vertex {v} out of range for graph with n={self.g.n}")
        with self._lock:
            return self._run(v, self._owner(v))

    def materialize(self, order=None) -> Partition:
        return materialize(self, order)


def rank(session: OracleSession, v: int) -> int:
    return session.rank(v)


def query(session: OracleSession, v: int) -> Part:
    return session.query(v)


def materialize(session: OracleSession, order=None) -> Partition:
    """Query every vertex (in ``order`` if given) and assemble the partition.

    Parts are listed by increasing anchor rank, matching :func:`global_partition`.
    """
    n = session.n
    by_anchor: dict[int, Part] = {}
    for v in range(n) if order is None else order:
        part = session.query(v)
        by_anchor.setdefault(part.anchor, part)
    parts = sorted(by_anchor.values(), key=lambda p: session.rank(p.anchor))
    return Partition.from_parts(parts, n)


class GlobalOracle:
    """Oracle interface backed by one full run of the global algorithm."""

    def __init__(self, g: Graph, config: OracleConfig):
        self.g = g
        self.config = config
        self.counters = QueryCounter()
        self._partition: Partition | None = None
        self._cut = None
        self._lock = threading.Lock()

    def _ensure(self) -> Partition:
        with self._lock:
            if self._partition is None:
                before = self.g.counter.snapshot()
                self._partition, self._cut = global_partition(
                    self.g, self.config.params, self.config.seed, self.config.retries
                )
                after = self.g.counter.snapshot()
                self.counters.add(neighbour=after["neighbour_queries"] - before["neighbour_queries"],
                                  degree=after["degree_queries"] - before["degree_queries"])
            return self._partition

    def query(self, v: int) -> Part:
        if not 0 <= v < self.g.n:
            raise IndexError(f"vertex {v} out of range for graph with n={self.g.n}")
        return self._ensure().part(v)

    def materialize(self, order=None) -> Partition:
        return self._ensure()


def make_oracle(kind: str, g: Graph, config: OracleConfig):
    if kind == "local":
        return OracleSession(g, config)
    if kind == "global":
        return GlobalOracle(g, config)
    raise ValueError(f"unknown oracle kind {kind!r}; expected 'local' or 'global'")


def query_cost_profile(g: Graph, config: OracleConfig, sample_count: int) -> dict:
    """Neighbour-list reads needed to answer single queries from a cold session.

    Each sampled vertex is answered by a fresh session, so the numbers are the
    full cost of one query with nothing memoized.  Queries that exhaust the
    budget are counted separately and excluded from the statistics.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    costs: list[int] = []
    anchors: list[int] = []
    exhausted = 0
    for i in range(sample_count):
        v = derive_rng(config.seed, "profile", i).randrange(g.n)
        session = OracleSession(g, config)
        try:
            session.query(v)
        except BudgetExhausted:
            exhausted += 1
            continue
        costs.append(session.counters.neighbour_queries)
        anchors.append(len(session.memo))
    stats = {"samples": sample_count, "exhausted": exhausted, "n": g.n}
    if costs:
        stats.update(
            min=min(costs),
            median=statistics.median(costs),
            max=max(costs),
            mean=statistics.fmean(costs),
            median_anchors=statistics.median(anchors),
        )
    return stats
