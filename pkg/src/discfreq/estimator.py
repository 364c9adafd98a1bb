"""End-to-end estimation: sample vertices, query the oracle, summarize, evaluate."""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .disc import FrequencyVector, _Uncounted, canonical_key, exact_frequency_vector, extract_disc, l1_distance
from .graph import Graph, default_rho, dumps
from .partition import Part, PartitionParams, ball_size_bound, cut_report
from .seeding import derive_rng

__all__ = [
    "EstimateParams",
    "EstimateReport",
    "SummaryComponent",
    "SummaryGraph",
    "build_summary",
    "choose_phi",
    "choose_sample_size",
    "estimate",
    "evaluate",
    "plan_partition_params",
    "summary_frequency_vector",
]

SCHEMA_VERSION = 1
MAX_SAMPLE_SIZE = 10 ** 9
PILOT_SIZE = 200


@dataclass(frozen=True)
class EstimateParams:
    epsilon: float
    k: int
    phi_override: float | None = None
    rho_override: int | None = None
    sample_size_override: int | None = None
    chernoff_constant: float | None = None
    failure_budget: float = 0.1
    t_estimate: int | None = None
    pilot_size: int = PILOT_SIZE

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        for name in ("phi_override", "rho_override", "sample_size_override", "chernoff_constant", "t_estimate"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive when given")
        if not 0 < self.failure_budget < 1:
            raise ValueError("failure_budget must lie in (0, 1)")

    @property
    def vacuous(self) -> bool:
        # every pair of distributions is within l1 distance 2
        return self.epsilon >= 2


def choose_phi(epsilon: float, d: int, k: int) -> float:
    """Largest phi whose cut error, phi * B(d, k), stays within epsilon / 2."""
    return epsilon / (2 * ball_size_bound(d, k))


def choose_sample_size(epsilon: float, t_estimate: int, failure_budget: float = 0.1,
                       override: int | None = None) -> int:
    """Smallest N with 2T exp(-2N (eps/2T)^2) <= failure_budget."""
    if override is not None:
        return int(override)
    if t_estimate < 1:
        raise ValueError("t_estimate must be >= 1")
    n = math.ceil(2 * t_estimate ** 2 / epsilon ** 2 * math.log(2 * t_estimate / failure_budget))
    if n > MAX_SAMPLE_SIZE:
        raise OverflowError(f"sample size {n} is impractical; pass an explicit sample size override")
    return n


def plan_partition_params(g: Graph, params: EstimateParams, family: str | None = None) -> PartitionParams:
    phi = params.phi_override or choose_phi(params.epsilon, max(g.d_max, 1), params.k)
    if params.rho_override is not None:
        rho = params.rho_override
    elif family is not None:
        rho = default_rho(family, phi)
    else:
        raise ValueError("rho cannot be derived without a known graph family; pass rho explicitly")
    return PartitionParams(phi, rho)


# -- summary graph ----------------------------------------------------------


@dataclass(frozen=True)
class SummaryComponent:
    sample_index: int
    sampled_vertex: int
    anchor: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class SummaryGraph:
    """Disjoint union of the sampled parts, one copy per sample."""

    source: Graph = field(repr=False, compare=False)
    components: tuple[SummaryComponent, ...]

    @property
    def size(self) -> int:
        return sum(len(c.members) for c in self.components)

    @property
    def component_count(self) -> int:
        return len(self.components)

    @cached_property
    def graph(self) -> Graph:
        adj = self.source.adjacency()
        out: list[list[int]] = []
        for comp in self.components:
            base = len(out)
            local = {v: base + i for i, v in enumerate(comp.members)}
            out.extend([local[u] for u in adj[v] if u in local] for v in comp.members)
        return Graph(out, self.source.d_max)

    def to_text(self) -> str:
        return dumps(self.graph)

    def provenance(self) -> list[dict]:
        offset = 0
        rows = []
        for c in self.components:
            rows.append({"sample_index": c.sample_index, "sampled_vertex": c.sampled_vertex, "anchor": c.anchor,
                         "first_local_id": offset, "members": list(c.members)})
            offset += len(c.members)
        return rows


def build_summary(parts: Sequence[Part], g: Graph, sampled: Sequence[int] | None = None) -> SummaryGraph:
    if sampled is None:
        sampled = [p.anchor for p in parts]
    return SummaryGraph(
        g,
        tuple(SummaryComponent(i, v, p.anchor, tuple(sorted(p.members))) for i, (p, v) in enumerate(zip(parts, sampled))),
    )


def _part_type_counts(g: Graph, members: tuple[int, ...], k: int) -> Counter:
    view = _Uncounted(g)
    allowed = frozenset(members)
    return Counter(canonical_key(extract_disc(view, v, k, allowed)) for v in members)


def summary_frequency_vector(h: SummaryGraph, k: int) -> FrequencyVector:
    """Exact frequency vector of ``h.graph``; repeated components are tallied once and weighted."""
    multiplicity = Counter(c.members for c in h.components)
    total: Counter = Counter()
    for members, times in multiplicity.items():
        for key, count in _part_type_counts(h.source, members, k).items():
            total[key] += count * times
    return FrequencyVector.from_counts(total)


# -- estimation -------------------------------------------------------------


@dataclass
class EstimateReport:
    epsilon: float
    k: int
    seed: int
    phi_used: float
    rho_used: int
    n_samples: int
    t_estimate: int | None
    empirical_vector: FrequencyVector
    summary: SummaryGraph
    counters: dict[str, int]
    wall_time_ms: float
    oracle: str
    vacuous: bool = False

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "epsilon": self.epsilon,
            "k": self.k,
            "seed": self.seed,
            "phi": self.phi_used,
            "rho": self.rho_used,
            "n_samples": self.n_samples,
            "t_estimate": self.t_estimate,
            "empirical_vector": self.empirical_vector.to_json_dict(),
            "summary_size": self.summary.size,
            "component_count": self.summary.component_count,
            "counters": dict(sorted(self.counters.items())),
            "wall_time_ms": self.wall_time_ms,
            "oracle": self.oracle,
            "vacuous": self.vacuous,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _oracle_kind(oracle) -> str:
    return {"OracleSession": "local", "GlobalOracle": "global"}.get(type(oracle).__name__, type(oracle).__name__)


def _sample_keys(g: Graph, oracle, k: int, seed: int, label: str, count: int):
    reader = oracle if hasattr(oracle, "neighbours") else g
    parts, sampled, keys = [], [], []
    for i in range(count):
        v = g.sample_vertex(derive_rng(seed, label, i))
        part = oracle.query(v)
        parts.append(part)
        sampled.append(v)
        keys.append(canonical_key(extract_disc(reader, v, k, part.members)))
    return parts, sampled, keys


def estimate(g: Graph, params: EstimateParams, oracle, seed: int) -> EstimateReport:
    """Sample vertices, take their parts from ``oracle``, and tally disc types.

    The disc of each sampled vertex is taken inside its part.  Unless a sample
    size is forced, the number of types T is estimated from a pilot run of
    ``params.pilot_size`` samples and N follows the Chernoff/union-bound rule.
    """
    if g.n == 0:
        raise ValueError("cannot estimate on an empty graph")
    started = time.perf_counter()
    before = g.counter.snapshot()
    t_est = params.t_estimate
    if params.sample_size_override is not None:
        n_samples = int(params.sample_size_override)
    elif params.chernoff_constant is not None:
        n_samples = math.ceil(params.chernoff_constant / params.epsilon ** 2)
    else:
        if t_est is None:
            _, _, pilot_keys = _sample_keys(g, oracle, params.k, seed, "pilot", params.pilot_size)
            t_est = len(set(pilot_keys))
        n_samples = choose_sample_size(params.epsilon, t_est, params.failure_budget)
    parts, sampled, keys = _sample_keys(g, oracle, params.k, seed, "sample", n_samples)
    after = g.counter.snapshot()
    cfg = oracle.config.params
    return EstimateReport(
        epsilon=params.epsilon,
        k=params.k,
        seed=seed,
        phi_used=cfg.phi,
        rho_used=cfg.rho,
        n_samples=n_samples,
        t_estimate=t_est,
        empirical_vector=FrequencyVector.from_counts(Counter(keys)),
        summary=build_summary(parts, g, sampled),
        counters={name: after[name] - before[name] for name in after},
        wall_time_ms=round((time.perf_counter() - started) * 1000, 3),
        oracle=_oracle_kind(oracle),
        vacuous=params.vacuous,
    )


def evaluate(g: Graph, report: EstimateReport, k: int | None = None, partition=None) -> dict:
    """Compare an estimate against exact frequency vectors (desk scale only).

    With the full ``partition`` the pruned graph G' is built too, which splits
    the error into its cut part and its sampling part.
    """
    k = report.k if k is None else k
    f_g = exact_frequency_vector(g, k)
    f_h = summary_frequency_vector(report.summary, k)
    l1_hat = l1_distance(report.empirical_vector, f_g)
    record = {
        "epsilon": report.epsilon,
        "k": k,
        "seed": report.seed,
        "exact_type_count": len(f_g),
        "l1_estimate_vs_exact": float(l1_hat),
        "l1_summary_vs_exact": float(l1_distance(f_h, f_g)),
        "summary_size": report.summary.size,
        "summary_size_bound": report.n_samples * report.rho_used,
        "passed": l1_hat <= Fraction(report.epsilon),
    }
    if partition is not None:
        cut = cut_report(g, partition, k)
        pruned = Graph.from_edges(g.n, (e for e in g.edges() if e not in cut.cut_edges), g.d_max)
        f_pruned = exact_frequency_vector(pruned, k)
        l1_sampling = l1_distance(report.empirical_vector, f_pruned)
        l1_cut = l1_distance(f_pruned, f_g)
        record.update(
            cut_edge_count=cut.cut_edge_count,
            cut_fraction=float(cut.cut_fraction),
            bad_fraction=float(cut.bad_fraction),
            l1_estimate_vs_pruned=float(l1_sampling),
            l1_pruned_vs_exact=float(l1_cut),
            triangle_inequality_holds=l1_hat <= l1_sampling + l1_cut,
            # moving one vertex between types changes the l1 distance by 2/n
            cut_error_within_bad_fraction=l1_cut <= 2 * cut.bad_fraction,
        )
    return record
