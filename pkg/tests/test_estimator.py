import json
import math
from fractions import Fraction

import pytest

from discfreq.disc import canonical_key, exact_frequency_vector, extract_disc
from discfreq.estimator import (
    EstimateParams,
    build_summary,
    choose_phi,
    choose_sample_size,
    estimate,
    evaluate,
    plan_partition_params,
    summary_frequency_vector,
)
from discfreq.graph import Graph, ball, generate
from discfreq.oracle import BudgetExhausted, OracleConfig, make_oracle
from discfreq.partition import Part, PartitionParams


def run(g, params, pparams, seed=0, kind="local", **cfg):
    return estimate(g, params, make_oracle(kind, g, OracleConfig(pparams, seed, **cfg)), seed)


def stable_json(report):
    data = report.to_json_dict()
    data.pop("wall_time_ms")
    return json.dumps(data, sort_keys=True)


def test_params_validation():
    for bad in ({"epsilon": 0, "k": 1}, {"epsilon": 0.5, "k": -1}, {"epsilon": 0.5, "k": 1, "rho_override": 0},
                {"epsilon": 0.5, "k": 1, "failure_budget": 1.0}):
        with pytest.raises(ValueError):
            EstimateParams(**bad)
    assert EstimateParams(2.0, 1).vacuous and not EstimateParams(1.99, 1).vacuous


def test_choose_phi_examples():
    assert choose_phi(0.5, 3, 1) == 0.03125
    assert choose_phi(0.7, 5, 0) == pytest.approx(0.7 / 4)
    assert choose_phi(1.0, 2, 2) == pytest.approx(1 / 28)


def test_choose_sample_size_examples():
    for eps in (0.1, 0.5, 1.5):
        assert choose_sample_size(eps, 1) == math.ceil(2 / eps ** 2 * math.log(20))
    assert choose_sample_size(0.5, 3) == 295
    assert choose_sample_size(0.5, 3, override=100) == 100
    with pytest.raises(OverflowError, match="override"):
        choose_sample_size(1e-4, 10 ** 4)


def test_chosen_size_meets_the_union_bound():
    for eps, t in [(0.4, 3), (0.2, 7), (1.0, 1)]:
        n = choose_sample_size(eps, t)
        assert 2 * t * math.exp(-2 * n * (eps / (2 * t)) ** 2) <= 0.1
        assert 2 * t * math.exp(-2 * (n - 1) * (eps / (2 * t)) ** 2) > 0.1 * (1 - 1e-9)


def test_plan_partition_params():
    g = generate("grid", w=8, h=8)
    assert plan_partition_params(g, EstimateParams(0.5, 1), "grid") == PartitionParams(0.025, 6400)
    assert plan_partition_params(g, EstimateParams(0.5, 1, phi_override=0.5, rho_override=9)) == PartitionParams(0.5, 9)
    with pytest.raises(ValueError):
        plan_partition_params(g, EstimateParams(0.5, 1))


def test_summary_multiplicity():
    g = generate("disjoint_triangles", m=4)
    tri = Part(frozenset({3, 4, 5}), 3)
    h = build_summary([tri, tri, tri], g, [3, 4, 5])
    assert h.size == 9 and h.component_count == 3 and h.graph.n == 9 and h.graph.m == 9
    assert list(summary_frequency_vector(h, 1).entries.values()) == [1]
    assert [row["first_local_id"] for row in h.provenance()] == [0, 3, 6]


def test_summary_size_bound():
    g = generate("path", n=20)
    parts = [Part(frozenset({0, 1}), 0), Part(frozenset({5, 6, 7}), 5), Part(frozenset({10, 11, 12, 13}), 10)]
    h = build_summary(parts, g)
    assert h.size == 9 <= 3 * 4 and h.component_count == 3


def test_single_part_summary_is_its_internal_distribution():
    g = generate("cycle", n=20)
    part = Part(frozenset(range(5)), 0)
    h = build_summary([part], g)
    assert summary_frequency_vector(h, 1) == exact_frequency_vector(generate("path", n=5), 1)


@pytest.mark.parametrize("family,kw,pparams", [
    ("cycle", {"n": 60}, PartitionParams(0.5, 4)),
    ("grid", {"w": 12, "h": 12}, PartitionParams(0.5, 16)),
    ("binary_tree", {"n": 63}, PartitionParams(0.5, 4)),
])
def test_run_invariants(family, kw, pparams):
    g = generate(family, **kw)
    params = EstimateParams(0.5, 1, sample_size_override=120)
    report = run(g, params, pparams, seed=3)
    assert sum(report.empirical_vector.entries.values()) == 1
    assert all(isinstance(v, Fraction) and (v * 120).denominator == 1 for v in report.empirical_vector.entries.values())
    assert report.summary.size <= report.n_samples * pparams.rho
    assert report.summary.component_count == report.n_samples
    assert summary_frequency_vector(report.summary, 1) == exact_frequency_vector(report.summary.graph, 1)
    # disc-locality identity on every sample
    for comp in report.summary.components:
        v, members = comp.sampled_vertex, frozenset(comp.members)
        if ball(Graph(g.adjacency()), v, 1) <= members:
            assert canonical_key(extract_disc(g, v, 1, members)) == canonical_key(extract_disc(g, v, 1))


def test_triangles_estimate_is_exact():
    g = generate("disjoint_triangles", m=40)
    params = EstimateParams(0.3, 1)
    for seed in range(3):
        report = run(g, params, plan_partition_params(g, params, "disjoint_triangles"), seed)
        assert report.empirical_vector == exact_frequency_vector(g, 1)
        ev = evaluate(g, report)
        assert ev["l1_estimate_vs_exact"] == 0 and ev["l1_summary_vs_exact"] == 0 and ev["passed"]


def test_single_vertex_graph():
    g = Graph([[]])
    report = run(g, EstimateParams(0.5, 1, sample_size_override=7), PartitionParams(0.5, 1))
    assert list(report.empirical_vector.entries.values()) == [1] and report.summary.size == 7


def test_empty_graph_rejected():
    g = Graph([])
    with pytest.raises(ValueError):
        run(g, EstimateParams(0.5, 1), PartitionParams(0.5, 1))


def test_deterministic_report():
    g = generate("grid", w=10, h=10)
    params = EstimateParams(0.6, 1, t_estimate=3)
    a = run(g, params, PartitionParams(0.5, 16), seed=9)
    b = run(g, params, PartitionParams(0.5, 16), seed=9)
    assert stable_json(a) == stable_json(b)
    assert a.n_samples == choose_sample_size(0.6, 3)


def test_pilot_estimates_type_count():
    g = generate("grid", w=10, h=10)
    report = run(g, EstimateParams(0.8, 1), PartitionParams(0.5, 16), seed=1)
    assert report.t_estimate >= 3
    assert report.n_samples == choose_sample_size(0.8, report.t_estimate)


def test_local_and_global_oracles_agree():
    g = generate("grid", w=12, h=12)
    params = EstimateParams(0.5, 1, sample_size_override=200)
    local = run(g, params, PartitionParams(0.5, 16), seed=4, kind="local")
    glob = run(g, params, PartitionParams(0.5, 16), seed=4, kind="global")
    assert local.empirical_vector == glob.empirical_vector
    assert local.summary.components == glob.summary.components


def test_evaluate_with_partition():
    g = generate("grid", w=16, h=16)
    pparams = PartitionParams(0.5, 16)
    oracle = make_oracle("global", g, OracleConfig(pparams, 2))
    report = estimate(g, EstimateParams(0.5, 1, sample_size_override=300), oracle, 2)
    ev = evaluate(g, report, partition=oracle.materialize())
    assert ev["triangle_inequality_holds"] and ev["cut_error_within_bad_fraction"]
    assert ev["l1_estimate_vs_exact"] <= ev["l1_estimate_vs_pruned"] + ev["l1_pruned_vs_exact"] + 1e-12


def test_vacuous_target_still_runs():
    g = generate("cycle", n=10)
    report = run(g, EstimateParams(2.5, 1, sample_size_override=5), PartitionParams(0.5, 4))
    assert report.vacuous and report.to_json_dict()["vacuous"]


def test_budget_errors_propagate():
    g = generate("grid", w=32, h=32)
    with pytest.raises(BudgetExhausted):
        run(g, EstimateParams(0.5, 1, sample_size_override=50), PartitionParams(0.5, 16), work_cap=16)


def test_report_json_fields():
    g = generate("cycle", n=12)
    data = run(g, EstimateParams(0.5, 1, sample_size_override=10), PartitionParams(0.5, 4)).to_json_dict()
    assert {"epsilon", "k", "phi", "rho", "n_samples", "empirical_vector", "summary_size", "component_count",
            "counters", "wall_time_ms", "seed", "schema_version"} <= set(data)
