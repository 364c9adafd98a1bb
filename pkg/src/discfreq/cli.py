"""Command-line front end: ``discfreq <subcommand> ...``.

Exit codes: 0 success, 1 verification or evaluation failure, 2 usage error,
3 local-oracle budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

from .disc import exact_frequency_vector
from .estimator import SCHEMA_VERSION, EstimateParams, estimate, evaluate, plan_partition_params
from .graph import FAMILIES, Graph, GraphFormatError, default_rho, dumps, generate, load_graph
from .oracle import BudgetExhausted, OracleConfig, make_oracle, query_cost_profile
from .partition import (
    PartitionParams,
    cut_report,
    global_partition,
    partition_from_json_dict,
    partition_to_json_dict,
    verify_partition,
)

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class UsageError(Exception):
    pass


def _json_text(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _runs(runs: list[dict]) -> dict:
    """One run is emitted as is; several are wrapped in a list."""
    if len(runs) == 1:
        return runs[0]
    return {"schema_version": SCHEMA_VERSION, "runs": runs}


def family_graph(family: str, size: int) -> Graph:
    """Graph of ``family`` with about ``size`` vertices (grids must be square)."""
    if family == "grid":
        side = math.isqrt(size)
        if side * side != size:
            raise UsageError(f"grid size {size} is not a perfect square")
        return generate("grid", w=side, h=side)
    if family == "disjoint_triangles":
        if size % 3:
            raise UsageError(f"triangle size {size} is not a multiple of 3")
        return generate(family, m=size // 3)
    return generate(family, n=size)


def _input_graph(args) -> tuple[Graph, str | None]:
    if args.graph is not None:
        if args.family is not None:
            raise UsageError("pass either --graph or --family, not both")
        return load_graph(args.graph), None
    if args.family is None:
        raise UsageError("an input graph is required (--graph FILE or --family NAME)")
    return generate(args.family, n=args.n, w=args.w, h=args.h, m=args.m, d_max=args.d_max), args.family


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    g = generate(args.family, n=args.n, w=args.w, h=args.h, m=args.m, d_max=args.d_max)
    _emit(args, dumps(g))
    return 0


def cmd_exact(args) -> int:
    g, _ = _input_graph(args)
    fv = exact_frequency_vector(g, args.k)
    if args.format == "csv":
        _emit(args, _csv_text([{"key": key, "frequency": value} for key, value in fv.to_json_dict().items()]))
    else:
        _emit(args, _json_text({"schema_version": SCHEMA_VERSION, "k": args.k, "n": g.n, "vector": fv.to_json_dict()}))
    return 0


def _partition_params(args, g: Graph, family: str | None) -> PartitionParams:
    if args.rho is None:
        if family is None:
            raise UsageError("--rho is required for graphs read from a file")
        return PartitionParams(args.phi, default_rho(family, args.phi))
    return PartitionParams(args.phi, args.rho)


def cmd_partition(args) -> int:
    g, family = _input_graph(args)
    params = _partition_params(args, g, family)
    runs, ok = [], True
    for seed in args.seed:
        if args.oracle == "local":
            p = make_oracle("local", g, OracleConfig(params, seed, args.work_cap, args.retries)).materialize()
            cut = cut_report(g, p, args.k)
        else:
            p, cut = global_partition(g, params, seed, args.retries, args.k)
        report = verify_partition(g, p, params)
        ok &= report.passed
        record = partition_to_json_dict(p, cut, params, seed)
        record.update(schema_version=SCHEMA_VERSION, n=g.n, verification=report.to_json_dict())
        if p.search_queries:
            record["max_search_queries"] = max(p.search_queries)
        runs.append(record)
    if args.format == "csv":
        _emit(args, _csv_text([
            {"seed": r["seed"], "n": r["n"], "phi": r["phi"], "rho": r["rho"], "parts": len(r["parts"]),
             "cut_edge_count": r["cut_edge_count"], "cut_fraction": r["cut_fraction"],
             "bad_fraction": r["bad_fraction"], "verified": r["verification"]["passed"]}
            for r in runs
        ]))
    else:
        _emit(args, _json_text(_runs(runs)))
    return 0 if ok else EXIT_FAILED


def cmd_estimate(args) -> int:
    g, family = _input_graph(args)
    params = EstimateParams(
        epsilon=args.epsilon,
        k=args.k,
        phi_override=args.phi,
        rho_override=args.rho,
        sample_size_override=args.samples,
        failure_budget=args.delta,
        t_estimate=args.t_estimate,
    )
    try:
        pparams = plan_partition_params(g, params, family)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    runs, ok = [], True
    for seed in args.seed:
        oracle = make_oracle(args.oracle, g, OracleConfig(pparams, seed, args.work_cap, args.retries))
        report = estimate(g, params, oracle, seed)
        record = report.to_json_dict()
        if args.evaluate:
            partition = oracle.materialize() if args.oracle == "global" else None
            ev = evaluate(g, report, partition=partition)
            ok &= ev["passed"]
            record["evaluation"] = ev
        if args.summary_out:
            stem = args.summary_out if len(args.seed) == 1 else f"{args.summary_out}.{seed}"
            with open(stem + ".graph", "w", encoding="utf-8") as fh:
                fh.write(report.summary.to_text())
            with open(stem + ".provenance.json", "w", encoding="utf-8") as fh:
                fh.write(_json_text({"schema_version": SCHEMA_VERSION, "components": report.summary.provenance()}))
        runs.append(record)
    if args.format == "csv":
        rows = []
        for r in runs:
            row = {"seed": r["seed"], "epsilon": r["epsilon"], "k": r["k"], "phi": r["phi"], "rho": r["rho"],
                   "n_samples": r["n_samples"], "summary_size": r["summary_size"],
                   "neighbour_queries": r["counters"]["neighbour_queries"], "wall_time_ms": r["wall_time_ms"]}
            if "evaluation" in r:
                row.update(l1_error=r["evaluation"]["l1_estimate_vs_exact"], passed=r["evaluation"]["passed"])
            rows.append(row)
        _emit(args, _csv_text(rows))
    else:
        _emit(args, _json_text(_runs(runs)))
    return 0 if ok else EXIT_FAILED


def cmd_oracle_profile(args) -> int:
    if not args.sizes:
        raise UsageError("--sizes is required, e.g. --sizes 1024,4096,16384")
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"--sizes must be comma-separated integers: {exc}") from exc
    params = PartitionParams(args.phi, args.rho)
    rows = []
    for seed in args.seed:
        for size in sizes:
            g = family_graph(args.family, size)
            stats = query_cost_profile(g, OracleConfig(params, seed, args.work_cap, args.retries), args.samples)
            rows.append({"seed": seed, "family": args.family, "size": size, "phi": params.phi, "rho": params.rho,
                         **{key: stats.get(key, "") for key in
                            ("samples", "exhausted", "min", "median", "max", "mean", "median_anchors")}})
    if args.format == "json":
        _emit(args, _json_text({"schema_version": SCHEMA_VERSION, "rows": rows}))
    else:
        _emit(args, _csv_text(rows))
    return 0


def cmd_verify(args) -> int:
    g = load_graph(args.graph)
    with open(args.partition, encoding="utf-8") as fh:
        data = json.load(fh)
    phi = data.get("phi") if args.phi is None else args.phi
    rho = data.get("rho") if args.rho is None else args.rho
    if phi is None or rho is None:
        raise UsageError("phi and rho must come from the partition file or the command line")
    try:
        p = partition_from_json_dict(data, g.n)
    except (KeyError, TypeError, ValueError) as exc:
        report = {"schema_version": SCHEMA_VERSION, "passed": False, "reason": f"malformed partition: {exc}"}
        _emit(args, _json_text(report))
        return EXIT_FAILED
    report = verify_partition(g, p, PartitionParams(phi, rho))
    out = report.to_json_dict()
    out["schema_version"] = SCHEMA_VERSION
    if not report.passed:
        out["reason"] = ", ".join(sorted(report.failures()))
    _emit(args, _json_text(out))
    return 0 if report.passed else EXIT_FAILED


# -- parser --------------------------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _common(p: argparse.ArgumentParser, formats=("json",)) -> None:
    p.add_argument("--seed", type=int, nargs="+", default=[0], help="one or more seeds")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=formats, default=formats[0])


def _graph_args(p: argparse.ArgumentParser, source=True) -> None:
    if source:
        p.add_argument("--graph", help="graph file in the text format")
    p.add_argument("--family", choices=FAMILIES, required=not source)
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--w", type=_positive_int)
    p.add_argument("--h", type=_positive_int)
    p.add_argument("--m", type=_positive_int)
    p.add_argument("--d-max", dest="d_max", type=_positive_int)


def _oracle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--work-cap", dest="work_cap", type=_positive_int)
    p.add_argument("--retries", type=_positive_int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discfreq", description="Estimate k-disc frequency vectors of bounded-degree graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark graph")
    _graph_args(p, source=False)
    _common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("exact", help="exact frequency vector")
    _graph_args(p)
    p.add_argument("--k", type=int, required=True)
    _common(p, ("json", "csv"))
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("partition", help="run the global partitioner and verify it")
    _graph_args(p)
    p.add_argument("--phi", type=_positive_float, required=True)
    p.add_argument("--rho", type=_positive_int)
    p.add_argument("--k", type=int, default=1, help="radius for the bad-vertex fraction")
    p.add_argument("--oracle", choices=("global", "local"), default="global")
    _oracle_args(p)
    _common(p, ("json", "csv"))
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("estimate", help="sample-based frequency vector estimate")
    _graph_args(p)
    p.add_argument("--epsilon", type=_positive_float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--phi", type=_positive_float)
    p.add_argument("--rho", type=_positive_int)
    p.add_argument("--samples", type=_positive_int, help="force the sample size N")
    p.add_argument("--t-estimate", dest="t_estimate", type=_positive_int, help="number of disc types T (skips the pilot)")
    p.add_argument("--delta", type=float, default=0.1, help="failure budget")
    p.add_argument("--oracle", choices=("local", "global"), default="local")
    p.add_argument("--evaluate", action="store_true", help="compare against the exact vector")
    p.add_argument("--summary-out", dest="summary_out", help="write the summary graph and provenance with this stem")
    _oracle_args(p)
    _common(p, ("json", "csv"))
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("oracle-profile", help="per-query cost of the local oracle across sizes")
    p.add_argument("--family", choices=FAMILIES, default="grid")
    p.add_argument("--sizes", help="comma-separated vertex counts")
    p.add_argument("--phi", type=_positive_float, default=0.5)
    p.add_argument("--rho", type=_positive_int, default=16)
    p.add_argument("--samples", type=_positive_int, default=9)
    _oracle_args(p)
    _common(p, ("csv", "json"))
    p.set_defaults(func=cmd_oracle_profile)

    p = sub.add_parser("verify", help="check a partition file against a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--phi", type=_positive_float)
    p.add_argument("--rho", type=_positive_int)
    _common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except GraphFormatError as exc:
        print(f"discfreq: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExhausted as exc:
        print(f"discfreq: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OverflowError) as exc:
        parser.error(str(exc))
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
