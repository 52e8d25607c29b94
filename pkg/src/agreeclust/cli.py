"""Command-line surface: cluster, validate, bench."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .agreement import Params, sparsify
from .components import (Clustering, label_propagation_4, union_find_components,
                         validate_diameter, write_clustering)
from .evaluation import (cluster_stats, gen_gnp, gen_planted, gen_tight_instance,
                         pivot_baseline)
from .graph import GraphFormatError, SignedGraph, load_edge_list
from .mpc import MPC_ROUNDS, MpcConfig, run_mpc_pipeline
from .pipeline import make_oracle, run_inmem_pipeline
from .streaming import PASS_COUNT, FileEdgeStream, ListEdgeStream, run_streaming_pipeline
from . import validators

BETA_LAMBDA_PRESETS = (0.05, 0.1, 0.2)

BENCH_COLUMNS = [
    "dataset", "n", "m_plus", "algorithm", "driver", "mode", "beta", "lambda",
    "a", "seed", "machines", "delta", "cost", "num_clusters", "intra_fraction",
    "rounds", "passes", "wall_time_s", "error",
]


def parse_gen_spec(spec: str, seed: int) -> SignedGraph:
    """Inline generator specs: gnp:n:p | planted:k:size:pin:pout | tight:d:beta:xmult."""
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "gnp" and len(parts) == 3:
            return gen_gnp(int(parts[1]), float(parts[2]), seed)
        if kind == "planted" and len(parts) == 5:
            return gen_planted(int(parts[1]), int(parts[2]), float(parts[3]),
                               float(parts[4]), seed)
        if kind == "tight" and len(parts) == 4:
            return gen_tight_instance(int(parts[1]), float(parts[2]), float(parts[3]))
    except ValueError as exc:
        raise ValueError(f"bad generator spec {spec!r}: {exc}") from exc
    raise ValueError(f"bad generator spec {spec!r} (want gnp:n:p, "
                     f"planted:k:size:pin:pout or tight:d:beta:xmult)")


def _load_input(args) -> tuple[SignedGraph, str]:
    if args.input:
        return load_edge_list(args.input), str(args.input)
    return parse_gen_spec(args.gen, args.seed), args.gen


def _params_of(args) -> Params:
    return Params(beta=args.beta, lam=args.lam, a=args.a, seed=args.seed)


def _mpc_config(args) -> MpcConfig:
    return MpcConfig(num_machines=args.machines, delta=args.delta,
                     enforcement="strict" if args.mpc_strict else "audit")


def _run_driver(g: SignedGraph, params: Params, args):
    """Run the selected driver; returns (clustering, rounds, passes, trace, secs)."""
    t0 = time.perf_counter()
    rounds = passes = None
    trace = None
    if args.driver == "inmem":
        clustering = run_inmem_pipeline(g, params, mode=args.mode).clustering
    elif args.driver == "mpc":
        clustering, trace = run_mpc_pipeline(g, params, _mpc_config(args), mode=args.mode)
        rounds = trace.rounds
    elif args.driver == "stream":
        if args.input:
            provider = FileEdgeStream(args.input)
        else:
            provider = ListEdgeStream(g.n, np.column_stack(g.edge_arrays()))
        result = run_streaming_pipeline(provider, params, mode=args.mode)
        clustering, passes = result.clustering, result.passes
    else:
        raise ValueError(f"unknown driver {args.driver!r}")
    return clustering, rounds, passes, trace, time.perf_counter() - t0


def _config_echo(args, dataset: str) -> dict:
    return {
        "dataset": dataset,
        "beta": args.beta,
        "lambda": args.lam,
        "a": args.a,
        "seed": args.seed,
        "driver": args.driver,
        "mode": args.mode,
        "machines": args.machines if args.driver == "mpc" else None,
        "delta": args.delta if args.driver == "mpc" else None,
        "enforcement": ("strict" if args.mpc_strict else "audit") if args.driver == "mpc" else None,
    }


def cmd_cluster(args) -> int:
    try:
        g, dataset = _load_input(args)
    except (GraphFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    params = _params_of(args)
    clustering, rounds, passes, trace, secs = _run_driver(g, params, args)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_clustering(out_dir / "clusters.txt", clustering, g.original_ids)
    stats = cluster_stats(g, clustering.assignment)
    payload = {
        "config": _config_echo(args, dataset),
        "n": g.n,
        "m_plus": g.m_plus,
        **stats.as_dict(),
        "rounds": rounds,
        "passes": passes,
        "wall_time_s": secs,
    }
    (out_dir / "stats.json").write_text(json.dumps(payload, indent=2) + "\n")
    if trace is not None:
        (out_dir / "trace.json").write_text(json.dumps(trace.to_json(), indent=2) + "\n")
    print(f"{dataset}: {stats.num_clusters} clusters, objective {stats.objective}, "
          f"in-edge fraction {stats.intra_cluster_edge_fraction:.3f}")
    return 0


def cmd_validate(args) -> int:
    """Run the structural validators on the given or generated input."""
    try:
        g, dataset = _load_input(args)
    except (GraphFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    params = _params_of(args)
    if not params.analysis_valid():
        print(f"analysis preconditions unmet (beta={params.beta}, lambda={params.lam}); "
              f"lemma checks skipped")
        return 0

    oracle = make_oracle(g, params, args.mode)
    sg = sparsify(g, params, oracle)
    exact = union_find_components(sg)
    failures = 0

    def report(name: str, violations: list) -> None:
        nonlocal failures
        if violations:
            failures += len(violations)
            print(f"[FAIL] {name}: {len(violations)} violations; first: {violations[0]}")
        else:
            print(f"[ok]   {name}")

    diam = validate_diameter(sg, exact, bound=4)
    report("component diameter <= 4",
           [{"component": c} for c in diam.violations])
    report("label propagation matches exact components",
           [] if label_propagation_4(sg).same_partition(exact)
           else [{"check": "label-propagation"}])
    report("heavy pairs within 2 hops", validators.check_heavy_distance(sg, exact))
    report("components within 2 hops in the input graph",
           validators.check_original_distance(g, exact))
    report("heavy pairs in 4-weak agreement",
           validators.check_heavy_pair_agreement(g, sg, exact, params.beta))
    report("in-cluster degree bound",
           validators.check_min_in_cluster_degree(g, exact, params))
    report("agreement degree bounds",
           validators.check_agreement_degree_bound(g, params.beta))
    report("agreement intersection bounds",
           validators.check_agreement_intersection_bound(g, params.beta))
    report("agreement chains", validators.check_agreement_chains(g, params.beta))
    report("local optimality of small clusters",
           validators.check_local_optimality(g, exact))

    mpc_clustering, _ = run_mpc_pipeline(g, params, MpcConfig(num_machines=4),
                                         mode=args.mode)
    stream = run_streaming_pipeline(ListEdgeStream(g.n, np.column_stack(g.edge_arrays())),
                                    params, mode=args.mode)
    report("driver equivalence",
           [] if (mpc_clustering.same_partition(exact)
                  and stream.clustering.same_partition(exact))
           else [{"check": "driver-equivalence"}])

    print(f"{dataset}: {'all checks passed' if failures == 0 else f'{failures} violations'}")
    return 0 if failures == 0 else 1


def cmd_bench(args) -> int:
    """Cross-product sweep of params x drivers x datasets; one CSV row per run."""
    datasets = []
    for path in args.input or []:
        datasets.append(("file", str(path)))
    for spec in args.gen or []:
        datasets.append(("gen", spec))

    rows = []
    for kind, name in datasets:
        try:
            g = (load_edge_list(name) if kind == "file"
                 else parse_gen_spec(name, args.seed))
        except (GraphFormatError, ValueError) as exc:
            rows.append({"dataset": name, "error": str(exc)})
            continue
        for bl in args.beta_lambda:
            params = Params(beta=bl, lam=bl, a=args.a, seed=args.seed)
            for driver in args.drivers:
                row = {
                    "dataset": name, "n": g.n, "m_plus": g.m_plus,
                    "algorithm": "agreement", "driver": driver, "mode": args.mode,
                    "beta": bl, "lambda": bl, "a": args.a, "seed": args.seed,
                    "machines": args.machines if driver == "mpc" else "",
                    "delta": args.delta if driver == "mpc" else "",
                }
                try:
                    ns = argparse.Namespace(**{**vars(args), "driver": driver,
                                               "beta": bl, "lam": bl, "input": None})
                    clustering, rounds, passes, _, secs = _run_driver(g, params, ns)
                    stats = cluster_stats(g, clustering.assignment)
                    row.update(cost=stats.objective, num_clusters=stats.num_clusters,
                               intra_fraction=stats.intra_cluster_edge_fraction,
                               rounds=rounds if rounds is not None else "",
                               passes=passes if passes is not None else "",
                               wall_time_s=f"{secs:.6f}", error="")
                except Exception as exc:  # noqa: BLE001 - sweep must continue
                    row.update(error=str(exc))
                rows.append(row)
        if args.include_pivot:
            t0 = time.perf_counter()
            clustering = pivot_baseline(g, args.seed)
            secs = time.perf_counter() - t0
            stats = cluster_stats(g, clustering.assignment)
            rows.append({
                "dataset": name, "n": g.n, "m_plus": g.m_plus, "algorithm": "pivot",
                "driver": "inmem", "mode": "", "beta": "", "lambda": "",
                "a": "", "seed": args.seed, "machines": "", "delta": "",
                "cost": stats.objective, "num_clusters": stats.num_clusters,
                "intra_fraction": stats.intra_cluster_edge_fraction,
                "rounds": "", "passes": "", "wall_time_s": f"{secs:.6f}", "error": "",
            })

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in BENCH_COLUMNS})
    finally:
        if args.out:
            out.close()
    return 0


def _add_common(p: argparse.ArgumentParser, *, generator_required: bool) -> None:
    src = p.add_mutually_exclusive_group(required=generator_required)
    src.add_argument("--input", help="edge-list file (two ints per line, # comments)")
    src.add_argument("--gen", help="generator spec, e.g. gnp:100:0.3")
    p.add_argument("--beta", type=float, default=1.0 / 36.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0 / 36.0)
    p.add_argument("--a", type=float, default=600.0, help="sampling constant")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "sketch"), default="exact")


def _add_mpc(p: argparse.ArgumentParser) -> None:
    p.add_argument("--machines", type=int, default=4)
    p.add_argument("--delta", type=float, default=0.9)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--mpc-audit", dest="mpc_strict", action="store_false")
    group.add_argument("--mpc-strict", dest="mpc_strict", action="store_true")
    p.set_defaults(mpc_strict=False)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="agreeclust",
        description="Correlation clustering by neighborhood-agreement sparsification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cluster = sub.add_parser("cluster", help="cluster one input and write artifacts")
    _add_common(p_cluster, generator_required=True)
    p_cluster.add_argument("--driver", choices=("inmem", "mpc", "stream"), default="inmem")
    _add_mpc(p_cluster)
    p_cluster.add_argument("--out", default="out", help="output directory")
    p_cluster.set_defaults(func=cmd_cluster)

    p_val = sub.add_parser("validate", help="run the structural validators")
    _add_common(p_val, generator_required=True)
    p_val.set_defaults(func=cmd_validate)

    p_bench = sub.add_parser("bench", help="sweep params x drivers x datasets to CSV")
    p_bench.add_argument("--input", action="append", help="edge-list file (repeatable)")
    p_bench.add_argument("--gen", action="append", help="generator spec (repeatable)")
    p_bench.add_argument("--beta-lambda", type=float, nargs="+",
                         default=list(BETA_LAMBDA_PRESETS),
                         help="beta = lambda settings to sweep")
    p_bench.add_argument("--drivers", nargs="+", default=["inmem"],
                         choices=("inmem", "mpc", "stream"))
    p_bench.add_argument("--mode", choices=("exact", "sketch"), default="exact")
    p_bench.add_argument("--a", type=float, default=600.0)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--include-pivot", action="store_true")
    _add_mpc(p_bench)
    p_bench.add_argument("--out", help="CSV path (default stdout)")
    p_bench.set_defaults(func=cmd_bench)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
