"""Command line interface.

Subcommands: gen, build, query, eval, theory {roc,cost,cap-stats,mp},
experiment {roc,cost,assignment}. All tabular output is CSV with a header
row, written to --out or stdout. Exit codes: 0 success, 2 usage error,
1 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .. import analytic
from ..assignment import BatchConfig, KMeansConfig, batch_assignment, random_assignment, \
    spherical_kmeans
from ..construction import ConstructionConfig
from ..core import Dataset
from ..errors import MemvecError
from ..sampling import Seed, make_clustered_dataset, sample_sphere
from ..search import build_index, query
from . import experiments, io
from .evaluation import RECALL_RANKS, cosine_ground_truth, evaluate_results

__all__ = ["main", "build_parser"]


def _write_csv(rows: list[dict], out_path: str | None):
    if not rows:
        return
    fields = list(rows[0].keys())
    handle = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        writer = csv.DictWriter(handle, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out_path:
            handle.close()


def _cmd_gen(args) -> int:
    seed = Seed(args.seed)
    if args.clusters:
        per = args.n // args.clusters
        if per * args.clusters != args.n:
            raise MemvecError("--n must be a multiple of --clusters")
        data, labels = make_clustered_dataset(args.clusters, per, args.d,
                                              args.eta, seed.generator())
        if args.labels_out:
            io.write_ivecs(labels.reshape(-1, 1), args.labels_out)
    else:
        data = Dataset(sample_sphere(args.d, seed.generator(), size=args.n))
    io.write_fvecs(data.vectors, args.out)
    return 0


def _cmd_build(args) -> int:
    data = Dataset(io.read_fvecs(args.data))
    seed = Seed(args.seed)
    cfg = ConstructionConfig(kind=args.construction)
    if args.assign == "random":
        if not args.unit_size:
            raise MemvecError("--unit-size required for random assignment")
        part = random_assignment(data.size, args.unit_size, seed.generator())
    elif args.assign == "kmeans":
        if not args.M:
            raise MemvecError("--M required for kmeans assignment")
        part, _ = spherical_kmeans(data, KMeansConfig(
            M=args.M, mode=args.construction,
            normalize_representative=args.normalize, seed=seed))
    else:  # batch-kmeans
        if not (args.M and args.batch_size):
            raise MemvecError("--M and --batch-size required for batch-kmeans")
        inner = KMeansConfig(M=args.M, mode=args.construction,
                             normalize_representative=args.normalize)
        part, _ = batch_assignment(data, BatchConfig(
            batch_size=args.batch_size, inner=inner, seed=seed))
    index = build_index(data, part, cfg)
    io.write_index(index, args.out)
    return 0


def _cmd_query(args) -> int:
    index = io.read_index(args.index)
    data = Dataset(io.read_fvecs(args.data))
    queries = io.read_fvecs(args.queries)
    rows = []
    for qid, y in enumerate(queries):
        res = query(index, data, y, tau=args.tau, top_units=args.top_units)
        if not res.candidates:
            rows.append({"query": qid, "rank": "", "dataset_id": "", "score": "",
                         "complexity": res.complexity,
                         "complexity_ratio": res.complexity_ratio})
        for rank, (i, s) in enumerate(res.candidates, start=1):
            rows.append({"query": qid, "rank": rank, "dataset_id": i,
                         "score": repr(s), "complexity": res.complexity,
                         "complexity_ratio": res.complexity_ratio})
    _write_csv(rows, args.out)
    return 0


def _cmd_eval(args) -> int:
    retrieved, ratios = _read_results(args.results)
    if args.gt:
        gt = io.read_ivecs(args.gt)
        matches = [row[row >= 0] for row in gt]
    elif args.data and args.queries:
        data = Dataset(io.read_fvecs(args.data))
        queries = io.read_fvecs(args.queries)
        matches = cosine_ground_truth(data, queries, args.alpha0)
    else:
        raise MemvecError("eval needs --gt, or --data and --queries")
    report = evaluate_results(retrieved, matches, np.asarray(ratios))
    row = {
        "alpha0": args.alpha0,
        "recall_of_matches": report.recall_of_matches,
        "precision": report.precision,
        "mean_complexity_ratio": report.mean_complexity_ratio,
        "complexity_std": report.complexity_std,
    }
    for r in RECALL_RANKS:
        row[f"recall_at_{r}"] = report.recall_at_r[r]
    _write_csv([row], args.out)
    return 0


def _read_results(path: str) -> tuple[list[np.ndarray], list[float]]:
    """Parse a `query` output CSV back into per-query ranked id lists."""
    per_query: dict[int, list[int]] = {}
    ratios: dict[int, float] = {}
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            qid = int(row["query"])
            per_query.setdefault(qid, [])
            ratios[qid] = float(row["complexity_ratio"])
            if row["dataset_id"] != "":
                per_query[qid].append(int(row["dataset_id"]))
    qids = sorted(per_query)
    return ([np.asarray(per_query[q], dtype=np.int64) for q in qids],
            [ratios[q] for q in qids])


def _cmd_theory(args) -> int:
    rows: list[dict] = []
    if args.theory_cmd == "roc":
        taus = np.linspace(args.tau_min, args.tau_max, args.tau_steps)
        for construction in args.constructions:
            for tau in taus:
                pfp, pfn = analytic.error_rates(construction, float(tau),
                                                args.alpha, args.n, args.d)
                rows.append({"construction": construction, "tau": float(tau),
                             "pfp": pfp, "tpr": 1.0 - pfn})
    elif args.theory_cmd == "cost":
        n_values = list(range(1, args.n_max + 1))
        rows = experiments.run_cost_curve(args.d, args.eps, [args.alpha0],
                                          n_values, args.constructions)
    elif args.theory_cmd == "cap-stats":
        for eta in args.etas:
            for construction in args.constructions:
                stats = (analytic.sum_cap_stats if construction == "sum"
                         else analytic.pinv_cap_stats)(eta, args.d, args.n, args.alpha)
                rows.append({
                    "construction": construction, "eta": eta, "d": args.d,
                    "n": args.n, "alpha": args.alpha, "mu1": stats.mu1,
                    "mu2": stats.mu2, "h0_mean": stats.h0_mean,
                    "h0_var": stats.h0_var, "h1_mean": stats.h1_mean,
                    "h1_var": stats.h1_var, "kl": stats.kl,
                    "bound_based": stats.bound_based,
                })
    elif args.theory_cmd == "mp":
        from scipy.integrate import quad
        for c in args.cs:
            lo = (1.0 - np.sqrt(c)) ** 2
            hi = (1.0 + np.sqrt(c)) ** 2
            integral, _ = quad(lambda lam: analytic.mp_pdf(lam, c) / lam, lo, hi)
            rows.append({"c": c, "limit": analytic.mp_pinv_norm_limit(c),
                         "quadrature": integral})
    _write_csv(rows, args.out)
    return 0


def _cmd_experiment(args) -> int:
    seed = Seed(args.seed)
    if args.exp_cmd == "roc":
        rows = experiments.run_roc(args.d, args.n, args.alpha, args.constructions,
                                   args.trials, seed)
    elif args.exp_cmd == "cost":
        n_values = list(range(1, args.n_max + 1))
        rows = experiments.run_cost_curve(
            args.d, args.eps, [args.alpha0], n_values, args.constructions,
            mc={"N": args.N, "queries": args.queries}, seed=seed)
    else:  # assignment
        data, _ = make_clustered_dataset(args.clusters, args.per_cluster, args.d,
                                         args.eta, seed.child("data").generator())
        rows = experiments.run_assignment_report(
            data, args.methods, args.M, list(range(args.n_seeds)),
            args.alpha, args.alpha0, args.queries, args.top_k, seed,
            tau=args.tau, kmeans_iters=args.kmeans_iters)
    _write_csv(rows, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memvec",
                                description="memory-vector similarity search")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset (fvecs)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--clusters", type=int, default=0,
                   help="planted cluster count (0 = uniform)")
    g.add_argument("--eta", type=float, default=0.9)
    g.add_argument("--out", required=True)
    g.add_argument("--labels-out", default=None)
    g.set_defaults(func=_cmd_gen)

    b = sub.add_parser("build", help="build an MVIX index")
    b.add_argument("--data", required=True)
    b.add_argument("--assign", choices=["random", "kmeans", "batch-kmeans"],
                   default="random")
    b.add_argument("--construction", choices=["sum", "pinv"], default="pinv")
    b.add_argument("--unit-size", type=int, default=0)
    b.add_argument("--M", type=int, default=0)
    b.add_argument("--normalize", action="store_true")
    b.add_argument("--batch-size", type=int, default=0)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_build)

    q = sub.add_parser("query", help="run queries against an index")
    q.add_argument("--index", required=True)
    q.add_argument("--data", required=True)
    q.add_argument("--queries", required=True)
    sel = q.add_mutually_exclusive_group(required=True)
    sel.add_argument("--tau", type=float, default=None)
    sel.add_argument("--top-units", type=int, default=None)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_query)

    e = sub.add_parser("eval", help="score query results against ground truth")
    e.add_argument("--results", required=True)
    e.add_argument("--gt", default=None, help="ivecs match lists (-1 padded)")
    e.add_argument("--alpha0", type=float, default=0.5)
    e.add_argument("--data", default=None)
    e.add_argument("--queries", default=None)
    e.add_argument("--out", default=None)
    e.set_defaults(func=_cmd_eval)

    t = sub.add_parser("theory", help="closed-form curves as CSV")
    tsub = t.add_subparsers(dest="theory_cmd", required=True)

    troc = tsub.add_parser("roc")
    troc.add_argument("--d", type=int, required=True)
    troc.add_argument("--n", type=int, required=True)
    troc.add_argument("--alpha", type=float, required=True)
    troc.add_argument("--constructions", nargs="+", default=["sum", "pinv"])
    troc.add_argument("--tau-min", type=float, default=0.0)
    troc.add_argument("--tau-max", type=float, default=0.9)
    troc.add_argument("--tau-steps", type=int, default=19)
    troc.add_argument("--out", default=None)

    tcost = tsub.add_parser("cost")
    tcost.add_argument("--d", type=int, required=True)
    tcost.add_argument("--eps", type=float, required=True)
    tcost.add_argument("--alpha0", type=float, required=True)
    tcost.add_argument("--n-max", type=int, default=500)
    tcost.add_argument("--constructions", nargs="+", default=["sum", "pinv"])
    tcost.add_argument("--out", default=None)

    tcap = tsub.add_parser("cap-stats")
    tcap.add_argument("--d", type=int, required=True)
    tcap.add_argument("--n", type=int, required=True)
    tcap.add_argument("--alpha", type=float, required=True)
    tcap.add_argument("--etas", type=float, nargs="+",
                      default=[-1.0, -0.5, 0.0, 0.3, 0.6, 0.9])
    tcap.add_argument("--constructions", nargs="+", default=["sum", "pinv"])
    tcap.add_argument("--out", default=None)

    tmp = tsub.add_parser("mp")
    tmp.add_argument("--cs", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.7])
    tmp.add_argument("--out", default=None)
    t.set_defaults(func=_cmd_theory)

    x = sub.add_parser("experiment", help="Monte Carlo experiment drivers")
    xsub = x.add_subparsers(dest="exp_cmd", required=True)

    xroc = xsub.add_parser("roc")
    xroc.add_argument("--d", type=int, required=True)
    xroc.add_argument("--n", type=int, required=True)
    xroc.add_argument("--alpha", type=float, required=True)
    xroc.add_argument("--trials", type=int, default=10000)
    xroc.add_argument("--constructions", nargs="+", default=["sum", "pinv"])
    xroc.add_argument("--seed", type=int, default=0)
    xroc.add_argument("--out", default=None)

    xcost = xsub.add_parser("cost")
    xcost.add_argument("--d", type=int, required=True)
    xcost.add_argument("--eps", type=float, required=True)
    xcost.add_argument("--alpha0", type=float, required=True)
    xcost.add_argument("--n-max", type=int, default=200)
    xcost.add_argument("--N", type=int, default=100000)
    xcost.add_argument("--queries", type=int, default=100)
    xcost.add_argument("--constructions", nargs="+", default=["sum", "pinv"])
    xcost.add_argument("--seed", type=int, default=0)
    xcost.add_argument("--out", default=None)

    xas = xsub.add_parser("assignment")
    xas.add_argument("--clusters", type=int, default=50)
    xas.add_argument("--per-cluster", type=int, default=50)
    xas.add_argument("--d", type=int, default=128)
    xas.add_argument("--eta", type=float, default=0.95)
    xas.add_argument("--M", type=int, default=50)
    xas.add_argument("--methods", nargs="+",
                     default=["random", "sum-km", "pinv-km"])
    xas.add_argument("--alpha", type=float, default=0.9)
    xas.add_argument("--alpha0", type=float, default=0.7)
    xas.add_argument("--queries", type=int, default=100)
    xas.add_argument("--top-k", type=int, default=5)
    xas.add_argument("--tau", type=float, default=None,
                     help="threshold-scan complexity instead of top-k")
    xas.add_argument("--kmeans-iters", type=int, default=None)
    xas.add_argument("--n-seeds", type=int, default=5)
    xas.add_argument("--seed", type=int, default=0)
    xas.add_argument("--out", default=None)
    x.set_defaults(func=_cmd_experiment)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MemvecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
