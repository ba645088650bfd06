"""Monte Carlo experiment drivers behind the `experiment` CLI subcommands.

Every driver returns a list of row dicts (one CSV row each) and is
bit-reproducible from its (config, seed) arguments.
"""

from __future__ import annotations

import numpy as np

from ..analytic import error_rates, expected_cost_ratio, threshold_for
from ..assignment import KMeansConfig, imbalance_factor, random_assignment, spherical_kmeans
from ..construction import ConstructionConfig
from ..core import Dataset
from ..errors import DomainError
from ..sampling import Seed, sample_sphere
from ..search import binarize, build_index, query, query_binary
from .evaluation import cosine_ground_truth

__all__ = [
    "simulate_unit_scores",
    "run_roc",
    "measure_cost",
    "run_cost_curve",
    "run_assignment_report",
    "run_binary_comparison",
]

_UNIT_BATCH_FLOATS = 4_000_000  # ~32 MB of member vectors per batch


def _unit_vectors(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    g = rng.standard_normal(shape)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def _representatives(X: np.ndarray, construction: str) -> np.ndarray:
    """Batched representatives for stacked units X of shape (B, n, d)."""
    if construction == "sum":
        return X.sum(axis=1)
    gram = np.einsum("bij,bkj->bik", X, X)
    z = np.linalg.solve(gram, np.ones(X.shape[1]))
    return np.einsum("bi,bid->bd", z, X)


def simulate_unit_scores(d: int, n: int, alpha: float, construction: str,
                         trials: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial unit scores under H0 and H1 for fresh random units.

    Each trial draws an independent unit of n uniform vectors, an H1 query
    planted on its first member and a fresh H0 query. Returns
    (h0_scores, h1_scores), each of length ``trials``.
    """
    if construction == "pinv" and n >= d:
        raise DomainError("pinv requires n < d")
    h0 = np.empty(trials)
    h1 = np.empty(trials)
    batch = max(1, _UNIT_BATCH_FLOATS // (n * d))
    beta = np.sqrt(max(0.0, 1.0 - alpha * alpha))
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        X = _unit_vectors(rng, (b, n, d))
        m = _representatives(X, construction)
        x1 = X[:, 0, :]
        g = rng.standard_normal((b, d))
        g -= np.sum(g * x1, axis=1, keepdims=True) * x1
        z = g / np.linalg.norm(g, axis=1, keepdims=True)
        y1 = alpha * x1 + beta * z
        y0 = _unit_vectors(rng, (b, d))
        h1[done:done + b] = np.sum(m * y1, axis=1)
        h0[done:done + b] = np.sum(m * y0, axis=1)
        done += b
    return h0, h1


def run_roc(d: int, n: int, alpha: float, constructions: list[str], trials: int,
            seed: Seed, taus: list[float] | None = None) -> list[dict]:
    """Empirical vs theoretical (pfp, 1 - pfn) over a threshold sweep."""
    if taus is None:
        taus = [round(t, 4) for t in np.linspace(0.0, 0.8, 17)]
    rows = []
    for construction in constructions:
        rng = seed.child(f"roc-{construction}").generator()
        h0, h1 = simulate_unit_scores(d, n, alpha, construction, trials, rng)
        for tau in taus:
            pfp_t, pfn_t = error_rates(construction, tau, alpha, n, d)
            rows.append({
                "construction": construction,
                "tau": tau,
                "pfp_emp": float(np.mean(h0 > tau)),
                "tpr_emp": float(np.mean(h1 > tau)),
                "pfp_theory": pfp_t,
                "tpr_theory": 1.0 - pfn_t,
            })
    return rows


def measure_cost(construction: str, n: int, d: int, alpha0: float, eps: float,
                 N: int, n_queries: int, seed: Seed) -> dict:
    """Realized mean H0 scan cost on a streamed synthetic index of N vectors.

    Member vectors are generated unit-by-unit and discarded after the
    representative is computed, so N can be large.
    """
    tau = threshold_for(construction, alpha0, n, d, eps)
    M = -(-N // n)
    sizes = np.full(M, n, dtype=np.int64)
    if N % n:
        sizes[-1] = N % n
    rng = seed.child(f"cost-{construction}-{n}").generator()
    reps = np.empty((M, d))
    batch = max(1, _UNIT_BATCH_FLOATS // (n * d))
    done = 0
    while done < M:
        b = min(batch, M - done)
        X = _unit_vectors(rng, (b, n, d))
        reps[done:done + b] = _representatives(X, construction)
        done += b
    queries = _unit_vectors(rng, (n_queries, d))
    scores = queries @ reps.T  # (Q, M)
    scanned = np.where(scores > tau, sizes[None, :], 0).sum(axis=1)
    ratios = (M + scanned) / N
    theory = expected_cost_ratio(construction, n, d, alpha0, eps)
    return {
        "construction": construction,
        "alpha0": alpha0,
        "n": n,
        "tau": tau,
        "ratio_mc": float(np.mean(ratios)),
        "ratio_theory": theory.cost_ratio,
    }


def run_cost_curve(d: int, eps: float, alpha0s: list[float], n_values: list[int],
                   constructions: list[str], mc: dict | None = None,
                   seed: Seed | None = None) -> list[dict]:
    """Theoretical C_H0/N curves over n, optionally validated by Monte
    Carlo at the per-curve argmin.

    ``mc`` takes {"N": ..., "queries": ...}; when given, a ``ratio_mc``
    column is filled at the argmin of each curve.
    """
    rows = []
    for construction in constructions:
        for alpha0 in alpha0s:
            curve = []
            for n in n_values:
                if construction == "pinv" and n >= d:
                    continue
                rep = expected_cost_ratio(construction, n, d, alpha0, eps)
                curve.append({
                    "construction": construction,
                    "alpha0": alpha0,
                    "n": n,
                    "tau": rep.tau,
                    "pfp": rep.pfp,
                    "ratio_theory": rep.cost_ratio,
                    "ratio_mc": "",
                })
            if mc and curve:
                best = min(curve, key=lambda r: r["ratio_theory"])
                measured = measure_cost(construction, best["n"], d, alpha0, eps,
                                        mc["N"], mc["queries"], seed or Seed(0))
                best["ratio_mc"] = measured["ratio_mc"]
            rows.extend(curve)
    return rows


_KM_METHODS = {
    "sum-km": ("sum", False),
    "pinv-km": ("pinv", False),
    "sum-km-norm": ("sum", True),
    "pinv-km-norm": ("pinv", True),
}


def run_assignment_report(dataset: Dataset, methods: list[str], M: int,
                          seeds: list[int], alpha: float, alpha0: float,
                          n_queries: int, top_k: int, seed: Seed,
                          tau: float | None = None,
                          kmeans_iters: int | None = None) -> list[dict]:
    """Imbalance, per-rank match probability, matches per positive unit and
    scan complexity for each assignment method and seed.

    Match statistics always use the top-k highest scoring units. Complexity
    is top-k based too unless ``tau`` is given, in which case every unit
    whose score exceeds the threshold is scanned (the production policy).
    ``kmeans_iters`` overrides the k-means iteration budget.
    """
    N = dataset.size
    qrng = seed.child("queries").generator()
    planted = qrng.integers(N, size=n_queries)
    g = qrng.standard_normal((n_queries, dataset.dim))
    x = dataset.vectors[planted]
    g -= np.sum(g * x, axis=1, keepdims=True) * x
    z = g / np.linalg.norm(g, axis=1, keepdims=True)
    beta = np.sqrt(max(0.0, 1.0 - alpha * alpha))
    queries = alpha * x + beta * z
    queries /= np.linalg.norm(queries, axis=1, keepdims=True)
    matches = cosine_ground_truth(dataset, queries, alpha0)

    rows = []
    for method in methods:
        for s in seeds:
            method_seed = seed.child(f"{method}-{s}")
            if method == "random":
                part = random_assignment(N, max(1, N // M), method_seed.generator())
                cfg = ConstructionConfig(kind="pinv")
            elif method in _KM_METHODS:
                mode, norm = _KM_METHODS[method]
                km_kwargs = {} if kmeans_iters is None else {"max_iters": kmeans_iters}
                part, _ = spherical_kmeans(dataset, KMeansConfig(
                    M=M, mode=mode, normalize_representative=norm,
                    seed=method_seed, **km_kwargs))
                cfg = ConstructionConfig(kind=mode)
            else:
                raise DomainError(f"unknown assignment method {method!r}")
            index = build_index(dataset, part, cfg)
            reps = index.representatives()
            sizes = np.array([u.size for u in index.units])
            unit_matches = np.zeros((n_queries, index.num_units), dtype=np.int64)
            for j, u in enumerate(index.units):
                member_set = u.member_ids
                for q in range(n_queries):
                    unit_matches[q, j] = np.intersect1d(
                        member_set, matches[q], assume_unique=True).size

            scores = queries @ reps.T  # (Q, M)
            order = np.argsort(-scores, axis=1, kind="stable")
            visited = order[:, :top_k]
            rank_hit = np.zeros(top_k)
            mpp_num = 0
            mpp_den = 0
            complexities = np.empty(n_queries)
            for q in range(n_queries):
                hits = unit_matches[q, visited[q]]
                rank_hit += hits > 0
                mpp_num += int(hits.sum())
                mpp_den += int(np.count_nonzero(hits))
                if tau is None:
                    complexities[q] = index.num_units + sizes[visited[q]].sum()
                else:
                    complexities[q] = index.num_units + sizes[scores[q] > tau].sum()
            row = {
                "method": method,
                "seed": s,
                "delta": imbalance_factor(part),
                "mean_complexity_ratio": float(np.mean(complexities) / N),
                "std_complexity_ratio": float(np.std(complexities) / N),
                "matches_per_positive": mpp_num / mpp_den if mpp_den else 0.0,
            }
            for r in range(top_k):
                row[f"p_match_rank{r + 1}"] = float(rank_hit[r] / n_queries)
            rows.append(row)
    return rows


def run_binary_comparison(d: int, N: int, n: int, alpha: float, n_queries: int,
                          tau_real: float, tau_binary: float, seed: Seed) -> dict:
    """Recall@10 of the planted match and complexity ratio for the real
    pipeline vs both binary-sketch modes on synthetic data."""
    rng = seed.child("data").generator()
    data = Dataset(sample_sphere(d, rng, size=N))
    part = random_assignment(N, n, seed.child("assign").generator())
    index = build_index(data, part, ConstructionConfig(kind="pinv"))
    bindex = binarize(index, data)

    qrng = seed.child("queries").generator()
    planted = qrng.integers(N, size=n_queries)
    beta = np.sqrt(max(0.0, 1.0 - alpha * alpha))
    out = {}
    results = {"real": [], "symmetric": [], "asymmetric": []}
    ratios = {k: [] for k in results}
    for q in range(n_queries):
        x = data.vectors[planted[q]]
        g = qrng.standard_normal(d)
        g -= np.dot(g, x) * x
        y = alpha * x + beta * g / np.linalg.norm(g)
        y /= np.linalg.norm(y)
        runs = {
            "real": query(index, data, y, tau=tau_real),
            "symmetric": query_binary(bindex, y, tau=tau_binary, mode="symmetric"),
            "asymmetric": query_binary(bindex, y, tau=tau_binary, mode="asymmetric"),
        }
        for k, res in runs.items():
            top10 = [i for i, _ in res.candidates[:10]]
            results[k].append(int(planted[q]) in top10)
            ratios[k].append(res.complexity_ratio)
    for k in results:
        out[f"recall10_{k}"] = float(np.mean(results[k]))
        out[f"ratio_{k}"] = float(np.mean(ratios[k]))
    return out
