"""Ground truth and retrieval quality measures.

All recall numbers are measured against brute-force cosine ground truth:
a database vector is a match for a query when their inner product reaches
alpha0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Dataset
from ..errors import DimensionError

__all__ = ["EvalReport", "cosine_ground_truth", "evaluate_results"]

RECALL_RANKS = (1, 10, 100)


@dataclass(frozen=True)
class EvalReport:
    recall_of_matches: float
    precision: float
    recall_at_r: dict[int, float]
    mean_complexity_ratio: float
    complexity_std: float


def cosine_ground_truth(dataset: Dataset, queries: np.ndarray,
                        alpha0: float) -> list[np.ndarray]:
    """Per-query sorted id lists of all vectors with inner product >= alpha0."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.shape[1] != dataset.dim:
        raise DimensionError("query dimension mismatch")
    sims = queries @ dataset.vectors.T  # (Q, N)
    return [np.flatnonzero(row >= alpha0) for row in sims]


def evaluate_results(retrieved: list[np.ndarray], matches: list[np.ndarray],
                     complexity_ratios: np.ndarray) -> EvalReport:
    """Aggregate recall/precision of ranked retrieval lists against match
    lists, plus complexity statistics.

    recall_at_r averages |top-R intersect matches| / min(R, |matches|)
    over the queries that have at least one match.
    """
    if len(retrieved) != len(matches):
        raise DimensionError("retrieved/matches length mismatch")
    hit = 0
    total_matches = 0
    total_retrieved = 0
    true_retrieved = 0
    at_r = {r: [] for r in RECALL_RANKS}
    for ids, gt in zip(retrieved, matches):
        ids = np.asarray(ids, dtype=np.int64)
        gt_set = set(int(g) for g in gt)
        total_matches += len(gt_set)
        total_retrieved += ids.size
        found = sum(1 for i in ids if int(i) in gt_set)
        true_retrieved += found
        hit += found
        if gt_set:
            for r in RECALL_RANKS:
                top = ids[:r]
                inter = sum(1 for i in top if int(i) in gt_set)
                at_r[r].append(inter / min(r, len(gt_set)))
    ratios = np.asarray(complexity_ratios, dtype=np.float64)
    return EvalReport(
        recall_of_matches=hit / total_matches if total_matches else 0.0,
        precision=true_retrieved / total_retrieved if total_retrieved else 0.0,
        recall_at_r={r: float(np.mean(v)) if v else 0.0 for r, v in at_r.items()},
        mean_complexity_ratio=float(np.mean(ratios)) if ratios.size else 0.0,
        complexity_std=float(np.std(ratios)) if ratios.size else 0.0,
    )
