"""Memory-vector construction: sum and minimal-norm pseudo-inverse.

The pinv representative solves X'm = 1_n with minimal norm via the n x n
Gram system (n << d in all intended regimes). A singular Gram or n > d
falls back to a ridge-regularized solve; the retry is recorded on the
returned metadata when requested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, EmptyUnitError, SingularGramError

__all__ = ["ConstructionConfig", "sum_vector", "pinv_vector", "solve_spd"]


@dataclass(frozen=True)
class ConstructionConfig:
    """kind: "sum" | "pinv"; ridge applied to the Gram solve (default 0);
    fallback_ridge_scale * mean(diag Gram) is used on solve failure."""

    kind: str = "pinv"
    ridge: float = 0.0
    fallback_ridge_scale: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("sum", "pinv"):
            raise ValueError(f"unknown construction kind {self.kind!r}")
        if self.ridge < 0.0:
            raise ValueError("ridge must be non-negative")
        if self.fallback_ridge_scale <= 0.0:
            raise ValueError("fallback ridge must be positive")


def _as_matrix(members) -> np.ndarray:
    """Stack members into an (n, d) float64 matrix."""
    if isinstance(members, np.ndarray) and members.ndim == 2:
        mat = np.asarray(members, dtype=np.float64)
    else:
        rows = [np.asarray(m, dtype=np.float64) for m in members]
        if not rows:
            raise EmptyUnitError("empty member set")
        dims = {r.shape for r in rows}
        if len(dims) != 1 or rows[0].ndim != 1:
            raise DimensionError("members disagree on dimension")
        mat = np.vstack(rows)
    if mat.shape[0] == 0:
        raise EmptyUnitError("empty member set")
    return mat


def sum_vector(members) -> np.ndarray:
    """Coordinate-wise sum of the members; no normalization."""
    return _as_matrix(members).sum(axis=0)


def solve_spd(A: np.ndarray, b: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Solve (A + ridge I) z = b by Cholesky factorization.

    A must be symmetric (within 1e-10). Raises SingularGramError when the
    factorization breaks down, so the caller can retry with a ridge.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise DimensionError("A must be n x n and b length n")
    if np.max(np.abs(A - A.T)) > 1e-10:
        raise DimensionError("A is not symmetric")
    M = A if ridge == 0.0 else A + ridge * np.eye(n)
    try:
        cho = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularGramError(str(exc)) from exc
    z = scipy.linalg.cho_solve(cho, b, check_finite=False)
    resid = np.max(np.abs(M @ z - b))
    if not np.isfinite(resid) or resid > 1e-8 * (1.0 + np.max(np.abs(b))):
        raise SingularGramError(f"solve residual too large: {resid:.3e}")
    return z


def pinv_vector(members, cfg: ConstructionConfig | None = None,
                report: dict | None = None) -> np.ndarray:
    """Minimal-norm solution m* of X'm = 1_n via the Gram system.

    With ridge = 0 and independent members (n <= d) the constraints
    inner(m*, x_i) = 1 hold to 1e-8. A singular Gram or n > d retries once
    with the fallback ridge; ``report["ridge_used"]`` records the value
    actually applied when a dict is passed.
    """
    cfg = cfg or ConstructionConfig()
    X = _as_matrix(members)  # (n, d)
    n, d = X.shape
    gram = X @ X.T
    ones = np.ones(n)
    ridge_used = cfg.ridge
    if n > d:
        ridge_used = cfg.fallback_ridge_scale * float(np.mean(np.diag(gram)))
        z = solve_spd(gram, ones, ridge=ridge_used)
    else:
        try:
            z = solve_spd(gram, ones, ridge=cfg.ridge)
        except SingularGramError:
            ridge_used = cfg.fallback_ridge_scale * float(np.mean(np.diag(gram)))
            z = solve_spd(gram, ones, ridge=ridge_used)
    if report is not None:
        report["ridge_used"] = ridge_used
        report["fallback"] = ridge_used != cfg.ridge
    return X.T @ z
