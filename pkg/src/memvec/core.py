"""Core data model: unit vectors, datasets, memory units and query models.

All vectors live on the d-dimensional unit hypersphere and similarity is
the plain inner product. Coefficients are held in float64 internally; the
32-bit file representation is widened on load by the harness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, EmptyUnitError, ModelError, NormalizationError

UNIT_NORM_TOL = 1e-9

__all__ = [
    "UNIT_NORM_TOL",
    "normalize",
    "inner",
    "Dataset",
    "MemoryUnit",
    "MemoryIndex",
    "QueryModel",
]


def normalize(v) -> np.ndarray:
    """Return v / ||v||_2 as a float64 unit vector.

    Raises NormalizationError for zero-norm or non-finite input.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError("expected a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise NormalizationError("vector has non-finite coefficients")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise NormalizationError("cannot normalize a zero vector")
    out = arr / norm
    # one refinement pass keeps |norm - 1| well inside 1e-9
    out = out / float(np.linalg.norm(out))
    return out


def inner(a, b) -> float:
    """Inner product with a fixed (numpy pairwise) accumulation order."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a, b))


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of N unit vectors of common dimension d.

    Ids are positional: vector i is ``vectors[i]``.
    """

    vectors: np.ndarray  # (N, d) float64

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError("dataset must be a non-empty (N, d) array")
        if not np.all(np.isfinite(arr)):
            raise NormalizationError("dataset has non-finite coefficients")
        norms = np.linalg.norm(arr, axis=1)
        # loose bound: file-loaded data is float32-rounded
        if np.max(np.abs(norms - 1.0)) > 1e-4:
            raise NormalizationError("dataset rows are not unit vectors")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.size


@dataclass(frozen=True)
class MemoryUnit:
    """A group of dataset ids and its representative vector.

    The representative is not necessarily unit norm.
    """

    member_ids: np.ndarray  # (n_i,) int64, no duplicates
    representative: np.ndarray  # (d,) float64

    def __post_init__(self):
        ids = np.asarray(self.member_ids, dtype=np.int64)
        rep = np.asarray(self.representative, dtype=np.float64)
        if ids.ndim != 1 or ids.size == 0:
            raise EmptyUnitError("memory unit has no members")
        if len(np.unique(ids)) != ids.size:
            raise EmptyUnitError("duplicate member ids in memory unit")
        if rep.ndim != 1 or not np.all(np.isfinite(rep)):
            raise DimensionError("representative must be a finite 1-d vector")
        ids.setflags(write=False)
        rep.setflags(write=False)
        object.__setattr__(self, "member_ids", ids)
        object.__setattr__(self, "representative", rep)

    @property
    def size(self) -> int:
        return self.member_ids.size


@dataclass(frozen=True)
class MemoryIndex:
    """All M memory units plus construction metadata.

    Invariant: the member id sets partition [0, total).
    """

    units: tuple[MemoryUnit, ...]
    construction: str  # "sum" | "pinv"
    dim: int
    total: int

    def __post_init__(self):
        if self.construction not in ("sum", "pinv"):
            raise ModelError(f"unknown construction tag {self.construction!r}")
        if not self.units:
            raise EmptyUnitError("index has no units")
        for u in self.units:
            if u.representative.size != self.dim:
                raise DimensionError("unit representative dimension mismatch")
        all_ids = np.concatenate([u.member_ids for u in self.units])
        if all_ids.size != self.total or not np.array_equal(
            np.sort(all_ids), np.arange(self.total)
        ):
            raise ModelError("unit members do not partition the dataset ids")

    @property
    def num_units(self) -> int:
        return len(self.units)

    def representatives(self) -> np.ndarray:
        """Stack representatives into an (M, d) array."""
        return np.stack([u.representative for u in self.units])


@dataclass(frozen=True)
class QueryModel:
    """Generative model of a query: H0 (unrelated) or H1 (planted match).

    Under H1 the query is alpha * x_planted + beta * Z with Z a unit vector
    orthogonal to the planted match; beta = sqrt(1 - alpha^2) always.
    """

    hypothesis: str  # "H0" | "H1"
    alpha: float = 0.0
    planted_id: int | None = field(default=None)

    def __post_init__(self):
        if self.hypothesis not in ("H0", "H1"):
            raise ModelError(f"unknown hypothesis {self.hypothesis!r}")
        if self.hypothesis == "H1":
            if self.planted_id is None:
                raise ModelError("H1 requires a planted id")
            if not 0.0 <= self.alpha <= 1.0:
                raise ModelError("alpha must lie in [0, 1]")

    @property
    def beta(self) -> float:
        return float(np.sqrt(max(0.0, 1.0 - self.alpha**2)))
