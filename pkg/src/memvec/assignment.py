"""Dataset-to-unit assignment: random chunking, spherical k-means with
sum/pinv representatives (optionally normalized for the assignment step),
batch-wise clustering for streaming data, and imbalance diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .construction import ConstructionConfig, pinv_vector, sum_vector
from .core import Dataset
from .errors import DomainError
from .sampling import Seed

__all__ = [
    "Partition",
    "KMeansConfig",
    "BatchConfig",
    "random_assignment",
    "spherical_kmeans",
    "batch_assignment",
    "imbalance_factor",
    "partition_size_stats",
]


@dataclass(frozen=True)
class Partition:
    """Assignment of N dataset ids to M units."""

    unit_of: np.ndarray  # (N,) int64, values in [0, M)
    M: int

    def __post_init__(self):
        u = np.asarray(self.unit_of, dtype=np.int64)
        if u.ndim != 1 or u.size == 0:
            raise DomainError("unit_of must be a non-empty 1-d array")
        if self.M < 1 or u.min() < 0 or u.max() >= self.M:
            raise DomainError("unit ids out of range")
        u.setflags(write=False)
        object.__setattr__(self, "unit_of", u)

    @property
    def N(self) -> int:
        return self.unit_of.size

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.unit_of, minlength=self.M)

    def members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.unit_of == j)


@dataclass(frozen=True)
class KMeansConfig:
    M: int
    mode: str = "pinv"  # "sum" | "pinv"
    normalize_representative: bool = False
    max_iters: int = 20
    seed: Seed = field(default_factory=lambda: Seed(0))
    construction: ConstructionConfig = field(default_factory=ConstructionConfig)

    def __post_init__(self):
        if self.mode not in ("sum", "pinv"):
            raise DomainError(f"unknown k-means mode {self.mode!r}")
        if self.M < 1 or self.max_iters < 1:
            raise DomainError("M and max_iters must be >= 1")


@dataclass(frozen=True)
class BatchConfig:
    """Consecutive batches of size batch_size, clustered independently.

    ``inner`` is a KMeansConfig applied per batch, or the string "random"
    with ``unit_size`` for per-batch random assignment.
    """

    batch_size: int
    inner: KMeansConfig | str
    unit_size: int | None = None
    seed: Seed = field(default_factory=lambda: Seed(0))

    def __post_init__(self):
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if self.inner == "random":
            if self.unit_size is None or self.unit_size < 1:
                raise DomainError("random inner assignment needs unit_size >= 1")
        elif not isinstance(self.inner, KMeansConfig):
            raise DomainError("inner must be a KMeansConfig or 'random'")


def random_assignment(N: int, n: int, rng: np.random.Generator) -> Partition:
    """Seeded uniform permutation of [0, N) chunked into units of size n
    (the last unit may be smaller)."""
    if n < 1 or n > N:
        raise DomainError("need 1 <= n <= N")
    perm = rng.permutation(N)
    M = -(-N // n)
    unit_of = np.empty(N, dtype=np.int64)
    unit_of[perm] = np.arange(N) // n
    return Partition(unit_of=unit_of, M=M)


def _representative(vectors: np.ndarray, mode: str, cfg: ConstructionConfig,
                    normalize_rep: bool) -> np.ndarray:
    rep = sum_vector(vectors) if mode == "sum" else pinv_vector(vectors, cfg)
    if normalize_rep:
        norm = np.linalg.norm(rep)
        if norm > 0.0:
            rep = rep / norm
    return rep


def spherical_kmeans(dataset: Dataset, cfg: KMeansConfig) -> tuple[Partition, np.ndarray]:
    """Spherical k-means where the update stage builds sum or pinv
    representatives (footnote-style normalized variant optional).

    Deterministic given (dataset, cfg): initialization picks M distinct
    seeded-random data points, assignment ties break to the lowest unit
    id, empty clusters steal a seeded-random member of the largest
    cluster. Returns the partition and the (M, d) assignment-stage
    representatives.
    """
    X = dataset.vectors
    N = dataset.size
    if cfg.M > N:
        raise DomainError("M must not exceed the dataset size")
    rng = cfg.seed.generator()
    reps = X[rng.choice(N, size=cfg.M, replace=False)].copy()

    labels = None
    for _ in range(cfg.max_iters):
        scores = X @ reps.T  # (N, M)
        new_labels = np.argmax(scores, axis=1)  # ties -> lowest unit id

        sizes = np.bincount(new_labels, minlength=cfg.M)
        empties = np.flatnonzero(sizes == 0)
        for j in empties:
            largest = int(np.argmax(np.bincount(new_labels, minlength=cfg.M)))
            pool = np.flatnonzero(new_labels == largest)
            stolen = int(pool[rng.integers(len(pool))])
            new_labels[stolen] = j

        if labels is not None and np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
        for j in range(cfg.M):
            members = X[labels == j]
            reps[j] = _representative(members, cfg.mode, cfg.construction,
                                      cfg.normalize_representative)

    return Partition(unit_of=labels, M=cfg.M), reps


def batch_assignment(dataset: Dataset, cfg: BatchConfig) -> tuple[Partition, np.ndarray]:
    """Run the inner assignment independently on consecutive batches.

    Batch i uses the derived seed ``cfg.seed.child(f"batch{i}")``; the
    global partition is the disjoint union with per-batch unit id offsets.
    Returns the partition and the stacked per-batch representatives.
    """
    N = dataset.size
    B = cfg.batch_size
    unit_of = np.empty(N, dtype=np.int64)
    reps_blocks = []
    offset = 0
    for i, start in enumerate(range(0, N, B)):
        stop = min(start + B, N)
        block = Dataset(dataset.vectors[start:stop])
        seed = cfg.seed.child(f"batch{i}")
        if cfg.inner == "random":
            part = random_assignment(block.size, min(cfg.unit_size, block.size),
                                     seed.generator())
            reps = np.zeros((part.M, dataset.dim))
            for j in range(part.M):
                reps[j] = sum_vector(block.vectors[part.members(j)])
        else:
            inner = replace(cfg.inner, M=min(cfg.inner.M, block.size), seed=seed)
            part, reps = spherical_kmeans(block, inner)
        unit_of[start:stop] = part.unit_of + offset
        offset += part.M
        reps_blocks.append(np.atleast_2d(reps))
    return Partition(unit_of=unit_of, M=offset), np.vstack(reps_blocks)


def imbalance_factor(p: Partition) -> float:
    """delta = M * sum_i (n_i / N)^2; 1 iff perfectly balanced."""
    freqs = p.sizes / p.N
    return float(p.M * np.sum(freqs**2))


def partition_size_stats(p: Partition) -> tuple[float, float]:
    """(E[n_i], V[n_i]) implied by the imbalance factor:
    N/M and (delta - 1) N^2 / M^2."""
    delta = imbalance_factor(p)
    return p.N / p.M, (delta - 1.0) * p.N**2 / p.M**2
