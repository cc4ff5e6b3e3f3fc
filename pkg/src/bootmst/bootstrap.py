"""Row and pair bootstrap replicas of a correlation matrix, and MST link tallies."""

from __future__ import annotations

import csv
import enum
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from joblib import Parallel, delayed

from ._kernels import pair_replica_matrix
from .correlation import CorrelationMatrix, _pearson_rows, to_distance
from .data import ReturnsPanel
from .exceptions import ReplicaError
from .filtering import mst_edges

__all__ = [
    "BootstrapMethod",
    "BootstrapTally",
    "ReplicaSeedPolicy",
    "row_replica",
    "pair_replica",
    "replica_matrix",
    "run_bootstrap",
    "distinct_link_count",
    "possible_link_count",
    "write_tally",
    "read_tally",
    "resolve_workers",
]

MAX_ATTEMPTS = 100
WORKERS_ENV = "BOOTMST_WORKERS"


class BootstrapMethod(str, enum.Enum):
    ROW = "row"
    PAIR = "pair"


@dataclass(frozen=True)
class ReplicaSeedPolicy:
    """Derives an independent 64-bit seed for every replica index."""

    master_seed: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def replica_seed(self, index: int) -> int:
        ss = np.random.SeedSequence([int(self.master_seed), int(index)])
        return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class BootstrapTally:
    """How many replica MSTs contained each link.

    ``counts`` maps ``(i, j)`` with ``i < j`` to a count in ``[1, replicas]``;
    links never observed are absent.
    """

    method: BootstrapMethod
    replicas: int
    n_nodes: int
    counts: Mapping[tuple[int, int], int] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "method", BootstrapMethod(self.method))
        for (a, b), c in self.counts.items():
            if not (0 <= a < b < self.n_nodes):
                raise ValueError(f"bad pair ({a}, {b})")
            if not 1 <= c <= self.replicas:
                raise ValueError(f"count {c} for ({a}, {b}) outside [1, {self.replicas}]")

    def total(self) -> int:
        return int(sum(self.counts.values()))

    def value(self, a: int, b: int) -> int:
        return self.counts.get((min(a, b), max(a, b)), 0)

    def values(self) -> np.ndarray:
        return np.fromiter(self.counts.values(), dtype=np.int64, count=len(self.counts))

    def sorted_items(self) -> list[tuple[tuple[int, int], int]]:
        """Descending count, then ascending pair."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))


def _resample_indices(seed: int, attempt: int, T: int) -> np.ndarray:
    rng = np.random.default_rng([seed, attempt])
    return rng.integers(0, T, size=T)


def _row_matrix(X: np.ndarray, seed: int) -> np.ndarray:
    T = X.shape[1]
    for attempt in range(MAX_ATTEMPTS):
        Z = X[:, _resample_indices(seed, attempt, T)]
        if np.any(np.ptp(Z, axis=1) == 0):
            continue
        return _pearson_rows(Z)
    raise ReplicaError(f"row replica degenerate after {MAX_ATTEMPTS} draws (seed {seed})")


def _pair_matrix(X: np.ndarray, seed: int) -> np.ndarray:
    C, bad_i, bad_j = pair_replica_matrix(X, np.uint64(seed), MAX_ATTEMPTS)
    if bad_i >= 0:
        raise ReplicaError(
            f"pair ({bad_i}, {bad_j}) degenerate after {MAX_ATTEMPTS} draws (seed {seed})"
        )
    return C


def _as_array(panel) -> np.ndarray:
    X = panel.observations if isinstance(panel, ReturnsPanel) else panel
    return np.ascontiguousarray(X, dtype=np.float64)


def row_replica(panel: ReturnsPanel, seed: int) -> CorrelationMatrix:
    """Resample T whole time records (all elements together) and correlate."""
    return CorrelationMatrix(_row_matrix(_as_array(panel), seed))


def pair_replica(panel: ReturnsPanel, seed: int) -> CorrelationMatrix:
    """Resample time records independently for every pair of elements.

    The result need not be positive semidefinite.
    """
    return CorrelationMatrix(_pair_matrix(_as_array(panel), seed))


def replica_matrix(panel, method, seed: int) -> CorrelationMatrix:
    method = BootstrapMethod(method)
    return row_replica(panel, seed) if method is BootstrapMethod.ROW else pair_replica(panel, seed)


def resolve_workers(n_jobs: int | None) -> int:
    if n_jobs is None:
        env = os.environ.get(WORKERS_ENV)
        n_jobs = int(env) if env else 1
    if n_jobs < 1:
        raise ValueError("worker count must be >= 1")
    return n_jobs


def _replica_chunk(X, method, policy, indices):
    build = _row_matrix if method is BootstrapMethod.ROW else _pair_matrix
    out = np.empty((len(indices), X.shape[0] - 1, 2), dtype=np.int64)
    for k, b in enumerate(indices):
        try:
            C = build(X, policy.replica_seed(b))
        except ReplicaError as exc:
            raise ReplicaError(f"replica {b}: {exc}", replica=b) from exc
        out[k] = mst_edges(to_distance(C))
    return out


def _chunks(B: int, workers: int) -> list[range]:
    size = max(1, min(64, -(-B // (4 * workers))))
    return [range(s, min(B, s + size)) for s in range(0, B, size)]


def run_bootstrap(
    panel: ReturnsPanel,
    method="row",
    B: int = 1000,
    policy: ReplicaSeedPolicy | int = 0,
    n_jobs: int | None = None,
) -> BootstrapTally:
    """Build ``B`` replica matrices, extract each MST and count its links.

    The result depends only on ``(panel, method, B, policy)``; ``n_jobs``
    (default: ``$BOOTMST_WORKERS`` or 1) changes speed, never the tally.
    """
    method = BootstrapMethod(method)
    if B < 1:
        raise ValueError("B must be >= 1")
    if not isinstance(policy, ReplicaSeedPolicy):
        policy = ReplicaSeedPolicy(policy)
    X = _as_array(panel)
    n = X.shape[0]
    workers = resolve_workers(n_jobs)
    chunks = _chunks(B, workers)
    if workers == 1:
        results = [_replica_chunk(X, method, policy, c) for c in chunks]
    else:
        results = Parallel(n_jobs=workers)(
            delayed(_replica_chunk)(X, method, policy, c) for c in chunks
        )
    dense = np.zeros((n, n), dtype=np.int64)
    for edges in results:
        flat = edges.reshape(-1, 2)
        np.add.at(dense, (flat[:, 0], flat[:, 1]), 1)
    iu, ju = np.nonzero(dense)
    counts = {(int(a), int(b)): int(dense[a, b]) for a, b in zip(iu, ju)}
    return BootstrapTally(method, B, n, counts)


def distinct_link_count(tally: BootstrapTally) -> int:
    return len(tally.counts)


def possible_link_count(n: int) -> int:
    return n * (n - 1) // 2


TALLY_HEADER = ["element_i", "element_j", "count", "method", "replicas"]


def write_tally(tally: BootstrapTally, path, elements: Sequence[str]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TALLY_HEADER)
        for (a, b), c in tally.sorted_items():
            w.writerow([elements[a], elements[b], c, tally.method.value, tally.replicas])


def read_tally(path, elements: Sequence[str]) -> BootstrapTally:
    index = {e: k for k, e in enumerate(elements)}
    counts, method, replicas = {}, None, None
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TALLY_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TALLY_HEADER)}")
        for row in reader:
            a, b = index[row["element_i"]], index[row["element_j"]]
            counts[(min(a, b), max(a, b))] = int(row["count"])
            method, replicas = row["method"], int(row["replicas"])
    if method is None:
        raise ValueError(f"{path}: empty tally")
    return BootstrapTally(method, replicas, len(elements), counts)
