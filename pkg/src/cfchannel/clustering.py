"""Pairwise normalized-Hamming clustering of rows and columns."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .channel import ERASED, ChannelStats, ObservedMatrix
from .model import Partition

Orientation = Literal["rows", "columns"]


@dataclass(frozen=True)
class PairStats:
    n_common: int
    distance: float | None  # None when n_common == 0


@dataclass(frozen=True, eq=False)
class PartitionEstimate:
    partition: Partition
    pairwise_same: np.ndarray  # symmetric boolean, diagonal True


@dataclass(frozen=True)
class PairwiseErrorCount:
    false_split: int
    false_merge: int
    total_pairs: int

    @property
    def any(self) -> bool:
        return self.false_split + self.false_merge > 0


def _oriented(observed: ObservedMatrix, orientation: Orientation) -> np.ndarray:
    if orientation == "rows":
        return observed.entries
    if orientation == "columns":
        return observed.entries.T
    raise ValueError(f"orientation must be 'rows' or 'columns', got {orientation!r}")


def pair_stats(observed: ObservedMatrix, i: int, j: int,
               orientation: Orientation = "rows") -> PairStats:
    """Common-sample count and mismatch fraction for one pair of rows (or columns)."""
    y = _oriented(observed, orientation)
    if i == j:
        raise ValueError("pair_stats needs two distinct indices")
    a, b = y[i], y[j]
    both = (a != ERASED) & (b != ERASED)
    n_common = int(both.sum())
    if n_common == 0:
        return PairStats(0, None)
    return PairStats(n_common, int((a[both] != b[both]).sum()) / n_common)


def pair_counts(observed: ObservedMatrix, orientation: Orientation = "rows"):
    """All-pairs common-sample counts and mismatch counts.

    Returns two ``k x k`` float arrays ``(n_common, mismatches)``; entries are
    exact integers.
    """
    y = _oriented(observed, orientation)
    obs = (y != ERASED).astype(np.float64)
    n_common = obs @ obs.T
    matches = np.zeros_like(n_common)
    for a in range(observed.alphabet_size):
        s = (y == a).astype(np.float64)
        matches += s @ s.T
    return n_common, n_common - matches


class DisjointSet:
    """Disjoint-set union over ``0..n-1`` with eagerly flattened roots.

    ``root[i]`` always holds the representative of ``i`` (the smallest member
    of its set), so merging a batch of elements is a single vectorized pass.
    """

    def __init__(self, n: int):
        self.root = np.arange(n)

    def find(self, i: int) -> int:
        return int(self.root[i])

    def union(self, i: int, j: int) -> None:
        self.union_many(i, np.array([j]))

    def union_many(self, i: int, others: np.ndarray) -> None:
        roots = np.unique(np.append(self.root[others], self.root[i]))
        if roots.size > 1:
            self.root[np.isin(self.root, roots)] = roots[0]

    def labels(self) -> np.ndarray:
        return self.root.copy()


def cluster_axis(observed: ObservedMatrix, d0: float,
                 orientation: Orientation = "rows") -> PartitionEstimate:
    """Threshold pairwise distances at ``d0`` and group by single linkage.

    A pair is declared "same cluster" iff it has at least one commonly
    observed position and its normalized Hamming distance is below ``d0``.
    Clusters are the connected components of that relation.
    """
    if not 0.0 < d0 < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {d0}")
    n_common, mism = pair_counts(observed, orientation)
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = mism / n_common
    same = (n_common > 0) & (dist < d0)
    np.fill_diagonal(same, True)

    dsu = DisjointSet(same.shape[0])
    upper = np.triu(same, k=1)
    for i in np.flatnonzero(upper.any(axis=1)):
        dsu.union_many(i, np.flatnonzero(upper[i]))
    same.flags.writeable = False
    return PartitionEstimate(Partition.from_labels(dsu.labels()), same)


def pairwise_errors(estimate: PartitionEstimate, truth: Partition) -> PairwiseErrorCount:
    """Compare pairwise decisions with true co-membership over unordered pairs."""
    decided = estimate.pairwise_same
    if decided.shape != (truth.dim, truth.dim):
        raise ValueError("estimate and truth have different dimensions")
    actual = truth.co_membership()
    iu = np.triu_indices(truth.dim, k=1)
    d, a = decided[iu], actual[iu]
    return PairwiseErrorCount(int(np.sum(~d & a)), int(np.sum(d & ~a)), int(d.size))


def default_threshold(stats: ChannelStats) -> float:
    """``(d_lb + 2 d_ub) / 3``, a point strictly inside ``(d_lb, d_ub)``."""
    if stats.d_ub - stats.d_lb <= 1e-12:
        raise ValueError("degenerate channel (d_ub == d_lb): rows cannot be clustered")
    return (stats.d_lb + 2 * stats.d_ub) / 3
