"""Block-constant rating matrices and their cluster structure."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import stream


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Alphabet:
    """Symbols ``0..size-1``."""

    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise ValueError(f"alphabet size must be an integer >= 2, got {self.size!r}")


def _as_alphabet(alphabet: Alphabet | int) -> Alphabet:
    return alphabet if isinstance(alphabet, Alphabet) else Alphabet(int(alphabet))


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of ``dim`` indices to clusters ``0..r-1``.

    Use :meth:`from_labels`, :meth:`from_sizes` or :func:`uniform_partition`
    rather than the raw constructor.
    """

    assignment: np.ndarray
    cluster_sizes: tuple[int, ...]

    def __post_init__(self):
        a = self.assignment
        if a.ndim != 1 or a.size == 0:
            raise ValueError("assignment must be a non-empty 1-d array")
        if a.min() < 0:
            raise ValueError("labels must lie in 0..r-1")
        counts = np.bincount(a, minlength=len(self.cluster_sizes))
        if len(counts) != len(self.cluster_sizes):
            raise ValueError("labels must lie in 0..r-1")
        if np.any(counts == 0):
            raise ValueError("every cluster label must occur at least once")
        if tuple(int(c) for c in counts) != self.cluster_sizes:
            raise ValueError("cluster sizes inconsistent with assignment")

    @classmethod
    def from_labels(cls, labels: Sequence[int] | np.ndarray) -> "Partition":
        """Build from arbitrary labels, renumbered by first appearance."""
        labels = np.asarray(labels)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        assignment = order[inverse.ravel()].astype(np.int64)
        sizes = tuple(int(c) for c in np.bincount(assignment))
        return cls(_frozen(assignment), sizes)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "Partition":
        """Contiguous blocks with the given sizes."""
        sizes = [int(s) for s in sizes]
        if not sizes or min(sizes) < 1:
            raise ValueError("cluster sizes must be positive")
        assignment = np.repeat(np.arange(len(sizes)), sizes)
        return cls(_frozen(assignment), tuple(sizes))

    @property
    def dim(self) -> int:
        return int(self.assignment.size)

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_sizes)

    def co_membership(self) -> np.ndarray:
        """Boolean ``dim x dim`` matrix, true where two indices share a cluster."""
        a = self.assignment
        return a[:, None] == a[None, :]

    def same_as(self, other: "Partition") -> bool:
        """Equality up to renaming of labels."""
        if self.dim != other.dim:
            return False
        return bool(np.array_equal(Partition.from_labels(self.assignment).assignment,
                                   Partition.from_labels(other.assignment).assignment))

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.cluster_sizes == other.cluster_sizes and bool(
            np.array_equal(self.assignment, other.assignment))

    def __hash__(self):
        return hash((self.cluster_sizes, self.assignment.tobytes()))


def uniform_partition(dim: int, cluster_size: int) -> Partition:
    """Split ``0..dim-1`` into contiguous blocks of ``cluster_size``."""
    if cluster_size < 1 or dim < 1:
        raise ValueError("dim and cluster_size must be positive")
    if dim % cluster_size:
        raise ValueError(f"cluster size {cluster_size} does not divide dimension {dim}")
    return Partition.from_sizes([cluster_size] * (dim // cluster_size))


@dataclass(frozen=True, eq=False)
class RatingInstance:
    row_partition: Partition
    col_partition: Partition
    alphabet: Alphabet
    cluster_values: np.ndarray  # r x t
    matrix: np.ndarray  # m x n

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @classmethod
    def from_values(cls, row_partition: Partition, col_partition: Partition,
                    values, alphabet: Alphabet | int = 2) -> "RatingInstance":
        """Instance with prescribed ``r x t`` cluster values."""
        alphabet = _as_alphabet(alphabet)
        values = np.array(values, dtype=np.int8 if alphabet.size < 127 else np.int32)
        if values.shape != (row_partition.n_clusters, col_partition.n_clusters):
            raise ValueError("cluster value table has the wrong shape")
        if values.min() < 0 or values.max() >= alphabet.size:
            raise ValueError("cluster values must lie in the alphabet")
        return cls(row_partition, col_partition, alphabet, _frozen(values),
                   _frozen(block_fill(values, row_partition, col_partition)))


def block_fill(values: np.ndarray, rows: Partition, cols: Partition) -> np.ndarray:
    """Expand an ``r x t`` table of cluster values to the full matrix."""
    return values[np.ix_(rows.assignment, cols.assignment)]


def generate_instance(row_partition: Partition, col_partition: Partition,
                      alphabet: Alphabet | int, seed: int) -> RatingInstance:
    """Draw cluster values i.i.d. uniform over the alphabet and fill the blocks.

    Cluster values are read row-major from the stream keyed by ``seed``, so
    the result is a pure function of the arguments.
    """
    alphabet = _as_alphabet(alphabet)
    r, t = row_partition.n_clusters, col_partition.n_clusters
    dtype = np.int8 if alphabet.size < 127 else np.int32
    values = stream(seed).integers(alphabet.size, r * t).reshape(r, t).astype(dtype)
    matrix = block_fill(values, row_partition, col_partition)
    return RatingInstance(row_partition, col_partition, alphabet,
                          _frozen(values), _frozen(matrix))


@dataclass(frozen=True)
class EffectiveClusterStats:
    s_star: int
    s_low: int
    merged_row_clusters: Partition
    merged_col_clusters: Partition
    merged: bool  # any two generating clusters carry identical values


def _group_identical(values: np.ndarray) -> np.ndarray:
    """Group id per row of ``values``; rows with equal entries share an id."""
    ids: dict[bytes, int] = {}
    return np.array([ids.setdefault(row.tobytes(), len(ids)) for row in values])


def has_identical_clusters(instance: RatingInstance) -> bool:
    """True if two row clusters (or two column clusters) carry identical values."""
    v = instance.cluster_values
    return (len({row.tobytes() for row in v}) < v.shape[0]
            or len({col.tobytes() for col in np.ascontiguousarray(v.T)}) < v.shape[1])


def effective_stats(instance: RatingInstance) -> EffectiveClusterStats:
    """Effective cluster areas after merging clusters with identical values.

    Row clusters whose value rows coincide are merged (equality is transitive,
    so this is well defined); likewise for columns.
    """
    v = instance.cluster_values
    rows = Partition.from_labels(_group_identical(v)[instance.row_partition.assignment])
    cols = Partition.from_labels(
        _group_identical(np.ascontiguousarray(v.T))[instance.col_partition.assignment])
    areas = np.outer(rows.cluster_sizes, cols.cluster_sizes)
    merged = (rows.n_clusters < instance.row_partition.n_clusters
              or cols.n_clusters < instance.col_partition.n_clusters)
    return EffectiveClusterStats(int(areas.max()), int(areas.min()), rows, cols, merged)


def lemma1_bound(m: int, t: int) -> float:
    """Union bound ``min(1, m^2 / 2^t)`` on two row clusters coinciding.

    Binary alphabet only.  For an alphabet of size ``k`` the same argument
    gives ``m^2 / k^t``, which is not provided here.
    """
    if m < 2 or t < 1:
        raise ValueError("need m >= 2 and t >= 1")
    return float(min(1.0, np.exp(2 * np.log(m) - t * np.log(2.0))))
