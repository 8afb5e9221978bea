"""Per-cluster value estimation and the two-stage estimator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .channel import ERASED, ChannelSpec, ObservedMatrix, channel_stats
from .clustering import PartitionEstimate, cluster_axis, default_threshold
from .model import Partition, RatingInstance, block_fill
from .rng import stream

Mode = Literal["majority", "ml"]

_TIE_RTOL = 1e-12


class ImpossibleObservationError(ValueError):
    """A block's observations have zero likelihood under every input symbol."""


@dataclass(frozen=True, eq=False)
class DecodedMatrix:
    matrix: np.ndarray
    cluster_values: np.ndarray
    sample_counts: np.ndarray  # non-erased observations per cluster, r x t


def cluster_symbol_counts(observed: ObservedMatrix, rows: Partition,
                          cols: Partition) -> np.ndarray:
    """``counts[i, j, y]`` = number of observations equal to ``y`` in block (i, j)."""
    y = observed.entries
    if y.shape != (rows.dim, cols.dim):
        raise ValueError("partitions do not match the observed matrix shape")
    k = observed.alphabet_size
    t = cols.n_clusters
    seen = y != ERASED
    block = rows.assignment[:, None] * t + cols.assignment[None, :]
    flat = block[seen] * k + y[seen]
    counts = np.bincount(flat, minlength=rows.n_clusters * t * k)
    return counts.reshape(rows.n_clusters, t, k)


def _pick_among_ties(tied: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index of the ``floor(u * #tied)``-th tied candidate along the last axis."""
    n_tied = tied.sum(axis=-1)
    target = np.minimum((u * n_tied).astype(np.int64), n_tied - 1)
    rank = np.cumsum(tied, axis=-1) - 1
    return np.argmax(tied & (rank == target[..., None]), axis=-1)


def _finish(values, counts, rows, cols) -> DecodedMatrix:
    values = values.astype(np.int8 if counts.shape[-1] < 127 else np.int32)
    return DecodedMatrix(block_fill(values, rows, cols), values, counts.sum(axis=-1))


def majority_decode(observed: ObservedMatrix, rows: Partition, cols: Partition,
                    seed: int) -> DecodedMatrix:
    """Fill each block with its most frequent observed bit.

    Exact ties, including blocks with no observations, are settled by a fair
    coin: one uniform per block is read row-major from the stream keyed by
    ``seed`` whether or not the block is tied.
    """
    if observed.alphabet_size != 2:
        raise ValueError("majority decoding needs a binary alphabet; use ml_decode")
    counts = cluster_symbol_counts(observed, rows, cols)
    c0, c1 = counts[..., 0], counts[..., 1]
    u = stream(seed).uniform(c0.size).reshape(c0.shape)
    values = np.where(c1 > c0, 1, 0)
    tie = c0 == c1
    values[tie] = (u[tie] >= 0.5).astype(values.dtype)
    return _finish(values, counts, rows, cols)


def ml_decode(observed: ObservedMatrix, rows: Partition, cols: Partition,
              spec: ChannelSpec, seed: int) -> DecodedMatrix:
    """Fill each block with the symbol maximizing the sample log-likelihood.

    Maximizing ``sum ln q(y|a)`` over the block's samples is the same as
    minimizing ``D(empirical || q(.|a))``.  Ties are broken uniformly at random
    with one uniform per block from the stream keyed by ``seed``.
    """
    if spec.alphabet_size != observed.alphabet_size:
        raise ValueError("channel and observation alphabets differ")
    counts = cluster_symbol_counts(observed, rows, cols).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        logq = np.log(spec.dmc)  # [a, y]
        # 0 * log 0 counts as 0: only observed symbols constrain a candidate
        terms = np.where(counts[..., None, :] > 0, counts[..., None, :] * logq, 0.0)
    loglik = terms.sum(axis=-1)  # [i, j, a]
    best = loglik.max(axis=-1)
    if np.isneginf(best).any():
        i, j = np.argwhere(np.isneginf(best))[0]
        raise ImpossibleObservationError(f"impossible observation in block ({i}, {j}): "
                         "zero likelihood under every input symbol")
    tied = loglik >= (best - _TIE_RTOL * (1.0 + np.abs(best)))[..., None]
    u = stream(seed).uniform(best.size).reshape(best.shape)
    values = _pick_among_ties(tied, u)
    return _finish(values, counts, rows, cols)


def block_error(decoded: DecodedMatrix | np.ndarray, truth: RatingInstance) -> bool:
    """True iff any entry of the estimate differs from the true matrix."""
    est = decoded.matrix if isinstance(decoded, DecodedMatrix) else np.asarray(decoded)
    if est.shape != truth.matrix.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {truth.matrix.shape}")
    return bool(np.any(est != truth.matrix))


def default_mode(alphabet_size: int) -> Mode:
    return "majority" if alphabet_size == 2 else "ml"


def decode(observed: ObservedMatrix, rows: Partition, cols: Partition,
           spec: ChannelSpec, mode: Mode | None, seed: int) -> DecodedMatrix:
    mode = mode or default_mode(observed.alphabet_size)
    if mode == "majority":
        return majority_decode(observed, rows, cols, seed)
    if mode == "ml":
        return ml_decode(observed, rows, cols, spec, seed)
    raise ValueError(f"unknown decode mode {mode!r}")


def estimate_matrix(observed: ObservedMatrix, d0: float | None, spec: ChannelSpec,
                    mode: Mode | None = None, seed: int = 0
                    ) -> tuple[DecodedMatrix, PartitionEstimate, PartitionEstimate]:
    """Cluster rows and columns, then decode as if the clustering were right.

    ``d0=None`` uses :func:`default_threshold` for ``spec``.  Returns the
    decoded matrix with the row and column partition estimates.
    """
    if d0 is None:
        d0 = default_threshold(channel_stats(spec))
    row_est = cluster_axis(observed, d0, "rows")
    col_est = cluster_axis(observed, d0, "columns")
    decoded = decode(observed, row_est.partition, col_est.partition, spec, mode, seed)
    return decoded, row_est, col_est
