"""Discrete memoryless channel followed by an erasure channel."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .model import RatingInstance, _frozen
from .rng import stream

ERASED = -1
"""Sentinel stored in observed matrices for an erased entry."""

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Transition matrix ``dmc[x, y] = q(y|x)`` plus erasure probability."""

    dmc: np.ndarray
    epsilon: float

    def __post_init__(self):
        q = np.array(self.dmc, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 2:
            raise ValueError("DMC must be a square matrix over an alphabet of size >= 2")
        if not np.all(np.isfinite(q)) or q.min() < 0:
            raise ValueError("DMC entries must be finite and non-negative")
        sums = q.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > ROW_SUM_TOL:
            raise ValueError(f"DMC rows must sum to 1 (within {ROW_SUM_TOL}); got {sums}")
        q /= sums[:, None]
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"erasure probability must lie in [0, 1], got {self.epsilon}")
        object.__setattr__(self, "dmc", _frozen(q))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def __eq__(self, other):
        if not isinstance(other, ChannelSpec):
            return NotImplemented
        return self.epsilon == other.epsilon and np.array_equal(self.dmc, other.dmc)

    def __hash__(self):
        return hash((self.dmc.tobytes(), self.dmc.shape, self.epsilon))

    @property
    def alphabet_size(self) -> int:
        return self.dmc.shape[0]

    def is_bsc(self) -> bool:
        q = self.dmc
        return q.shape == (2, 2) and q[0, 1] == q[1, 0]

    @property
    def crossover(self) -> float:
        if not self.is_bsc():
            raise ValueError("not a binary symmetric channel")
        return float(self.dmc[0, 1])

    def to_config(self) -> dict:
        if self.is_bsc():
            return {"type": "bsc", "p": self.crossover, "epsilon": self.epsilon}
        return {"type": "dmc", "matrix": self.dmc.tolist(), "epsilon": self.epsilon}


def _check_prob(name: str, x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
    return x


def bsc_spec(p: float, epsilon: float) -> ChannelSpec:
    p = _check_prob("p", p)
    epsilon = _check_prob("epsilon", epsilon)
    return ChannelSpec(np.array([[1 - p, p], [p, 1 - p]]), epsilon)


def dmc_spec(matrix, epsilon: float) -> ChannelSpec:
    return ChannelSpec(np.asarray(matrix, dtype=np.float64), _check_prob("epsilon", epsilon))


def channel_from_config(cfg: Mapping[str, Any]) -> ChannelSpec:
    """Parse ``{"type": "bsc", "p", "epsilon"}`` or ``{"type": "dmc", "matrix", "epsilon"}``."""
    kind = cfg.get("type")
    allowed = {"bsc": {"type", "p", "epsilon"}, "dmc": {"type", "matrix", "epsilon"}}
    if kind not in allowed:
        raise ValueError(f"unknown channel type {kind!r}")
    extra = set(cfg) - allowed[kind]
    missing = allowed[kind] - set(cfg)
    if extra or missing:
        raise ValueError(f"bad {kind} channel keys: unknown {sorted(extra)}, missing {sorted(missing)}")
    if kind == "bsc":
        return bsc_spec(cfg["p"], cfg["epsilon"])
    return dmc_spec(cfg["matrix"], cfg["epsilon"])


@dataclass(frozen=True, eq=False)
class ObservedMatrix:
    """Channel output; erased entries hold :data:`ERASED`."""

    entries: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2:
            raise ValueError("observed matrix must be 2-d")
        bad = (e != ERASED) & ((e < 0) | (e >= self.alphabet_size))
        if bad.any():
            raise ValueError("non-erased entries must lie in the alphabet")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def observed(self) -> np.ndarray:
        return self.entries != ERASED

    @property
    def T(self) -> "ObservedMatrix":
        return ObservedMatrix(self.entries.T, self.alphabet_size)


def transmit(instance: RatingInstance, spec: ChannelSpec, seed: int) -> ObservedMatrix:
    """Pass every entry through the DMC, then erase it with probability epsilon.

    One stream keyed by ``seed`` supplies ``m*n`` uniforms for the DMC draws
    (row-major, inverse-CDF sampling) followed by ``m*n`` uniforms for the
    erasures.
    """
    if spec.alphabet_size != instance.alphabet.size:
        raise ValueError(f"channel alphabet ({spec.alphabet_size}) does not match "
                         f"instance alphabet ({instance.alphabet.size})")
    x = instance.matrix
    size = x.size
    rs = stream(seed)
    u = rs.uniform(size).reshape(x.shape)
    cum = np.cumsum(spec.dmc, axis=1)
    if spec.alphabet_size == 2:
        y = (u >= cum[x, 0]).astype(np.int8)
    else:
        y = np.zeros(x.shape, dtype=np.int16)
        for k in range(spec.alphabet_size - 1):
            y += u >= cum[x, k]
    erase = rs.uniform(size).reshape(x.shape) < spec.epsilon
    y[erase] = ERASED
    return ObservedMatrix(_frozen(y), spec.alphabet_size)


@dataclass(frozen=True, eq=False)
class ChannelStats:
    mu: np.ndarray  # mu[p, q] = Pr(outputs differ | inputs p, q)
    d_lb: float
    d_ub: float


def channel_stats(spec: ChannelSpec) -> ChannelStats:
    """Output-mismatch probabilities for pairs of inputs.

    ``mu[p, q] = sum_{y != z} q(y|p) q(z|q) = 1 - sum_y q(y|p) q(y|q)``;
    ``d_lb`` averages the diagonal, ``d_ub`` averages all pairs.
    """
    q = spec.dmc
    mu = np.clip(1.0 - q @ q.T, 0.0, 1.0)
    mu = (mu + mu.T) / 2
    return ChannelStats(_frozen(mu), float(np.mean(np.diag(mu))), float(np.mean(mu)))
