"""Analytic error probabilities, bounds and thresholds.

Products over many clusters and powers such as ``p1 ** area`` are handled in
the log domain; probabilities that may be astronomically small are also
returned as natural logarithms (``log_*`` fields) so that curves over large
ranges of cluster size can be plotted without underflow.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import optimize, special, stats

from .channel import ChannelSpec

LN2 = math.log(2.0)
MAX_EXACT_AREA = 10**6


def bernoulli_kl(a: float, b: float) -> float:
    """KL divergence ``D(Bern(a) || Bern(b))`` in nats (``0 ln 0 = 0``; may be inf)."""
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ValueError(f"arguments must be probabilities, got {a}, {b}")
    return float(special.rel_entr(a, b) + special.rel_entr(1.0 - a, 1.0 - b))


def _log_one_minus_exp_neg(log_x: float) -> float:
    """``ln(1 - exp(-x))`` given ``ln x``; exact in the small-``x`` regime."""
    if log_x == -math.inf:
        return -math.inf
    if log_x < -30.0:
        return log_x - math.exp(log_x) / 2
    return math.log(-math.expm1(-math.exp(log_x)))


def _prob_from_log(log_p: float) -> float:
    return math.exp(min(log_p, 0.0))


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


# ---------------------------------------------------------------------------
# binary alphabet, known clustering


def p1_binary(p: float, epsilon: float) -> float:
    """Per-sample reliability ``eps + 2 (1 - eps) sqrt(p (1 - p))``."""
    return epsilon + 2.0 * (1.0 - epsilon) * math.sqrt(p * (1.0 - p))


def threshold_area(m: int, n: int, p1: float) -> float:
    """Cluster-area threshold ``ln(mn) / ln(1/p1)`` (0 when p1 = 0, inf when p1 = 1)."""
    if p1 >= 1.0:
        return math.inf
    if p1 <= 0.0:
        return 0.0
    return math.log(m * n) / -math.log(p1)


@dataclass(frozen=True)
class BinaryBoundsReport:
    p: float
    epsilon: float
    m: int
    n: int
    p1: float
    threshold_area: float
    mu: float
    nu: float
    s_low: int | None
    s_star: int | None
    fill_lower: float | None
    fill_upper: float | None  # None when the area hypothesis fails
    log_fill_lower: float | None
    log_fill_upper: float | None
    flags: tuple[str, ...] = ()

    @property
    def threshold_side(self) -> float:
        return math.sqrt(self.threshold_area)


def binary_report(p: float, epsilon: float, m: int, n: int,
                  s_low: int | None = None, s_star: int | None = None) -> BinaryBoundsReport:
    """Threshold and known-clustering fill-error bounds for a BSC with erasures.

    ``fill_upper = 1 - exp(-2 ln2 mn p1^s_low / s_low)`` is only reported when
    ``s_low >= ln 2 / ln(1/p1)``; otherwise it is ``None`` and the flag
    ``fill_ub_hypothesis`` is set.
    ``fill_lower = 1 - exp(-(1/4) sqrt(p/(1-p)) mn p1^s_star / (s_star (s_star + 1)))``.
    """
    if not 0.0 <= p < 0.5:
        raise ValueError(f"need 0 <= p < 1/2, got {p}")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"need 0 <= epsilon < 1, got {epsilon}")
    p1 = p1_binary(p, epsilon)
    log_p1 = _log(p1)
    log_mn = math.log(m) + math.log(n)
    mu = 2 * p * (1 - p)
    flags = []

    fill_upper = log_fill_upper = None
    if s_low is not None:
        if s_low < 1:
            raise ValueError("cluster areas must be positive")
        if p1 > 0 and s_low < LN2 / -log_p1:
            flags.append("fill_ub_hypothesis")
        else:
            log_x = math.log(2 * LN2) + log_mn + s_low * log_p1 - math.log(s_low)
            log_fill_upper = _log_one_minus_exp_neg(log_x)
            fill_upper = _prob_from_log(log_fill_upper)

    fill_lower = log_fill_lower = None
    if s_star is not None:
        if s_star < 1:
            raise ValueError("cluster areas must be positive")
        log_x = (math.log(0.25) + 0.5 * (_log(p) - math.log(1 - p)) + log_mn
                 + s_star * log_p1 - math.log(s_star) - math.log(s_star + 1))
        log_fill_lower = _log_one_minus_exp_neg(log_x)
        fill_lower = _prob_from_log(log_fill_lower)

    return BinaryBoundsReport(p, epsilon, m, n, p1, threshold_area(m, n, p1), mu, 1 - mu,
                              s_low, s_star, fill_lower, fill_upper,
                              log_fill_lower, log_fill_upper, tuple(flags))


def majority_error_given_samples(s: np.ndarray, p: float) -> np.ndarray:
    """Majority-decoder error probability with ``s`` unerased BSC(p) samples.

    Wrong when more than half the samples flip; an exact half is a coin toss
    (which also covers ``s = 0``).
    """
    s = np.asarray(s)
    err = stats.binom.sf(s // 2, s, p)
    even = s % 2 == 0
    return err + np.where(even, 0.5 * stats.binom.pmf(s // 2, s, p), 0.0)


@lru_cache(maxsize=4096)
def cluster_error(area: int, p: float, epsilon: float) -> float:
    """Probability the majority decoder gets one block of ``area`` entries wrong."""
    if area < 1:
        raise ValueError("cluster area must be positive")
    if area > MAX_EXACT_AREA:
        raise ValueError(f"cluster area {area} exceeds {MAX_EXACT_AREA}; out of scope")
    s = np.arange(area + 1)
    weights = stats.binom.pmf(s, area, 1.0 - epsilon)
    return float(np.clip(np.sum(weights * majority_error_given_samples(s, p)), 0.0, 1.0))


def exact_fill_error(row_sizes: Sequence[int], col_sizes: Sequence[int],
                     p: float, epsilon: float) -> float:
    """Exact block-error probability of majority decoding with known clusters.

    Blocks fail independently, so the result is ``1 - prod(1 - err(area))``,
    accumulated as a sum of ``log1p`` terms over distinct areas.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= epsilon <= 1.0):
        raise ValueError("p and epsilon must be probabilities")
    rows = np.asarray(row_sizes, dtype=np.int64)
    cols = np.asarray(col_sizes, dtype=np.int64)
    if rows.size == 0 or cols.size == 0 or rows.min() < 1 or cols.min() < 1:
        raise ValueError("cluster sizes must be positive")
    areas, mult = np.unique(np.outer(rows, cols), return_counts=True)
    log_ok = 0.0
    for area, k in zip(areas.tolist(), mult.tolist()):
        log_ok += k * math.log1p(-cluster_error(area, float(p), float(epsilon)))
    return max(0.0, -math.expm1(log_ok))  # no -0.0 on underflow


# ---------------------------------------------------------------------------
# binary clustering bound


def solve_hstar(mu: float, nu: float, d0: float) -> float:
    """Smaller root of ``2 mu nu (1-d0) h^2 + (2 d0 - 2 mu nu - 1) h + 1 - 2 d0 = 0``.

    When ``d0 > 1/2`` the smaller root is negative; the Chernoff parameter is
    restricted to ``[0, 1)``, where the objective then increases from
    ``h = 0``, so 0 is returned.  A noiseless channel (``mu = 0``) has no
    root in ``[0, 1)`` and is rejected.
    """
    if not mu < d0 < mu + 0.5:
        raise ValueError(f"threshold must lie in (mu, mu + 1/2) = ({mu}, {mu + 0.5}), got {d0}")
    a = 2 * mu * nu * (1 - d0)
    b = 2 * d0 - 2 * mu * nu - 1
    c = 1 - 2 * d0
    if a == 0.0:
        # mu * nu = 0: the linear equation has its root at h = 1
        raise ValueError("degenerate quadratic (mu * nu = 0): no root in [0, 1)")
    disc = b * b - 4 * a * c
    if disc < 0:
        raise ArithmeticError(f"negative discriminant {disc}")
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    root = min(q / a, c / q) if q != 0 else min(0.0, -b / a)
    return max(root, 0.0)


@dataclass(frozen=True)
class ClusteringBoundReport:
    n: int
    t: int
    n0: int
    p: float
    epsilon: float
    d0: float
    r1: float
    r2: float
    h_star: float
    alpha1: float
    alpha2: float
    lambda1: float
    lambda2: float
    same_cluster_bound: float  # bound on P(declared different | same cluster)
    P1: float  # bound on P(declared same | different clusters)
    log_same_cluster_bound: float
    log_P1: float
    m: int | None = None
    union_bound: float | None = None  # m(m-1)/2 * max(same, P1), capped at 1
    log_union_bound: float | None = None
    flags: tuple[str, ...] = field(default=())


def clustering_bound(n: int, t: int, n0: int, p: float, epsilon: float, d0: float,
                     r1: float = 1.5, r2: float = 0.5, m: int | None = None
                     ) -> ClusteringBoundReport:
    """Pairwise row-clustering error bounds for the threshold algorithm.

    ``n`` columns in ``t`` column clusters of size ``n0``.  With
    ``w = (1 - eps)^2``:

    * same cluster: ``exp(-n min(r2 w D(d0||mu), alpha2))``
    * different clusters:
      ``P1 = f(h*)^(n r1 w) lambda1^t + exp(-alpha1 n) + lambda2^t``
      where ``f(h) = (1 - mu h) / (1 - h)^d0``.

    If ``r1 w >= 1`` the event ``N_ij > n r1 w`` is impossible and
    ``alpha1 = inf``.  Probabilities are capped at 1; the logs are not.
    """
    if not r1 > 1:
        raise ValueError(f"need r1 > 1, got {r1}")
    if not 0 < r2 < 1:
        raise ValueError(f"need 0 < r2 < 1, got {r2}")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"need 0 <= epsilon < 1, got {epsilon}")
    if not 0.0 <= p < 0.5:
        raise ValueError(f"need 0 <= p < 1/2, got {p}")
    if min(n, t, n0) < 1:
        raise ValueError("n, t and n0 must be positive")
    mu = 2 * p * (1 - p)
    nu = 1 - mu
    h = solve_hstar(mu, nu, d0)  # validates d0
    w = (1 - epsilon) ** 2

    alpha1 = bernoulli_kl(r1 * w, w) if r1 * w < 1 else math.inf
    alpha2 = bernoulli_kl(r2 * w, w)
    log_same = -n * min(r2 * w * bernoulli_kl(d0, mu), alpha2)

    log_f = math.log1p(-mu * h) - d0 * math.log1p(-h)
    log_rho = math.log1p(-nu * h) - math.log1p(-mu * h)
    log_lambda1 = math.log(0.5) + math.log1p(math.exp(n0 * r2 * w * log_rho))
    log_lambda2 = math.log(0.5) + math.log1p(2.0 ** (-n0 * alpha2))
    log_P1 = float(special.logsumexp([n * r1 * w * log_f + t * log_lambda1,
                                      -alpha1 * n,
                                      t * log_lambda2]))

    union = log_union = None
    flags = []
    if m is not None:
        log_union = math.log(m * (m - 1) / 2) + max(log_same, log_P1)
        union = _prob_from_log(log_union)
        if log_union >= 0:
            flags.append("clust_vacuous")
    return ClusteringBoundReport(
        n, t, n0, p, epsilon, d0, r1, r2, h, alpha1, alpha2,
        math.exp(log_lambda1), math.exp(log_lambda2),
        _prob_from_log(log_same), _prob_from_log(log_P1), log_same, log_P1,
        m, union, log_union, tuple(flags))


R1_GRID = tuple(round(1 + 0.05 * k, 2) for k in range(1, 41))  # 1.05 .. 3.00
R2_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))  # 0.05 .. 0.95


def optimize_r(n: int, t: int, n0: int, p: float, epsilon: float, d0: float,
               m: int | None = None) -> ClusteringBoundReport:
    """Coarse grid search over ``(r1, r2)`` minimizing ``max(same, P1)``.

    The grid is scored in one vectorized pass with the formulas of
    :func:`clustering_bound`, which then reports the winning pair.
    """
    base = clustering_bound(n, t, n0, p, epsilon, d0, R1_GRID[0], R2_GRID[0])  # validates
    mu, h, w = 2 * p * (1 - p), base.h_star, (1 - epsilon) ** 2
    r1 = np.array(R1_GRID)[:, None]
    r2 = np.array(R2_GRID)[None, :]

    def kl(a, b):
        return special.rel_entr(a, b) + special.rel_entr(1 - a, 1 - b)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        alpha1 = np.where(r1 * w < 1, kl(np.minimum(r1 * w, 1.0), w), np.inf)
        alpha2 = kl(r2 * w, w)
        log_same = -n * np.minimum(r2 * w * bernoulli_kl(d0, mu), alpha2)
        log_f = math.log1p(-mu * h) - d0 * math.log1p(-h)
        log_rho = math.log1p(-(1 - mu) * h) - math.log1p(-mu * h)
        log_lambda1 = math.log(0.5) + np.log1p(np.exp(n0 * r2 * w * log_rho))
        log_lambda2 = math.log(0.5) + np.log1p(2.0 ** (-n0 * alpha2))
        terms = np.broadcast_arrays(n * r1 * w * log_f + t * log_lambda1,
                                    -alpha1 * n, t * log_lambda2)
        log_P1 = special.logsumexp(np.stack(terms), axis=0)
    key = np.maximum(log_same, log_P1)
    i, j = np.unravel_index(np.argmin(key), key.shape)
    return clustering_bound(n, t, n0, p, epsilon, d0, R1_GRID[i], R2_GRID[j], m)


def weighted_hoeffding(d0: float, mu: float, weights: Sequence[int]) -> float:
    """``exp(-2 (d0 - mu)^2 m^2 / sum(m_i^2))`` with ``m = sum(m_i)``.

    Tail bound for the weighted mean ``(1/m) sum m_i Z_i`` of i.i.d. ``[0, 1]``
    variables with mean ``mu`` crossing ``d0``.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0 or np.any(w <= 0):
        raise ValueError("weights must be a non-empty list of positive numbers")
    if d0 == mu:
        raise ValueError("d0 must differ from mu")
    total = w.sum()
    return math.exp(-2.0 * (d0 - mu) ** 2 * total**2 / np.sum(w * w))


# ---------------------------------------------------------------------------
# general alphabets


def chernoff_information(qa: np.ndarray, qb: np.ndarray) -> float:
    """``max_{0<=l<=1} -ln sum_y qa(y)^(1-l) qb(y)^l`` for two pmfs.

    Equals ``min {D(v||qa) : D(v||qb) <= D(v||qa)}``, the optimum being the
    tilted pmf ``v_l ∝ qa^(1-l) qb^l``.  Returns ``inf`` for disjoint supports.
    """
    qa = np.asarray(qa, dtype=np.float64)
    qb = np.asarray(qb, dtype=np.float64)
    if np.array_equal(qa, qb):
        return 0.0
    both = (qa > 0) & (qb > 0)
    if not both.any():
        return math.inf
    la, lb = np.log(qa[both]), np.log(qb[both])

    def log_mgf(lam: float) -> float:
        return float(special.logsumexp((1 - lam) * la + lam * lb))

    res = optimize.minimize_scalar(log_mgf, bounds=(0.0, 1.0), method="bounded",
                                   options={"xatol": 1e-12})
    value = min(res.fun, log_mgf(0.0), log_mgf(1.0))
    return max(0.0, -value)


@dataclass(frozen=True)
class GeneralChannelConstants:
    c1: float
    delta: float
    epsilon: float
    p1: float  # eps + (1 - eps) exp(-C1 + delta), capped at 1
    p2: float  # eps + (1 - eps) exp(-C1 - delta)
    threshold_p1: float | None  # ln(mn) / ln(1/p1): achievability side
    threshold_p2: float | None  # ln(mn) / ln(1/p2): converse side
    min_known_area: float  # ln(1/(2|A|)) / ln(eps/p2)
    worst_pair: tuple[int, int] | None
    degenerate: bool

    def with_dims(self, m: int, n: int) -> "GeneralChannelConstants":
        return replace(self, threshold_p1=threshold_area(m, n, self.p1),
                       threshold_p2=threshold_area(m, n, self.p2))


def chernoff_c1(spec: ChannelSpec, m: int | None = None, n: int | None = None,
                delta: float = 0.0) -> GeneralChannelConstants:
    """Worst-pair Chernoff exponent ``C1`` of the channel and the derived ``p1``, ``p2``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    q = spec.dmc
    k = q.shape[0]
    c1, worst = math.inf, None
    for a, b in itertools.combinations(range(k), 2):
        c = chernoff_information(q[a], q[b])
        if c < c1:
            c1, worst = c, (a, b)
    eps = spec.epsilon
    p1 = min(1.0, eps + (1 - eps) * math.exp(-c1 + delta))
    p2 = min(1.0, eps + (1 - eps) * math.exp(-c1 - delta))
    if eps == 0.0:
        min_area = 0.0
    elif p2 >= 1.0 or eps >= p2:
        min_area = math.inf
    else:
        min_area = math.log(1 / (2 * k)) / math.log(eps / p2)
    out = GeneralChannelConstants(c1, delta, eps, p1, p2, None, None, min_area,
                                  worst, c1 == 0.0)
    if m is not None and n is not None:
        out = out.with_dims(m, n)
    return out
