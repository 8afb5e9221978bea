"""Independent reference computations used to freeze expected values.

These deliberately avoid the package's own numerics: brute-force
enumeration, dense grids and arbitrary-precision arithmetic.
"""

from __future__ import annotations

import itertools

import mpmath
import numpy as np


def kl_mp(a, b, dps=50) -> float:
    """Bernoulli KL divergence in arbitrary precision."""
    with mpmath.workdps(dps):
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        out = mpmath.mpf(0)
        if a > 0:
            out += a * mpmath.log(a / b)
        if a < 1:
            out += (1 - a) * mpmath.log((1 - a) / (1 - b))
        return float(out)


def cluster_error_enum(area: int, p: float, eps: float) -> float:
    """Majority-decoder error for one cluster by enumerating all 3^area outcomes.

    Each entry is erased, received correctly or flipped; ties (including no
    samples) are a fair coin.
    """
    probs = {"e": eps, "c": (1 - eps) * (1 - p), "f": (1 - eps) * p}
    err = 0.0
    for pattern in itertools.product("ecf", repeat=area):
        w = 1.0
        for x in pattern:
            w *= probs[x]
        good, bad = pattern.count("c"), pattern.count("f")
        if bad > good:
            err += w
        elif bad == good:
            err += 0.5 * w
    return err


def fill_error_enum(row_sizes, col_sizes, p: float, eps: float) -> float:
    ok = 1.0
    for a in row_sizes:
        for b in col_sizes:
            ok *= 1.0 - cluster_error_enum(a * b, p, eps)
    return 1.0 - ok


def pair_stats_loop(y, i, j, erased=-1):
    n_common = mism = 0
    for a, b in zip(y[i], y[j]):
        if a != erased and b != erased:
            n_common += 1
            mism += a != b
    return n_common, (mism / n_common if n_common else None)


def mu_loop(q):
    k = len(q)
    return [[sum(q[a][y] * q[b][z] for y in range(k) for z in range(k) if y != z)
             for b in range(k)] for a in range(k)]


def _rel(v, q):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(v > 0, v * np.log(v / q), 0.0)
    return t.sum(axis=-1)


def _grid_min(qa, qb, x0, x1, y0, y1, step):
    xs = np.arange(x0, x1 + step / 2, step)
    ys = np.arange(y0, y1 + step / 2, step)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = 1.0 - X - Y
    ok = (X >= -1e-15) & (Y >= -1e-15) & (Z >= -1e-15)
    v = np.stack([np.clip(X, 0, 1), np.clip(Y, 0, 1), np.clip(Z, 0, 1)], axis=-1)[ok]
    da, db = _rel(v, qa), _rel(v, qb)
    feas = db <= da
    if not feas.any():
        return np.inf, None
    k = np.argmin(np.where(feas, da, np.inf))
    return da[k], v[k]


_COARSE: dict = {}


def _coarse(step):
    if step not in _COARSE:
        n = int(round(1 / step))
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = i + j <= n
        v = np.stack([i[keep], j[keep], n - i[keep] - j[keep]], axis=-1) / n
        with np.errstate(divide="ignore", invalid="ignore"):
            neg_h = np.where(v > 0, v * np.log(v), 0.0).sum(axis=-1)
        _COARSE[step] = (v, neg_h)
    return _COARSE[step]


def _coarse_min(qa, qb, step):
    v, neg_h = _coarse(step)
    da = neg_h - v @ np.log(qa)
    db = neg_h - v @ np.log(qb)
    obj = np.where(db <= da, da, np.inf)
    k = int(np.argmin(obj))
    return (obj[k], v[k]) if np.isfinite(obj[k]) else (np.inf, None)


def chernoff_grid(qa, qb, step=1e-3, levels=8, points=200, shrink=3.0) -> float:
    """min D(v||qa) over {v : D(v||qb) <= D(v||qa)} by dense simplex grids.

    A coarse grid with spacing ``step`` is followed by ``levels`` local grids
    of ``points`` x ``points`` centred on the incumbent, the window shrinking
    by ``shrink`` each time.  The first window is wide (0.1) because the
    minimizer lies on the straight line D(v||qa) = D(v||qb), along which the
    coarse incumbent can sit well away from the optimum.  The feasible set is
    convex and so is the objective, so there is a single basin.
    """
    qa, qb = np.asarray(qa, float), np.asarray(qb, float)
    if (qa > 0).all() and (qb > 0).all():
        best, v = _coarse_min(qa, qb, step)
    else:
        best, v = _grid_min(qa, qb, 0, 1, 0, 1, step)
    half = 0.1
    for _ in range(levels):
        if v is None:
            break
        val, w = _grid_min(qa, qb, v[0] - half, v[0] + half, v[1] - half, v[1] + half,
                           2 * half / points)
        if val < best:
            best, v = val, w
        half /= shrink
    return float(best)


def c1_grid(q) -> float:
    q = np.asarray(q, float)
    k = len(q)
    return min(chernoff_grid(q[a], q[b]) for a in range(k) for b in range(k) if a != b)
