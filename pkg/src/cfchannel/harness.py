"""Experiment configuration, Monte Carlo trials, sweeps and figure tables."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import bounds
from .channel import ChannelSpec, bsc_spec, channel_from_config, channel_stats, transmit
from .clustering import PairwiseErrorCount, cluster_axis, default_threshold, pairwise_errors
from .decode import ImpossibleObservationError, Mode, block_error, decode, default_mode
from .model import Partition, generate_instance, has_identical_clusters
from .rng import derive_seed

CSV_COLUMNS = ("n0", "m0", "area", "threshold_area", "fill_lb", "fill_ub",
               "clust_same_ub", "clust_diff_P1", "emp_pe", "emp_pe_ci3",
               "emp_prc", "emp_prc_ci3", "trials", "master_seed", "flags")
SWEEP_EXTRA_COLUMNS = ("m", "n", "p", "epsilon", "d0")

MAX_SIM_ENTRIES = 10**8

# sub-stream indices under a trial seed
_GEN, _CHAN, _DEC = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    m: int
    n: int
    row_sizes: tuple[int, ...]
    col_sizes: tuple[int, ...]
    channel: ChannelSpec
    alphabet_size: int = 2
    d0: float | None = None
    decode_mode: Mode | None = None
    known_clustering: bool = False
    trials: int = 1
    master_seed: int = 0
    r1: float = 1.5
    r2: float = 0.5
    output_path: str | None = None
    allow_large: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if sum(self.row_sizes) != self.m or sum(self.col_sizes) != self.n:
            raise ConfigError("cluster sizes do not add up to the matrix dimensions")
        if min(self.row_sizes + self.col_sizes) < 1:
            raise ConfigError("cluster sizes must be positive")
        if self.channel.alphabet_size != self.alphabet_size:
            raise ConfigError("channel alphabet does not match alphabet_size")
        if self.decode_mode not in (None, "majority", "ml"):
            raise ConfigError(f"unknown decode_mode {self.decode_mode!r}")
        if self.decode_mode == "majority" and self.alphabet_size != 2:
            raise ConfigError("majority decoding needs a binary alphabet")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")

    @classmethod
    def uniform(cls, m: int, n: int, m0: int, n0: int, channel: ChannelSpec,
                **kw) -> "ExperimentConfig":
        if m % m0 or n % n0:
            raise ConfigError("cluster sizes must divide the dimensions")
        return cls(m, n, (m0,) * (m // m0), (n0,) * (n // n0), channel,
                   alphabet_size=channel.alphabet_size, **kw)

    @property
    def m0(self) -> int | None:
        return self.row_sizes[0] if len(set(self.row_sizes)) == 1 else None

    @property
    def n0(self) -> int | None:
        return self.col_sizes[0] if len(set(self.col_sizes)) == 1 else None

    @property
    def mode(self) -> Mode:
        return self.decode_mode or default_mode(self.alphabet_size)

    def threshold(self) -> float:
        return self.d0 if self.d0 is not None else default_threshold(channel_stats(self.channel))

    def to_dict(self) -> dict:
        d = {"m": self.m, "n": self.n}
        if self.m0 and self.n0:
            d["clusters"] = {"type": "uniform", "m0": self.m0, "n0": self.n0}
        else:
            d["clusters"] = {"type": "explicit", "row_sizes": list(self.row_sizes),
                             "col_sizes": list(self.col_sizes)}
        d.update(alphabet_size=self.alphabet_size, channel=self.channel.to_config(),
                 d0=self.d0, decode_mode=self.decode_mode,
                 known_clustering=self.known_clustering, trials=self.trials,
                 master_seed=self.master_seed, r1=self.r1, r2=self.r2,
                 output_path=self.output_path, allow_large=self.allow_large)
        return d

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ExperimentConfig":
        """Parse a config document; unknown keys are rejected."""
        allowed = {"m", "n", "clusters", "alphabet_size", "channel", "d0", "decode_mode",
                   "known_clustering", "trials", "master_seed", "r1", "r2",
                   "output_path", "allow_large"}
        unknown = set(raw) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("m", "n", "clusters", "channel"):
            if key not in raw:
                raise ConfigError(f"missing config key {key!r}")
        m, n = int(raw["m"]), int(raw["n"])
        clusters = dict(raw["clusters"])
        kind = clusters.pop("type", "uniform")
        if kind == "uniform":
            if set(clusters) != {"m0", "n0"}:
                raise ConfigError("uniform clusters need exactly m0 and n0")
            m0, n0 = int(clusters["m0"]), int(clusters["n0"])
            if m0 < 1 or n0 < 1 or m % m0 or n % n0:
                raise ConfigError("m0 and n0 must divide m and n")
            rows, cols = (m0,) * (m // m0), (n0,) * (n // n0)
        elif kind == "explicit":
            if set(clusters) != {"row_sizes", "col_sizes"}:
                raise ConfigError("explicit clusters need exactly row_sizes and col_sizes")
            rows = tuple(int(s) for s in clusters["row_sizes"])
            cols = tuple(int(s) for s in clusters["col_sizes"])
        else:
            raise ConfigError(f"unknown clusters type {kind!r}")
        try:
            channel = channel_from_config(raw["channel"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        opt = {k: raw[k] for k in ("d0", "decode_mode", "output_path") if raw.get(k) is not None}
        for k, conv in (("alphabet_size", int), ("known_clustering", bool), ("trials", int),
                        ("master_seed", int), ("r1", float), ("r2", float),
                        ("allow_large", bool)):
            if k in raw:
                opt[k] = conv(raw[k])
        if "d0" in opt:
            opt["d0"] = float(opt["d0"])
        opt.setdefault("alphabet_size", channel.alphabet_size)
        return cls(m, n, rows, cols, channel, **opt)


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Seed of trial ``trial_index`` (SplitMix64 mix, injective in either argument)."""
    return derive_seed(master_seed, trial_index)


@dataclass(frozen=True)
class TrialResult:
    block_error: bool
    row_pair_errors: PairwiseErrorCount | None  # None under known clustering
    col_pair_errors: PairwiseErrorCount | None
    merged_occurred: bool
    seed: int
    decode_failed: bool = False  # estimated clusters mixed incompatible observations

    @property
    def clustering_error(self) -> bool:
        return any(e is not None and e.any for e in (self.row_pair_errors, self.col_pair_errors))


@lru_cache(maxsize=32)
def _partitions(row_sizes: tuple[int, ...], col_sizes: tuple[int, ...]):
    return Partition.from_sizes(row_sizes), Partition.from_sizes(col_sizes)


def _check_scale(config: ExperimentConfig) -> None:
    if config.m * config.n > MAX_SIM_ENTRIES and not config.allow_large:
        raise ConfigError(f"m*n = {config.m * config.n} exceeds {MAX_SIM_ENTRIES}; "
                          "set allow_large to simulate anyway")


def run_trial(config: ExperimentConfig, trial_index: int) -> TrialResult:
    """generate -> transmit -> cluster (or use the truth) -> decode -> compare."""
    _check_scale(config)
    rows, cols = _partitions(config.row_sizes, config.col_sizes)
    seed = derive_trial_seed(config.master_seed, trial_index)
    inst = generate_instance(rows, cols, config.alphabet_size, derive_seed(seed, _GEN))
    obs = transmit(inst, config.channel, derive_seed(seed, _CHAN))
    row_err = col_err = None
    if config.known_clustering:
        rp, cp = rows, cols
    else:
        d0 = config.threshold()
        row_est = cluster_axis(obs, d0, "rows")
        col_est = cluster_axis(obs, d0, "columns")
        rp, cp = row_est.partition, col_est.partition
        row_err = pairwise_errors(row_est, rows)
        col_err = pairwise_errors(col_est, cols)
    merged = has_identical_clusters(inst)
    try:
        decoded = decode(obs, rp, cp, config.channel, config.mode, derive_seed(seed, _DEC))
    except ImpossibleObservationError:
        if config.known_clustering:
            raise  # cannot happen with the true clusters
        # a wrongly merged block can hold outputs no single input produces
        return TrialResult(True, row_err, col_err, merged, seed, decode_failed=True)
    return TrialResult(block_error(decoded, inst), row_err, col_err, merged, seed)


@dataclass(frozen=True)
class AggregateResult:
    trials: int
    block_errors: int
    clustering_errors: int | None
    merges: int
    empirical_pe: float
    pe_ci3: float
    empirical_prc: float | None
    prc_ci3: float | None
    wall_time: float = field(compare=False, default=0.0)


def ci3(rate: float, trials: int) -> float:
    """Normal-approximation 3-sigma half-width; ``3/trials`` at rates 0 and 1."""
    if rate in (0.0, 1.0):
        return 3.0 / trials
    return 3.0 * math.sqrt(rate * (1.0 - rate) / trials)


def _count_range(config: ExperimentConfig, start: int, stop: int) -> tuple[int, int, int]:
    pe = prc = merges = 0
    for k in range(start, stop):
        res = run_trial(config, k)
        pe += res.block_error
        prc += res.clustering_error
        merges += res.merged_occurred
    return pe, prc, merges


def run_monte_carlo(config: ExperimentConfig, threads: int = 1) -> AggregateResult:
    """Aggregate trials ``0..trials-1``; counts are order-independent sums."""
    _check_scale(config)
    start = time.perf_counter()
    total = config.trials
    if threads <= 1 or total < 2:
        sums = [_count_range(config, 0, total)]
    else:
        chunks = min(total, threads * 4)
        edges = np.linspace(0, total, chunks + 1).astype(int)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(_count_range, config, int(a), int(b))
                    for a, b in zip(edges[:-1], edges[1:]) if b > a]
            sums = [f.result() for f in futs]
    pe, prc, merges = (sum(s[i] for s in sums) for i in range(3))
    rate_pe = pe / total
    rate_prc = None if config.known_clustering else prc / total
    return AggregateResult(
        total, pe, None if config.known_clustering else prc, merges,
        rate_pe, ci3(rate_pe, total),
        rate_prc, None if rate_prc is None else ci3(rate_prc, total),
        time.perf_counter() - start)


# ---------------------------------------------------------------------------
# tables


def _bounds_row(config: ExperimentConfig, optimize_r: bool = False) -> dict:
    """Analytic columns of the CSV schema for one configuration."""
    row: dict[str, Any] = {c: None for c in CSV_COLUMNS}
    flags: list[str] = []
    s_low = min(config.row_sizes) * min(config.col_sizes)
    s_star = max(config.row_sizes) * max(config.col_sizes)
    row.update(n0=config.n0, m0=config.m0, area=s_low)
    spec = config.channel
    if spec.is_bsc() and spec.crossover < 0.5 and spec.epsilon < 1:
        p, eps = spec.crossover, spec.epsilon
        rep = bounds.binary_report(p, eps, config.m, config.n, s_low, s_star)
        row.update(threshold_area=rep.threshold_area, fill_lb=rep.fill_lower,
                   fill_ub=rep.fill_upper)
        flags.extend(rep.flags)
        if config.n0 is None:
            flags.append("clust_nonuniform")
        else:
            try:
                d0 = config.threshold()
                fn = bounds.optimize_r if optimize_r else bounds.clustering_bound
                kw = {} if optimize_r else {"r1": config.r1, "r2": config.r2}
                cb = fn(config.n, len(config.col_sizes), config.n0, p, eps, d0,
                        m=config.m, **kw)
                row.update(clust_same_ub=cb.same_cluster_bound, clust_diff_P1=cb.P1)
                flags.extend(cb.flags)
            except ValueError as exc:
                flags.append(f"clust_bound_na:{exc}")
    else:
        consts = bounds.chernoff_c1(spec, config.m, config.n)
        row["threshold_area"] = consts.threshold_p1
        flags.append("non_binary_bounds")
    row["flags"] = flags
    return row


def simulate_row(config: ExperimentConfig, threads: int = 1,
                 optimize_r: bool = False) -> dict:
    row = _bounds_row(config, optimize_r)
    agg = run_monte_carlo(config, threads)
    row.update(emp_pe=agg.empirical_pe, emp_pe_ci3=agg.pe_ci3, emp_prc=agg.empirical_prc,
               emp_prc_ci3=agg.prc_ci3, trials=agg.trials, master_seed=config.master_seed)
    if config.known_clustering:
        row["flags"].append("known_clustering")
    return row


def figure1_curves(m: int = 10**6, n: int = 10**6, p: float = 0.25, epsilon: float = 0.9,
                   d0: float | None = None, r1: float = 1.5, r2: float = 0.5,
                   n0_range: Iterable[int] = range(10, 151), optimize_r: bool = False
                   ) -> list[dict]:
    """Analytic curves over uniform square clusters ``m0 = n0``.

    Per ``n0``: fill-error bounds at area ``n0^2``, the row-clustering bounds
    with ``t = n / n0`` column clusters, and the area threshold.  ``t`` is
    kept fractional when ``n0`` does not divide ``n``.  Rows also carry
    ``log10_*`` entries (not part of the CSV schema) for plotting.
    """
    if d0 is None:
        d0 = default_threshold(channel_stats(bsc_spec(p, epsilon)))
    out = []
    for n0 in n0_range:
        area = n0 * n0
        rep = bounds.binary_report(p, epsilon, m, n, area, area)
        row: dict[str, Any] = {c: None for c in CSV_COLUMNS}
        flags = list(rep.flags)
        row.update(n0=n0, m0=n0, area=area, threshold_area=rep.threshold_area,
                   fill_lb=rep.fill_lower, fill_ub=rep.fill_upper, trials=0)
        row["log10_fill_lb"] = rep.log_fill_lower / math.log(10)
        row["log10_fill_ub"] = (None if rep.log_fill_upper is None
                                else rep.log_fill_upper / math.log(10))
        try:
            if optimize_r:
                cb = bounds.optimize_r(n, n / n0, n0, p, epsilon, d0, m=m)
            else:
                cb = bounds.clustering_bound(n, n / n0, n0, p, epsilon, d0, r1, r2, m=m)
            row.update(clust_same_ub=cb.same_cluster_bound, clust_diff_P1=cb.P1)
            row["clust_union"] = cb.union_bound
            row["log10_clust_union"] = min(cb.log_union_bound, 0.0) / math.log(10)
            row["r1"], row["r2"] = cb.r1, cb.r2
            flags.extend(cb.flags)
        except ValueError as exc:
            flags.append(f"clust_bound_na:{exc}")
        row["flags"] = flags
        out.append(row)
    return out


GRID_KEYS = {"p", "epsilon", "m", "n", "m0", "n0", "d0", "trials", "known_clustering",
             "master_seed"}


def _apply_point(base: Mapping[str, Any], point: Mapping[str, Any]) -> ExperimentConfig:
    raw = json.loads(json.dumps(base))
    for key, value in point.items():
        if key in ("p", "epsilon"):
            if raw["channel"].get("type") != "bsc" and key == "p":
                raise ConfigError("grid key 'p' needs a bsc channel")
            raw["channel"][key] = value
        elif key in ("m0", "n0"):
            raw["clusters"] = {"type": "uniform", **{k: v for k, v in raw["clusters"].items()
                                                     if k in ("m0", "n0")}, key: value}
        else:
            raw[key] = value
    return ExperimentConfig.from_dict(raw)


def sweep(grid: Mapping[str, Any], threads: int = 1) -> list[dict]:
    """One row per point of ``grid["grid"]`` (cartesian product) applied to ``grid["base"]``.

    A failing point is recorded with an ``error:`` flag and the sweep goes on.
    Empirical columns are filled when the point's ``trials`` is positive.
    """
    unknown = set(grid) - {"base", "grid", "optimize_r"}
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    base, axes = grid["base"], grid.get("grid", {})
    bad = set(axes) - GRID_KEYS
    if bad:
        raise ConfigError(f"unsupported grid keys: {sorted(bad)}")
    names = list(axes)
    points = [dict(zip(names, combo)) for combo in itertools.product(*(axes[k] for k in names))]
    if not points:
        raise ConfigError("empty sweep grid")
    rows = []
    for point in points:
        merged = {**{k: base.get(k) for k in ("m", "n", "d0")}, **point}
        extra = {"m": merged.get("m"), "n": merged.get("n"),
                 "p": point.get("p", base["channel"].get("p")),
                 "epsilon": point.get("epsilon", base["channel"].get("epsilon")),
                 "d0": merged.get("d0")}
        try:
            trials = int(point.get("trials", base.get("trials", 0)))
            cfg = _apply_point({**base, "trials": max(trials, 1)}, point)
            extra["d0"] = cfg.threshold()
            if trials > 0:
                row = simulate_row(cfg, threads, grid.get("optimize_r", False))
            else:
                row = _bounds_row(cfg, grid.get("optimize_r", False))
                row.update(trials=0, master_seed=cfg.master_seed)
        except Exception as exc:  # per-point failures are data, not fatal
            row = {c: None for c in CSV_COLUMNS}
            row["flags"] = [f"error:{type(exc).__name__}:{exc}"]
        row.update(extra)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# output


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_csv(table: Sequence[Mapping[str, Any]]) -> str:
    columns = list(CSV_COLUMNS)
    if table and all(k in table[0] for k in SWEEP_EXTRA_COLUMNS):
        columns += SWEEP_EXTRA_COLUMNS
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in table:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def to_svg(table: Sequence[Mapping[str, Any]], width: int = 720, height: int = 440) -> str:
    """Line chart of log10 probabilities against n0 with the threshold side marked."""
    from .svgplot import line_chart

    xs = [row["n0"] for row in table]
    series = []
    for key, label, color in (("log10_fill_lb", "fill error lower bound", "#1f77b4"),
                              ("log10_fill_ub", "fill error upper bound", "#d62728"),
                              ("log10_clust_union", "clustering error bound", "#2ca02c")):
        ys = [row.get(key) for row in table]
        if any(y is not None for y in ys):
            series.append((label, color, ys))
    thr = table[0].get("threshold_area") if table else None
    vline = math.sqrt(thr) if thr and math.isfinite(thr) else None
    return line_chart(xs, series, vline=vline, vline_label="threshold",
                      xlabel="n0 (m0 = n0)", ylabel="log10 probability",
                      width=width, height=height)


def emit_outputs(table: Sequence[Mapping[str, Any]], formats: Iterable[str],
                 out: str | Path) -> list[Path]:
    """Write ``<out>.csv`` and/or ``<out>.svg``; returns the paths written."""
    formats = [f for f in formats if f]
    if not formats:
        return []
    if not table:
        raise ValueError("empty table")
    out = Path(out)
    stem = out.with_suffix("") if out.suffix in (".csv", ".svg") else out
    written = []
    for fmt in formats:
        if fmt == "csv":
            text = to_csv(table)
        elif fmt == "svg":
            text = to_svg(table)
        else:
            raise ValueError(f"unknown output format {fmt!r}")
        path = stem.with_name(f"{stem.name}.{fmt}")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    return written
