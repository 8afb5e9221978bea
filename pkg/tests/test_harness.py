import csv
import io
import json
import xml.etree.ElementTree as ET

import pytest

from cfchannel import bounds
from cfchannel.channel import bsc_spec
from cfchannel.harness import (CSV_COLUMNS, ConfigError, ExperimentConfig, ci3,
                               emit_outputs, figure1_curves, run_monte_carlo, run_trial,
                               simulate_row, sweep, to_csv, to_svg)

BASE = {"m": 60, "n": 60, "clusters": {"type": "uniform", "m0": 6, "n0": 6},
        "channel": {"type": "bsc", "p": 0.1, "epsilon": 0.3},
        "known_clustering": True, "trials": 50, "master_seed": 7}


def test_config_roundtrip_and_validation():
    cfg = ExperimentConfig.from_dict(BASE)
    assert (cfg.m0, cfg.n0, cfg.trials, cfg.known_clustering) == (6, 6, 50, True)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError, match="unknown"):
        ExperimentConfig.from_dict({**BASE, "tirals": 5})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**BASE, "clusters": {"type": "uniform", "m0": 7, "n0": 6}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**BASE, "channel": {"type": "bsc", "p": 2, "epsilon": 0}})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({**BASE, "trials": 0})
    explicit = {**BASE, "clusters": {"type": "explicit", "row_sizes": [10, 50],
                                     "col_sizes": [30, 30]}}
    cfg = ExperimentConfig.from_dict(explicit)
    assert cfg.row_sizes == (10, 50) and cfg.m0 is None


def test_trial_is_deterministic():
    cfg = ExperimentConfig.from_dict({**BASE, "known_clustering": False})
    assert run_trial(cfg, 3) == run_trial(cfg, 3)


def test_noiseless_trials_never_err():
    cfg = ExperimentConfig.uniform(40, 40, 4, 4, bsc_spec(0, 0), d0=0.05, trials=20)
    for k in range(20):
        r = run_trial(cfg, k)
        if r.merged_occurred:
            continue  # identical clusters are (correctly) merged and counted as errors
        assert not r.block_error
        assert not r.row_pair_errors.any and not r.col_pair_errors.any


def test_noiseless_known_clustering_never_errs():
    cfg = ExperimentConfig.uniform(40, 40, 4, 4, bsc_spec(0, 0), known_clustering=True)
    assert not any(run_trial(cfg, k).block_error for k in range(20))


def test_monte_carlo_single_trial_and_parallel_equivalence():
    cfg = ExperimentConfig.from_dict({**BASE, "trials": 1})
    agg = run_monte_carlo(cfg)
    assert agg.empirical_pe in (0.0, 1.0)
    cfg = ExperimentConfig.from_dict({**BASE, "trials": 40, "known_clustering": False,
                                      "channel": {"type": "bsc", "p": 0.25, "epsilon": 0.5}})
    assert run_monte_carlo(cfg, threads=1) == run_monte_carlo(cfg, threads=3)


def test_guardrail():
    cfg = ExperimentConfig.uniform(20000, 20000, 100, 100, bsc_spec(0.1, 0.1))
    with pytest.raises(ConfigError):
        run_trial(cfg, 0)


def test_ci3():
    assert ci3(0.0, 100) == 0.03 and ci3(1.0, 300) == 0.01
    assert ci3(0.5, 100) == pytest.approx(0.15)


def test_known_clustering_matches_exact_small():
    cfg = ExperimentConfig.from_dict({**BASE, "channel": {"type": "bsc", "p": 0.25,
                                                          "epsilon": 0.6}, "trials": 4000})
    agg = run_monte_carlo(cfg)
    exact = bounds.exact_fill_error(cfg.row_sizes, cfg.col_sizes, 0.25, 0.6)
    sigma = (exact * (1 - exact) / cfg.trials) ** 0.5
    assert abs(agg.empirical_pe - exact) <= 3 * sigma


@pytest.mark.slow
def test_below_threshold_known_clustering_fails():
    cfg = ExperimentConfig.uniform(1024, 1024, 2, 2, bsc_spec(0.25, 0.5),
                                   known_clustering=True, trials=100)
    assert run_monte_carlo(cfg).empirical_pe >= 0.95


def test_figure1_threshold_column_and_monotonicity():
    table = figure1_curves(n0_range=range(10, 151))
    assert len(table) == 141
    assert all(abs(r["threshold_area"] - 2048.6) <= 1 for r in table)
    lb = [r["fill_lb"] for r in table]
    ub = [r["fill_ub"] for r in table]
    assert all(b <= a for a, b in zip(lb, lb[1:]))
    assert all(b <= a for a, b in zip(ub, ub[1:]))


def test_figure1_around_threshold():
    """At n0 = 45 (area below threshold) fill_lower > 0.5; at n0 = 46 fill_upper < 0.5."""
    r45, r46 = figure1_curves(n0_range=[45, 46])
    assert r46["fill_ub"] < 0.5
    assert r45["fill_lb"] > 0.5, r45["fill_lb"]


def test_sweep_sizes_and_determinism():
    one = sweep({"base": BASE, "grid": {"p": [0.1]}})
    assert to_csv(one).count("\n") == 2
    grid = {"base": BASE, "grid": {"p": [0.1, 0.25], "epsilon": [0.5, 0.9]}}
    rows = sweep(grid)
    assert len(rows) == 4
    assert to_csv(rows) == to_csv(sweep(grid))
    header = to_csv(rows).splitlines()[0].split(",")
    assert tuple(header[:len(CSV_COLUMNS)]) == CSV_COLUMNS


def test_sweep_records_point_errors():
    rows = sweep({"base": BASE, "grid": {"m0": [6, 7]}})
    assert rows[0]["flags"] and not any(f.startswith("error:") for f in rows[0]["flags"])
    assert rows[1]["flags"][0].startswith("error:")
    with pytest.raises(ConfigError):
        sweep({"base": BASE, "grid": {"p": []}})
    with pytest.raises(ConfigError):
        sweep({"base": BASE, "grid": {"color": [1]}})


def test_csv_header_fixed():
    row = simulate_row(ExperimentConfig.from_dict({**BASE, "trials": 5}))
    text = to_csv([row, row, row])
    lines = text.splitlines()
    assert len(lines) == 4
    assert lines[0] == ",".join(CSV_COLUMNS)
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert parsed[0]["trials"] == "5" and parsed[0]["master_seed"] == "7"


def test_emit_outputs(tmp_path):
    table = figure1_curves(n0_range=range(20, 60, 5))
    assert emit_outputs(table, [], tmp_path / "none") == []
    assert not list(tmp_path.iterdir())
    paths = emit_outputs(table, ["csv", "svg"], tmp_path / "fig.v1")
    assert [p.name for p in paths] == ["fig.v1.csv", "fig.v1.svg"]
    ET.fromstring(paths[1].read_text())
    assert ET.fromstring(to_svg(table)).tag.endswith("svg")
    with pytest.raises(OSError):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        emit_outputs(table, ["csv"], blocker / "sub" / "out")


def test_config_file_loading(tmp_path):
    from cfchannel.harness import load_config
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(BASE))
    assert load_config(path) == ExperimentConfig.from_dict(BASE)


def test_impossible_observation_counts_as_block_error():
    # off-by-one noise has zero transitions; wrongly merged clusters can then
    # hold outputs that no single input symbol produces
    import numpy as np
    from cfchannel.channel import dmc_spec
    q = np.zeros((5, 5))
    for a in range(5):
        nbrs = [b for b in (a - 1, a + 1) if 0 <= b < 5]
        q[a, a] = 0.7
        q[a, nbrs] = 0.3 / len(nbrs)
    cfg = ExperimentConfig.uniform(240, 240, 24, 24, dmc_spec(q, 0.5), trials=5)
    results = [run_trial(cfg, k) for k in range(5)]
    failed = [r for r in results if r.decode_failed]
    assert failed and all(r.block_error and r.clustering_error for r in failed)
    assert run_monte_carlo(cfg).empirical_pe == 1.0
