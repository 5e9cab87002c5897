import json
import sys

import pytest

from compute_report import load_run
from config import DATASETS_DIR, DIAG_FILE, FRAMES_FILE, REPORT_FILE
from errors import ConfigRejected, EventCapExceeded, TimeStepTooLarge
from initial_data import load_initial_data, parse_initial_data
from run_simulation import (
    SimConfig,
    main,
    parse_nu_list,
    resolve_config,
    run,
    sample_times,
    sweep,
)
from validate_run import check_riemann_identities, validate_run_dir, validate_sweep

# short horizons keep the front count small: every time step reflects a wave off every front
SHORT = dict(nu=2, t_end=0.5, sample_dt=0.125)


@pytest.fixture(scope="module")
def two_shock_run(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("two_shock")
    data = load_initial_data(DATASETS_DIR / "two_shock.json")
    report = run(SimConfig(**SHORT), data, out_dir)
    return report, out_dir


def test_resolve_config_defaults(dataset):
    resolved = resolve_config(SimConfig(nu=4), dataset("two_shock"))
    assert resolved.dt == 0.03125
    assert resolved.eta == 0.0625
    assert resolved.xi == pytest.approx(resolved.constants.xi_max)
    assert resolved.probes == (0.25, 0.5, 0.75)
    assert resolved.probe_names == ["y1", "y2", "y3"]


def test_resolve_config_constant_data_falls_back(dataset):
    resolved = resolve_config(SimConfig(nu=2), dataset("constant"))
    assert resolved.xi == pytest.approx(2 ** 0.5)
    assert resolved.xi_v == pytest.approx(2 ** 0.5)


@pytest.mark.parametrize("config, error", [
    (SimConfig(dt=1.0), TimeStepTooLarge),
    (SimConfig(nu=2, eta=1e-6), ConfigRejected),
    (SimConfig(xi=1e6), ConfigRejected),
    (SimConfig(xi=0.5), ConfigRejected),
    (SimConfig(probes=(1.5,)), ConfigRejected),
    (SimConfig(sample_dt=0.0), ConfigRejected),
    (SimConfig(rarefaction_policy="ignore"), ConfigRejected),
])
def test_resolve_config_rejects(dataset, config, error):
    with pytest.raises(error):
        resolve_config(config, dataset("two_shock"))


def test_parse_nu_list():
    assert parse_nu_list("4..7") == [4, 5, 6, 7]
    assert parse_nu_list("4,6") == [4, 6]
    with pytest.raises(ConfigRejected):
        parse_nu_list("four")


def test_sample_times():
    assert sample_times(1.0, 0.3) == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])
    assert sample_times(1.0, 0.5) == [0.0, 0.5, 1.0]
    assert sample_times(0.0, 0.5) == [0.0]


def test_constant_data_is_stationary(dataset, tmp_path):
    report = run(SimConfig(nu=2, t_end=100.0, sample_dt=1.0), dataset("constant"), tmp_path)
    assert report.status == "ok"
    assert report.events_processed == 0
    assert report.final["n_fronts"] == 0
    df, frames, meta = load_run(tmp_path)
    assert len(frames) == 101
    assert all(f["a"] == 0.0 and f["b"] == 0.5 for f in frames)
    assert (df["n_fronts"] == 0).all()
    assert all(r.passed for r in validate_run_dir(tmp_path))


def test_two_shock_run_files(two_shock_run):
    report, out_dir = two_shock_run
    assert report.status == "ok"
    assert report.steps == 4
    assert report.violations == 0
    assert report.mass_error_max <= 1e-12
    assert report.momentum_recursion_error_max <= 1e-12
    for name in (DIAG_FILE, FRAMES_FILE, REPORT_FILE):
        assert (out_dir / name).is_file()

    df, frames, meta = load_run(out_dir)
    assert meta["status"] == "ok"
    assert list(df["event"].iloc[:2]) == ["initial", "sample"]
    assert set(df["event"]) >= {"initial", "sample", "pre_step", "step", "exit"}
    assert [f["t"] for f in frames] == pytest.approx([0.0, 0.125, 0.25, 0.375, 0.5])
    with open(out_dir / REPORT_FILE) as f:
        assert json.load(f)["status"] == "ok"


def test_two_shock_run_validates(two_shock_run):
    _, out_dir = two_shock_run
    results = validate_run_dir(out_dir)
    failed = [r.message for r in results if not r.passed]
    assert failed == []


def test_runs_are_deterministic(dataset, tmp_path):
    config = SimConfig(**SHORT)
    run(config, dataset("two_shock"), tmp_path / "a")
    run(config, dataset("two_shock"), tmp_path / "b")
    for name in (DIAG_FILE, FRAMES_FILE):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_event_cap_flushes_partial_output(dataset, tmp_path):
    with pytest.raises(EventCapExceeded):
        run(SimConfig(event_cap=1, **SHORT), dataset("two_shock"), tmp_path)
    df, frames, meta = load_run(tmp_path)
    assert meta["status"] == "EventCapExceeded"
    assert meta["events_processed"] == 1
    assert not df.empty and frames


def test_deshift_restores_translation(tmp_path):
    data = parse_initial_data({"a0": 0.0, "b0": 1.0, "cells": [{"len": 1.0, "rho": 1.0, "v": 2.0}]})
    run(SimConfig(nu=2, t_end=1.0, sample_dt=0.5, deshift=True), data, tmp_path)
    _, frames, meta = load_run(tmp_path)
    assert meta["v_bar"] == 2.0
    for f in frames:
        assert f["a"] == pytest.approx(2.0 * f["t"])
        assert f["b"] - f["a"] == pytest.approx(1.0)
        assert f["v"] == [2.0]


def test_small_sweep(dataset, tmp_path):
    aggregate = sweep(SimConfig(t_end=0.5, sample_dt=0.25), dataset("two_shock"), [1, 2], tmp_path, workers=1)
    assert aggregate["nu"] == [1, 2]
    assert aggregate["statuses"] == ["ok", "ok"]
    assert aggregate["dt"] == [0.25, 0.125]
    assert len(aggregate["l1_distances"]) == 1
    assert aggregate["l1_distances"][0]["shared_times"] == 3
    assert (tmp_path / "sweep.json").is_file()
    per_nu = [r for r in validate_sweep(tmp_path) if r.message.startswith("nu=")]
    assert per_nu and all(r.passed for r in per_nu)


def test_sweep_needs_two_values(dataset, tmp_path):
    with pytest.raises(ConfigRejected):
        sweep(SimConfig(), dataset("two_shock"), [3], tmp_path)


def test_riemann_identity_check():
    assert check_riemann_identities(200, seed=3).passed


def _run_main(monkeypatch, *args):
    monkeypatch.setattr(sys, "argv", ["run_simulation.py", *args])
    with pytest.raises(SystemExit) as e:
        main()
    return e.value.code


def test_cli_exit_codes(monkeypatch, tmp_path):
    two_shock = str(DATASETS_DIR / "two_shock.json")
    out = str(tmp_path / "cli")
    assert _run_main(monkeypatch, "--data", str(tmp_path / "missing.json"), "--out-dir", out) == 2
    assert _run_main(monkeypatch, "--data", two_shock, "--dt", "1.0", "--out-dir", out) == 2
    assert _run_main(
        monkeypatch, "--data", two_shock, "--nu", "2", "--t-end", "0.5", "--event-cap", "1", "--out-dir", out
    ) == 3
    assert _run_main(
        monkeypatch, "--data", two_shock, "--nu", "2", "--t-end", "0.5", "--sample-dt", "0.25", "--out-dir", out
    ) == 0


# wave_floor 1e-11 drops the high-generation debris without tripping the 1e-10 identity checks
@pytest.mark.parametrize("name, nu, t_end", [
    ("two_shock", 4, 0.25),
    ("shock_rarefaction", 4, 0.25),
    ("random_bv8", 4, 0.125),
    ("two_shock", 5, 0.125),
    ("shock_rarefaction", 6, 0.03125),
    ("two_shock", 7, 0.015625),
])
def test_fine_grid_runs_pass_checks(dataset, tmp_path, name, nu, t_end):
    config = SimConfig(nu=nu, t_end=t_end, sample_dt=t_end / 4, wave_floor=1e-11)
    report = run(config, dataset(name), tmp_path)
    assert report.status == "ok"
    assert report.violations == 0
    assert report.steps == round(t_end / report.dt)
    assert report.mass_error_max <= 1e-12
    failed = [r.message for r in validate_run_dir(tmp_path) if not r.passed]
    assert failed == []


def test_rh_residual_is_first_order_in_eta(dataset, tmp_path):
    # the t = 0 frame already carries the split rarefaction fan
    aggregate = sweep(SimConfig(t_end=0.0), dataset("shock_rarefaction"), [4, 5, 6, 7, 8], tmp_path, workers=1)
    assert aggregate["statuses"] == ["ok"] * 5
    assert all(r > 0.0 for r in aggregate["rh_residual_max"])
    assert 0.7 <= aggregate["rh_slope"] <= 1.3


def test_two_shock_momentum_tail(dataset, tmp_path):
    report = run(SimConfig(nu=1, t_end=5.5, sample_dt=0.25, wave_floor=1e-11), dataset("two_shock"), tmp_path)
    assert report.status == "ok"
    assert report.momentum_tail_start == 5.0
    assert report.sup_momentum_tail is not None
    assert report.sup_momentum_tail <= 10.0 * report.eta
    assert report.momentum_recursion_error_max <= 1e-12


@pytest.mark.slow
def test_flocking_decay(dataset, tmp_path):
    config = SimConfig(nu=2, t_end=2.0, sample_dt=0.05, k_max=8, wave_floor=1e-11, check_flocking=True)
    report = run(config, dataset("flocking"), tmp_path)
    assert report.status == "ok"
    assert report.condition_holds
    assert report.T1 < 0.6
    assert report.lambda_hat is not None
    assert report.lambda_hat >= 0.5 * report.lambda_theory
    failed = [r.message for r in validate_run_dir(tmp_path) if not r.passed]
    assert failed == []
