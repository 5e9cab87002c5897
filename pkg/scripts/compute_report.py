#!/usr/bin/env python3
"""
Summarize a run directory into report.json.

Everything in the report comes from diag.csv (rows plus the "# meta:" header
line) and frames.jsonl, so a report can be rebuilt offline at any time.

Usage:
    python compute_report.py data/runs/two_shock_nu5
    python compute_report.py data/runs/flocking_nu5 --print
"""
import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from config import DIAG_FILE, FRAMES_FILE, REPORT_FILE
from errors import AllZeroOscillation, InsufficientData, SchemaError
from functionals import fit_decay

META_PREFIX = "# meta: "
FINAL_FIELDS = ("L", "L_in", "L_0out", "L_Mout", "L_xi", "V")
# empty on interaction and exit rows; taken from the last scanned row
FINAL_SCANNED_FIELDS = ("osc_v", "tv_v", "momentum")


class NumpyEncoder(json.JSONEncoder):
    """numpy scalars (pandas reductions, argmax indices) as plain JSON numbers."""
    def default(self, obj):
        if isinstance(obj, (np.integer, np.floating)):
            return obj.item()
        return super().default(obj)


@dataclass
class RunReport:
    status: str
    name: str
    nu: int
    dt: float
    eta: float
    xi: float
    xi_v: float
    t_final: float
    final: Dict[str, float]
    events: Dict[str, int]
    events_processed: int
    n_perturbations: int
    steps: int
    q: float
    T1: float
    condition_holds: bool
    lambda_theory: Optional[float]
    decay_C: Optional[float]
    lambda_hat: Optional[float]
    decay_t0: float
    decay_note: str
    mass_error_max: float
    momentum_recursion_error_max: float
    sup_momentum_tail: Optional[float]
    momentum_tail_start: float
    rh_residual_max: float
    rh_residual_mean: float
    support_length_max: float
    support_bound: float
    v_sup: float
    violations: int
    wall_time: Optional[float] = None
    notes: List[str] = field(default_factory=list)


# =============================================================================
# Reading run files
# =============================================================================

def read_diag(path: Path) -> tuple:
    """(DataFrame, meta dict) from a diag.csv."""
    meta = None
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            if line.startswith(META_PREFIX):
                meta = json.loads(line[len(META_PREFIX):])
    if meta is None:
        raise SchemaError(f"{path}: no '{META_PREFIX.strip()}' header line")
    df = pd.read_csv(path, comment="#")
    return df, meta


def read_frames(path: Path) -> list:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def load_run(run_dir: Path) -> tuple:
    run_dir = Path(run_dir)
    df, meta = read_diag(run_dir / DIAG_FILE)
    frames = read_frames(run_dir / FRAMES_FILE)
    return df, frames, meta


# =============================================================================
# Report
# =============================================================================

def momentum_recursion_errors(df: pd.DataFrame, M: float, dt: float) -> np.ndarray:
    """|momentum(t^n+) - (1 - M dt) momentum(t^n-)| for every time step."""
    before = df.loc[df["event"] == "pre_step", "momentum"].to_numpy()
    after = df.loc[df["event"] == "step", "momentum"].to_numpy()
    n = min(len(before), len(after))
    return np.abs(after[:n] - (1.0 - M * dt) * before[:n])


def build_report(df: pd.DataFrame, frames: list, meta: Dict[str, Any], wall_time: Optional[float] = None) -> RunReport:
    constants = meta["constants"]
    M, dt = meta["M"], meta["dt"]
    samples = df[df["event"] == "sample"]
    scanned = df.dropna(subset=["mass"])
    last, last_scanned = df.iloc[-1], scanned.iloc[-1]
    notes = []

    T1 = constants["T1"]
    decay_C = lambda_hat = None
    decay_note = "ok"
    try:
        decay_C, lambda_hat = fit_decay(samples["t"].to_numpy(), samples["osc_v"].to_numpy(), t0=T1)
    except (AllZeroOscillation, InsufficientData) as e:
        decay_note = f"{type(e).__name__}: {e}"

    mass_errors = [abs(f["mass"] - M) for f in frames] + list(np.abs(scanned["mass"].to_numpy() - M))
    recursion = momentum_recursion_errors(df, M, dt)

    tail_start = 5.0 / M
    tail = samples.loc[samples["t"] >= tail_start, "momentum"].abs()
    if tail.empty:
        notes.append(f"no samples after t = 5/M = {tail_start:.4g}")

    residuals = [f["rh_residual_max"] for f in frames]
    support = [f["b"] - f["a"] for f in frames]
    v_sup = (samples["v_left"].abs() + samples["tv_v"]).max() if not samples.empty else math.nan

    return RunReport(
        status=meta["status"],
        name=meta["name"],
        nu=meta["nu"],
        dt=dt,
        eta=meta["eta"],
        xi=meta["xi"],
        xi_v=meta["xi_v"],
        t_final=meta["t_final"],
        final={
            **{k: float(last[k]) for k in FINAL_FIELDS},
            **{k: float(last_scanned[k]) for k in FINAL_SCANNED_FIELDS},
            "n_fronts": int(last["n_fronts"]),
        },
        events={str(k): int(v) for k, v in df["event"].value_counts().sort_index().items()},
        events_processed=meta["events_processed"],
        n_perturbations=meta["n_perturbations"],
        steps=meta["steps"],
        q=constants["q"],
        T1=T1,
        condition_holds=constants["condition_holds"],
        lambda_theory=constants["lambda_of_xi_bar"],
        decay_C=decay_C,
        lambda_hat=lambda_hat,
        decay_t0=T1,
        decay_note=decay_note,
        mass_error_max=float(max(mass_errors, default=0.0)),
        momentum_recursion_error_max=float(recursion.max()) if recursion.size else 0.0,
        sup_momentum_tail=float(tail.max()) if not tail.empty else None,
        momentum_tail_start=tail_start,
        rh_residual_max=float(max(residuals, default=0.0)),
        rh_residual_mean=float(np.mean(residuals)) if residuals else 0.0,
        support_length_max=float(max(support, default=0.0)),
        support_bound=M * constants["u_sup"],
        v_sup=float(v_sup),
        violations=len(meta["violations"]),
        wall_time=wall_time,
        notes=notes,
    )


def write_report(report: RunReport, path: Path) -> None:
    with open(path, "w") as f:
        json.dump(asdict(report), f, indent=2, cls=NumpyEncoder)


def main():
    parser = argparse.ArgumentParser(description="Rebuild report.json from a run directory")
    parser.add_argument("run_dir", help="Directory holding diag.csv and frames.jsonl")
    parser.add_argument("--print", action="store_true", dest="show", help="Print the report")
    args = parser.parse_args()

    run_dir = Path(args.run_dir)
    print("=" * 60)
    print(f"REPORT: {run_dir}")
    print("=" * 60)

    try:
        df, frames, meta = load_run(run_dir)
    except (OSError, SchemaError) as e:
        print(f"Error: {e}")
        sys.exit(2)

    report = build_report(df, frames, meta)
    write_report(report, run_dir / REPORT_FILE)
    if args.show:
        print(json.dumps(asdict(report), indent=2, cls=NumpyEncoder))
    print(f"\nSaved to {run_dir / REPORT_FILE}")


if __name__ == "__main__":
    main()
