#!/usr/bin/env python3
"""
Run the front-tracking scheme for the pressureless-alignment flocking model.

Loads piecewise-constant initial data, removes the mean velocity, builds the
initial wave pattern and alternates homogeneous front tracking with the
damping step at t^n = n * dt until t_end. Every run directory gets:

    diag.csv       functionals after every event, every time step and on the
                   sample grid; the "#" header documents the columns and
                   carries the run metadata as JSON
    frames.jsonl   one Eulerian frame per sample time
    report.json    summary rebuilt from the two files above

Usage:
    python run_simulation.py --data datasets/two_shock.json --nu 4 --t-end 2
    python run_simulation.py --data datasets/flocking.json --check-flocking
    python run_simulation.py --data datasets/two_shock.json --sweep 4..7
    python run_simulation.py --data datasets/constant.json --t-end 100 --out-dir /tmp/const
"""
import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats as scipy_stats

from compute_report import NumpyEncoder, RunReport, build_report, write_report
from config import (
    DEFAULT_ALPHA,
    DEFAULT_EVENT_CAP,
    DEFAULT_KMAX,
    DEFAULT_NU,
    DEFAULT_RAREFACTION_POLICY,
    DEFAULT_SAMPLE_DT,
    DEFAULT_SWEEP_WORKERS,
    DEFAULT_T_END,
    DIAG_FILE,
    DT_SCALE,
    ETA_SCALE,
    FRAMES_FILE,
    LOG_LEVEL,
    PERTURB_SCALE,
    RAREFACTION_POLICIES,
    REPORT_FILE,
    RUNS_DIR,
    ZERO_WAVE,
)
from errors import ConfigRejected, FlockingError, TimeStepTooLarge
from euler_reconstruct import (
    frame_from_dict,
    frame_to_dict,
    lagrangian_profile,
    profile_l1,
    rh_residual_max,
    start_trace,
    to_euler,
    update_boundary_trace,
)
from front_tracker import ExitRecord, InteractionRecord, check_consistency, init_pattern, iter_events
from functionals import (
    FlockingConstants,
    FunctionalLedger,
    InvariantMonitor,
    ProbeTracker,
    compute_diag,
    diag_columns,
    flocking_constants,
    probe_update,
)
from initial_data import InitialData, load_initial_data, normalize
from source_splitting import eta_floor, resolve_time_step

logger = logging.getLogger(__name__)

# ANSI colors for terminal output
GREEN = "\033[92m"
RED = "\033[91m"
YELLOW = "\033[93m"
BLUE = "\033[94m"
RESET = "\033[0m"
BOLD = "\033[1m"


def print_step(msg: str):
    """Print a step header."""
    print(f"\n{BLUE}{BOLD}▶ {msg}{RESET}")


def print_success(msg: str):
    print(f"  {GREEN}✓ {msg}{RESET}")


def print_warning(msg: str):
    print(f"  {YELLOW}⚠ {msg}{RESET}")


def print_error(msg: str):
    print(f"  {RED}✗ {msg}{RESET}")


COLUMN_DOCS = {
    "t": "time",
    "event": "row trigger: initial, interaction, exit, pre_step, step, sample",
    "n_fronts": "active fronts",
    "L": "L_in + L_0out + L_Mout",
    "L_in": "sum |eps| over active fronts",
    "L_0out": "sum |eps| absorbed at y = 0",
    "L_Mout": "sum |eps| absorbed at y = M",
    "L_xi": "active strengths, shocks weighted by xi",
    "V": "sum over fronts of xi_v^gen times the xi_v-weighted strength",
    "tv_ln_u": "TV(ln u) / 2 over (0, M)",
    "tv_v": "TV(v) over (0, M)",
    "osc_v": "max v - min v",
    "u_min": "smallest specific volume",
    "u_max": "largest specific volume",
    "mass": "sum rho dx",
    "momentum": "sum rho v dx",
    "u_left": "u(0+)",
    "v_left": "v(0+)",
    "u_right": "u(M-)",
    "v_right": "v(M-)",
    "int_L_in": "time integral of L_in",
    "F_k": "L_xi restricted to generation k (last bucket collects k >= k_max)",
    "W_<probe>": "strength that crossed the probe line",
    "A_<probe>": "strength approaching the probe",
    "TVu_<probe>": "vertical TV of u along the probe line",
}

# Columns that need a full scan of the pattern
SCANNED_COLUMNS = ("tv_ln_u", "tv_v", "osc_v", "u_min", "u_max", "mass", "momentum")


# =============================================================================
# Configuration
# =============================================================================

@dataclass
class SimConfig:
    """Run parameters; None means 'derive from nu and the data'."""
    alpha: float = DEFAULT_ALPHA
    nu: int = DEFAULT_NU
    dt: Optional[float] = None
    eta: Optional[float] = None
    t_end: float = DEFAULT_T_END
    xi: Optional[float] = None
    xi_v: Optional[float] = None
    k_max: int = DEFAULT_KMAX
    probes: Optional[tuple] = None  # Lagrangian positions in (0, M)
    sample_dt: float = DEFAULT_SAMPLE_DT
    event_cap: int = DEFAULT_EVENT_CAP
    max_fronts: Optional[int] = None
    deshift: bool = False
    perturb_scale: float = PERTURB_SCALE
    wave_floor: float = ZERO_WAVE
    rarefaction_policy: str = DEFAULT_RAREFACTION_POLICY
    strict: bool = True
    check_flocking: bool = False


@dataclass(frozen=True)
class ResolvedConfig:
    config: SimConfig
    dt: float
    eta: float
    xi: float
    xi_v: float
    probes: tuple
    constants: FlockingConstants

    @property
    def probe_names(self) -> list:
        return [f"y{i}" for i in range(1, len(self.probes) + 1)]


def _xi_fallback(constants: FlockingConstants) -> float:
    # c(q) = 0 leaves the xi caps infinite
    return max(1.0, 1.0 / math.sqrt(constants.M * constants.T1))


def resolve_config(config: SimConfig, data: InitialData) -> ResolvedConfig:
    """
    Fill in dt, eta, xi, xi_v and probes and reject inconsistent combinations.

    Defaults: dt = DT_SCALE / 2^nu and eta = ETA_SCALE / 2^nu, raised to the
    floor C1-(q) M dt q when needed. An explicit eta below that floor is
    rejected.
    """
    if not config.alpha > 0.0:
        raise ConfigRejected(f"alpha must be positive, got {config.alpha}")
    if config.t_end < 0.0:
        raise ConfigRejected(f"t_end must be non-negative, got {config.t_end}")
    if not config.sample_dt > 0.0:
        raise ConfigRejected(f"sample_dt must be positive, got {config.sample_dt}")
    if config.k_max < 1:
        raise ConfigRejected(f"k_max must be >= 1, got {config.k_max}")
    if config.event_cap < 1:
        raise ConfigRejected(f"event_cap must be >= 1, got {config.event_cap}")
    if config.rarefaction_policy not in RAREFACTION_POLICIES:
        raise ConfigRejected(f"rarefaction policy must be one of {RAREFACTION_POLICIES}")

    M = data.M
    constants = flocking_constants(data, config.alpha, M)
    q = constants.q

    dt = config.dt if config.dt is not None else DT_SCALE / 2 ** config.nu
    if not (dt > 0.0 and M * dt < 1.0):
        raise TimeStepTooLarge(f"dt = {dt:.6g} gives M*dt = {M * dt:.6g}, need 0 < M*dt < 1")

    floor = eta_floor(q, M, dt)
    if config.eta is None:
        eta = ETA_SCALE / 2 ** config.nu
        if eta < floor:
            logger.warning("raising default eta %.3e to the floor %.3e", eta, floor)
            eta = floor
    else:
        eta = config.eta
        if not eta > 0.0 or eta < floor * (1.0 - 1e-12):
            raise ConfigRejected(f"eta = {eta:.6g} is below C1-(q) M dt q = {floor:.6g}")

    if config.xi is None:
        xi = constants.xi_max if math.isfinite(constants.xi_max) else _xi_fallback(constants)
    else:
        xi = config.xi
        if not 1.0 <= xi <= constants.xi_max * (1.0 + 1e-12):
            raise ConfigRejected(f"xi = {xi} outside [1, 1/c(q)] = [1, {constants.xi_max:.6g}]")

    if config.xi_v is None:
        xi_v = constants.xi_sqrt_max if math.isfinite(constants.xi_sqrt_max) else _xi_fallback(constants)
    else:
        xi_v = config.xi_v
        if not 1.0 <= xi_v <= constants.xi_sqrt_max * (1.0 + 1e-12):
            raise ConfigRejected(f"xi_v = {xi_v} outside [1, c(q)^(-1/2)]")

    probes = config.probes if config.probes is not None else (M / 4, M / 2, 3 * M / 4)
    for y in probes:
        if not 0.0 < y < M:
            raise ConfigRejected(f"probe y = {y} must lie inside (0, M) = (0, {M:.6g})")

    return ResolvedConfig(
        config=config,
        dt=dt,
        eta=eta,
        xi=xi,
        xi_v=xi_v,
        probes=tuple(float(y) for y in probes),
        constants=constants,
    )


def sample_times(t_end: float, sample_dt: float) -> list:
    n = int(math.floor(t_end / sample_dt + 1e-9))
    times = [min(k * sample_dt, t_end) for k in range(n + 1)]
    if times[-1] < t_end - 1e-12:
        times.append(t_end)
    return times


# =============================================================================
# Simulation
# =============================================================================

@dataclass
class Simulation:
    """One nu-indexed run: pattern, boundary trace, monitor and the emitted rows."""
    resolved: ResolvedConfig
    data: InitialData
    rows: list = field(default_factory=list)  # tuples in diag_columns order
    frames: list = field(default_factory=list)
    status: str = "ok"
    int_L_in: float = 0.0
    _last_t: float = 0.0
    _last_L_in: float = 0.0

    def __post_init__(self):
        r, cfg = self.resolved, self.resolved.config
        self.pattern = init_pattern(
            self.data.lagrangian_cells(),
            cfg.alpha,
            r.eta,
            dt=r.dt,
            event_cap=cfg.event_cap,
            max_fronts=cfg.max_fronts,
            perturb_scale=cfg.perturb_scale,
            rarefaction_policy=cfg.rarefaction_policy,
            wave_floor=cfg.wave_floor,
        )
        self.trace = start_trace(self.data.a0, self.pattern)
        self.probes = [ProbeTracker(y) for y in r.probes]
        self.ledger = FunctionalLedger(r.xi, r.xi_v, cfg.k_max, n_probes=len(r.probes))
        self.monitor = InvariantMonitor(
            alpha=cfg.alpha,
            M=self.pattern.M,
            q=r.constants.q,
            xi=r.xi,
            xi_v=r.xi_v,
            dt=r.dt,
            eta=r.eta,
            u_inf=r.constants.u_inf,
            u_sup=r.constants.u_sup,
            strict=cfg.strict,
        )

    def _integrate(self) -> None:
        t = self.pattern.t
        self.int_L_in += self._last_L_in * (t - self._last_t)
        self._last_t = t

    def _emit(self, diag):
        self._last_L_in = diag.L_in
        self.rows.append(tuple(diag.to_row(self.resolved.probe_names).values()))
        return diag

    def _diag(self, event: str):
        """Full scan of the pattern; resets the ledger."""
        self._integrate()
        diag = compute_diag(
            self.pattern,
            self.resolved.xi,
            self.resolved.config.k_max,
            xi_v=self.resolved.xi_v,
            event=event,
            probes=self.probes,
            int_L_in=self.int_L_in,
        )
        self.ledger.resync(diag)
        return self._emit(diag)

    def _event_diag(self, record, event: str):
        self._integrate()
        self.ledger.apply(record)
        return self._emit(self.ledger.snapshot(self.pattern, event, self.int_L_in))

    def _on_record(self, record) -> None:
        update_boundary_trace(self.trace, self.pattern, record)
        for tracker in self.probes:
            probe_update(tracker, record)
        if isinstance(record, InteractionRecord):
            self.monitor.observe_interaction(record)
            self.monitor.observe_diag(self._event_diag(record, "interaction"))
        elif isinstance(record, ExitRecord):
            self.monitor.observe_diag(self._event_diag(record, "exit"))

    def _time_step(self) -> None:
        before = self._diag("pre_step")
        self.monitor.observe_diag(before)
        record = resolve_time_step(self.pattern, self.pattern.M, self.resolved.dt)
        update_boundary_trace(self.trace, self.pattern, record)
        for tracker in self.probes:
            probe_update(tracker, record)
        after = self._diag("step")
        self.monitor.observe_step(record, before, after)
        self.monitor.observe_diag(after)
        check_consistency(self.pattern)

    def _sample(self) -> None:
        self.monitor.observe_diag(self._diag("sample"))
        check_consistency(self.pattern)
        frame = to_euler(self.pattern, self.trace)
        rh_residual_max(frame)  # raises on a degenerate jump
        v_bar = self.data.v_bar_shift if self.resolved.config.deshift else None
        self.frames.append(frame_to_dict(frame, v_bar))

    def execute(self) -> None:
        cfg = self.resolved.config
        self.monitor.observe_diag(self._diag("initial"))
        samples = sample_times(cfg.t_end, cfg.sample_dt)
        # the t = 0 sample is the initial frame
        self._sample()
        k = 1
        pattern = self.pattern
        while k < len(samples) or pattern.next_time_step <= cfg.t_end:
            t_sample = samples[k] if k < len(samples) else math.inf
            t_target = min(t_sample, pattern.next_time_step, cfg.t_end)
            for record in iter_events(pattern, t_target):
                self._on_record(record)
            if pattern.next_time_step == t_target:
                self._time_step()
            if t_sample == t_target:
                self._sample()
                k += 1
            if t_target >= cfg.t_end and k >= len(samples):
                break

    def meta(self) -> dict:
        r, cfg, data = self.resolved, self.resolved.config, self.data
        pattern = self.pattern
        return {
            "name": data.name,
            "status": self.status,
            "a0": data.a0,
            "b0": data.b0,
            "M": pattern.M,
            "v_bar": data.v_bar_shift,
            "u_tilde_0": data.u_tilde_0,
            "u_tilde_M": data.u_tilde_M,
            "alpha": cfg.alpha,
            "nu": cfg.nu,
            "dt": r.dt,
            "eta": r.eta,
            "xi": r.xi,
            "xi_v": r.xi_v,
            "k_max": cfg.k_max,
            "t_end": cfg.t_end,
            "t_final": pattern.t,
            "sample_dt": cfg.sample_dt,
            "probes": dict(zip(r.probe_names, r.probes)),
            "deshift": cfg.deshift,
            "rarefaction_policy": cfg.rarefaction_policy,
            "wave_floor": cfg.wave_floor,
            "perturb_scale": cfg.perturb_scale,
            "constants": r.constants.to_dict(),
            "steps": pattern.step_index - 1,
            "events_processed": pattern.events_processed,
            "n_perturbations": pattern.n_perturbations,
            "invariant_checks": self.monitor.checks,
            "violations": list(self.monitor.violations),
        }


# =============================================================================
# Output
# =============================================================================

def write_diag(path: Path, rows: Sequence[tuple], columns: Sequence[str], meta: dict) -> None:
    """diag.csv with a '#' header: one line per column doc, then the metadata."""
    df = pd.DataFrame(list(rows), columns=list(columns))
    with open(path, "w") as f:
        f.write("# flocking front-tracking diagnostics\n")
        for name, doc in COLUMN_DOCS.items():
            f.write(f"# column {name}: {doc}\n")
        f.write(f"# empty on interaction and exit rows: {', '.join(SCANNED_COLUMNS)} and the probe columns\n")
        f.write(f"# meta: {json.dumps(meta, cls=NumpyEncoder, sort_keys=True)}\n")
        df.to_csv(f, index=False)


def write_frames(path: Path, frames: Sequence[dict]) -> None:
    with open(path, "w") as f:
        for frame in frames:
            f.write(json.dumps(frame, cls=NumpyEncoder, sort_keys=True) + "\n")


def default_run_dir(data: InitialData, config: SimConfig) -> Path:
    return RUNS_DIR / f"{data.name or 'run'}_nu{config.nu}"


def _flush(sim: Simulation, out_dir: Path, started: float) -> RunReport:
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = sim.meta()
    columns = diag_columns(sim.resolved.config.k_max, sim.resolved.probe_names)
    write_diag(out_dir / DIAG_FILE, sim.rows, columns, meta)
    write_frames(out_dir / FRAMES_FILE, sim.frames)
    report = build_report(
        pd.DataFrame(sim.rows, columns=columns),
        sim.frames,
        meta,
        wall_time=time.perf_counter() - started,
    )
    write_report(report, out_dir / REPORT_FILE)
    return report


def run(config: SimConfig, data: InitialData, out_dir: Optional[Path] = None) -> RunReport:
    """
    Simulate `data` under `config` and write diag.csv, frames.jsonl, report.json.

    Partial output is flushed before any simulator error propagates.
    """
    started = time.perf_counter()
    data = normalize(replace(data, alpha=config.alpha))
    resolved = resolve_config(config, data)
    out_dir = Path(out_dir) if out_dir is not None else default_run_dir(data, config)
    sim = Simulation(resolved, data)
    logger.info(
        "run %s nu=%d: dt=%.4g eta=%.4g xi=%.4g, %d initial fronts",
        data.name, config.nu, resolved.dt, resolved.eta, resolved.xi, sim.pattern.n_active,
    )
    try:
        sim.execute()
    except FlockingError as e:
        sim.status = type(e).__name__
        logger.error("run stopped at t=%.6f: %s", sim.pattern.t, e)
        _flush(sim, out_dir, started)
        raise
    return _flush(sim, out_dir, started)


# =============================================================================
# Sweep over nu
# =============================================================================

def parse_nu_list(text: str) -> list:
    """'4..8' -> [4, 5, 6, 7, 8]; '4,6' -> [4, 6]."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigRejected(f"cannot parse nu list {text!r}") from e


def _run_one(job: tuple) -> dict:
    config, data, out_dir = job
    return asdict(run(config, data, out_dir))


def _load_profiles(run_dir: Path) -> dict:
    profiles = {}
    with open(run_dir / FRAMES_FILE) as f:
        for line in f:
            frame = frame_from_dict(json.loads(line))
            profiles[round(frame.t, 12)] = lagrangian_profile(frame)
    return profiles


def _loglog_slope(eta: Sequence[float], values: Sequence[Optional[float]]) -> Optional[float]:
    pairs = [(e, v) for e, v in zip(eta, values) if v is not None and v > 0.0]
    if len(pairs) < 2:
        return None
    x, y = np.log(np.array(pairs)).T
    return float(scipy_stats.linregress(x, y).slope)


def sweep(
    config: SimConfig,
    data: InitialData,
    nu_list: Sequence[int],
    out_root: Path,
    workers: int = DEFAULT_SWEEP_WORKERS,
) -> dict:
    """
    Run every nu in nu_list and compare them.

    Reports inter-nu L1 distances of u(., t) at the shared sample times and
    the log-log slopes of the RH residual and of the momentum tail in eta.
    """
    if len(nu_list) < 2:
        raise ConfigRejected("a sweep needs at least two nu values")
    out_root = Path(out_root)
    jobs = [
        (replace(config, nu=nu, dt=None, eta=None), data, out_root / f"nu{nu}")
        for nu in nu_list
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            reports = list(executor.map(_run_one, jobs))
    else:
        reports = [_run_one(job) for job in jobs]

    profiles = [_load_profiles(out_dir) for _, _, out_dir in jobs]
    distances = []
    for (nu_a, prof_a), (nu_b, prof_b) in zip(zip(nu_list, profiles), zip(nu_list[1:], profiles[1:])):
        shared = sorted(set(prof_a) & set(prof_b))
        values = [profile_l1(prof_a[t], prof_b[t]) for t in shared]
        worst = int(np.argmax(values)) if values else None
        distances.append({
            "nu_a": nu_a,
            "nu_b": nu_b,
            "shared_times": len(shared),
            "max_l1": values[worst] if values else None,
            "t_at_max": shared[worst] if values else None,
        })

    eta = [r["eta"] for r in reports]
    rh = [r["rh_residual_max"] for r in reports]
    tails = [r["sup_momentum_tail"] for r in reports]
    finite_tails = [t for t in tails if t is not None]
    aggregate = {
        "nu": list(nu_list),
        "dt": [r["dt"] for r in reports],
        "eta": eta,
        "rh_residual_max": rh,
        "sup_momentum_tail": tails,
        "momentum_tail_decreasing": all(b <= a for a, b in zip(finite_tails, finite_tails[1:])),
        "rh_slope": _loglog_slope(eta, rh),
        "momentum_slope": _loglog_slope(eta, tails),
        "l1_distances": distances,
        "statuses": [r["status"] for r in reports],
    }
    out_root.mkdir(parents=True, exist_ok=True)
    with open(out_root / "sweep.json", "w") as f:
        json.dump(aggregate, f, indent=2, cls=NumpyEncoder)
    return aggregate


# =============================================================================
# CLI
# =============================================================================

def _print_constants(constants: FlockingConstants) -> None:
    print(f"  q            = {constants.q:.6g}")
    print(f"  c(q)         = {constants.c_q:.6g}")
    print(f"  T1           = {constants.T1:.6g}")
    print(f"  xi_bar       = {constants.xi_bar:.6g}")
    print(f"  u range      = [{constants.u_inf:.6g}, {constants.u_sup:.6g}]")
    if constants.condition_holds:
        print_success(f"flocking condition holds, lambda(xi_bar) = {constants.lambda_of_xi_bar:.6g}")
    else:
        print_warning("flocking condition e^(2q) M^2 < alpha max(rho0(a0+), rho0(b0-)) fails")


def _print_report(report: RunReport, out_dir: Path) -> None:
    print("\n" + "=" * 60)
    print("RUN SUMMARY")
    print("=" * 60)
    print(f"  status:            {report.status}")
    print(f"  t_final:           {report.t_final:.6g}")
    print(f"  events:            {report.events_processed} ({report.n_perturbations} perturbed)")
    print(f"  final fronts:      {report.final.get('n_fronts')}")
    print(f"  final L / L_in:    {report.final.get('L'):.6e} / {report.final.get('L_in'):.6e}")
    print(f"  mass error:        {report.mass_error_max:.3e}")
    print(f"  RH residual max:   {report.rh_residual_max:.3e}")
    if report.lambda_hat is not None:
        print(f"  decay fit:         C = {report.decay_C:.4g}, lambda_hat = {report.lambda_hat:.4g}")
    print(f"  output:            {out_dir}")
    print("=" * 60)


def main():
    parser = argparse.ArgumentParser(description="Front-tracking simulation of the flocking model")
    parser.add_argument("--data", required=True, help="Initial-data JSON file")
    parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="Sound speed")
    parser.add_argument("--nu", type=int, default=DEFAULT_NU, help="Refinement index")
    parser.add_argument("--dt", type=float, help="Fractional-step length (default DT_SCALE/2^nu)")
    parser.add_argument("--eta", type=float, help="Rarefaction cap (default ETA_SCALE/2^nu)")
    parser.add_argument("--t-end", type=float, default=DEFAULT_T_END, help="Final time")
    parser.add_argument("--xi", type=float, help="Shock weight (default 1/c(q))")
    parser.add_argument("--xi-v", type=float, help="Generation weight for V (default c(q)^-1/2)")
    parser.add_argument("--kmax", type=int, default=DEFAULT_KMAX, help="Generation buckets for F_k")
    parser.add_argument("--probes", help="Comma-separated Lagrangian probe positions")
    parser.add_argument("--sample-dt", type=float, default=DEFAULT_SAMPLE_DT, help="Sample grid spacing")
    parser.add_argument("--out-dir", help="Run directory (default data/runs/<name>_nu<nu>)")
    parser.add_argument("--event-cap", type=int, default=DEFAULT_EVENT_CAP, help="Maximum events")
    parser.add_argument("--max-fronts", type=int, help="Maximum simultaneously active fronts")
    parser.add_argument("--deshift", action="store_true", help="Export frames in the original velocity frame")
    parser.add_argument("--sweep", help="Run several nu values, e.g. 4..8")
    parser.add_argument("--workers", type=int, default=DEFAULT_SWEEP_WORKERS, help="Sweep worker processes")
    parser.add_argument("--check-flocking", action="store_true", help="Print flocking constants and verdict")
    parser.add_argument("--seed-perturb", type=float, default=PERTURB_SCALE, help="Simultaneity jitter scale")
    parser.add_argument("--wave-floor", type=float, default=ZERO_WAVE, help="Drop waves weaker than this")
    parser.add_argument(
        "--rarefaction-policy", choices=RAREFACTION_POLICIES, default=DEFAULT_RAREFACTION_POLICY,
        help="Outgoing rarefactions above eta: guard aborts, split re-splits",
    )
    parser.add_argument("--no-strict", action="store_true", help="Record invariant violations without aborting")

    args = parser.parse_args()
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    print("=" * 60)
    print("FLOCKING FRONT TRACKING" + (" SWEEP" if args.sweep else ""))
    print("=" * 60)

    try:
        probes = tuple(float(y) for y in args.probes.split(",")) if args.probes else None
        config = SimConfig(
            alpha=args.alpha,
            nu=args.nu,
            dt=args.dt,
            eta=args.eta,
            t_end=args.t_end,
            xi=args.xi,
            xi_v=args.xi_v,
            k_max=args.kmax,
            probes=probes,
            sample_dt=args.sample_dt,
            event_cap=args.event_cap,
            max_fronts=args.max_fronts,
            deshift=args.deshift,
            perturb_scale=args.seed_perturb,
            wave_floor=args.wave_floor,
            rarefaction_policy=args.rarefaction_policy,
            strict=not args.no_strict,
            check_flocking=args.check_flocking,
        )

        print_step(f"Loading {args.data}")
        data = load_initial_data(args.data, alpha=args.alpha)
        print_success(f"{len(data.rho)} cells, M = {data.M:.6g}, q = {data.q:.6g}, v_bar = {data.v_bar:.6g}")

        if args.check_flocking:
            print_step("Flocking constants")
            _print_constants(flocking_constants(data, args.alpha, data.M))

        if args.sweep:
            nu_list = parse_nu_list(args.sweep)
            out_root = Path(args.out_dir) if args.out_dir else RUNS_DIR / f"{data.name}_sweep"
            print_step(f"Sweeping nu = {nu_list}")
            aggregate = sweep(config, data, nu_list, out_root, workers=args.workers)
            for nu, eta, rh in zip(aggregate["nu"], aggregate["eta"], aggregate["rh_residual_max"]):
                print(f"  nu={nu}: eta={eta:.4g}  RH max={rh:.3e}")
            if aggregate["rh_slope"] is not None:
                print(f"  RH residual slope vs eta: {aggregate['rh_slope']:.3f}")
            print_success(f"sweep written to {out_root}")
            sys.exit(0)

        out_dir = Path(args.out_dir) if args.out_dir else default_run_dir(data, config)
        print_step(f"Running nu = {args.nu} to t = {args.t_end}")
        report = run(config, data, out_dir)
        _print_report(report, out_dir)
        if args.check_flocking and report.lambda_theory is not None and report.lambda_hat is not None:
            if report.lambda_hat >= 0.5 * report.lambda_theory:
                print_success(f"decay rate {report.lambda_hat:.4g} >= lambda(xi_bar)/2")
            else:
                print_warning(f"decay rate {report.lambda_hat:.4g} below lambda(xi_bar)/2")
        if report.violations:
            print_warning(f"{report.violations} invariant violation(s) recorded")
            sys.exit(4)
    except FlockingError as e:
        print_error(f"{type(e).__name__}: {e}")
        sys.exit(e.exit_code)

    sys.exit(0)


if __name__ == "__main__":
    main()
