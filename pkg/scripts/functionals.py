"""
Functionals of the front-tracking solution and the online invariant monitor.

    L     = L_in + L_0out + L_Mout        strengths of active + absorbed fronts
    L_xi  = sum of |eps| over active fronts, shocks weighted by xi
    F_k   = L_xi restricted to generation k
    V     = sum_k xi^k F_k

plus total variation and oscillation of the cell states, Eulerian mass and
momentum, W_y probes and the constants of the flocking estimate.

The strength sums are kept current by FunctionalLedger from the fronts each
event created or ended. compute_diag scans the whole pattern and runs only at
time steps and sample times; interaction and exit rows leave the scanned
columns empty.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
from scipy import stats as scipy_stats

from config import INVARIANT_SLACK, RAREFACTION_SLACK
from errors import AllZeroOscillation, InconsistentPattern, InsufficientData, InvariantViolation, NonPositiveDensity
from front_tracker import ExitRecord, Front, InteractionRecord, WavePattern
from riemann_core import h
from source_splitting import StepRecord, implicit_split, timestep_bounds

if TYPE_CHECKING:
    from initial_data import InitialData

logger = logging.getLogger(__name__)

# Probe positions closer than this to an interaction count as "at" the probe
PROBE_TOL = 1e-12


def c_of_q(q: float) -> float:
    """Reflection coefficient (cosh q - 1) / (cosh q + 1)."""
    ch = math.cosh(q)
    return (ch - 1.0) / (ch + 1.0)


def _power(base: float, k: int) -> float:
    try:
        return base ** k
    except OverflowError:
        return math.inf


# =============================================================================
# Diagnostics record
# =============================================================================

@dataclass(frozen=True)
class DiagRecord:
    t: float
    event: str
    n_fronts: int
    L: float
    L_in: float
    L_0out: float
    L_Mout: float
    L_xi: float
    F: tuple
    V: float
    tv_ln_u: float
    tv_v: float
    osc_v: float
    u_min: float
    u_max: float
    mass: float
    momentum: float
    u_left: float
    v_left: float
    u_right: float
    v_right: float
    int_L_in: float = 0.0
    probes: tuple = ()  # (W, A, tv_u) per probe
    scanned: bool = True  # False: tv/osc/extrema/mass/momentum/probes not evaluated (NaN)

    def to_row(self, probe_names: Sequence[str] = ()) -> dict:
        row = {
            "t": self.t,
            "event": self.event,
            "n_fronts": self.n_fronts,
            "L": self.L,
            "L_in": self.L_in,
            "L_0out": self.L_0out,
            "L_Mout": self.L_Mout,
            "L_xi": self.L_xi,
            "V": self.V,
            "tv_ln_u": self.tv_ln_u,
            "tv_v": self.tv_v,
            "osc_v": self.osc_v,
            "u_min": self.u_min,
            "u_max": self.u_max,
            "mass": self.mass,
            "momentum": self.momentum,
            "u_left": self.u_left,
            "v_left": self.v_left,
            "u_right": self.u_right,
            "v_right": self.v_right,
            "int_L_in": self.int_L_in,
        }
        for k, value in enumerate(self.F, start=1):
            row[f"F_{k}"] = value
        for name, (w, a, tv_u) in zip(probe_names, self.probes):
            row[f"W_{name}"] = w
            row[f"A_{name}"] = a
            row[f"TVu_{name}"] = tv_u
        return row


def diag_columns(k_max: int, probe_names: Sequence[str] = ()) -> list:
    """Column order of diag.csv."""
    base = [
        "t", "event", "n_fronts", "L", "L_in", "L_0out", "L_Mout", "L_xi", "V",
        "tv_ln_u", "tv_v", "osc_v", "u_min", "u_max", "mass", "momentum",
        "u_left", "v_left", "u_right", "v_right", "int_L_in",
    ]
    base += [f"F_{k}" for k in range(1, k_max + 1)]
    for name in probe_names:
        base += [f"W_{name}", f"A_{name}", f"TVu_{name}"]
    return base


def compute_diag(
    pattern: WavePattern,
    xi: float,
    k_max: int,
    *,
    xi_v: Optional[float] = None,
    event: str = "sample",
    probes: Sequence["ProbeTracker"] = (),
    int_L_in: float = 0.0,
) -> DiagRecord:
    """
    Snapshot of every functional at pattern.t.

    F_k is evaluated at xi with generations above k_max folded into the last
    bucket. V uses xi_v (default xi) and the true generation of each front.
    """
    if xi < 1.0:
        raise ValueError(f"xi must be >= 1, got {xi}")
    xi_v = xi if xi_v is None else xi_v
    t = pattern.t

    F = [[] for _ in range(k_max)]
    sizes, weights, v_weights = [], [], []
    states = [pattern.left_state]
    ys = [0.0]
    for f in pattern:
        size, weighted, bucket, v_weight = front_weights(f, xi, xi_v, k_max)
        sizes.append(size)
        weights.append(weighted)
        F[bucket].append(weighted)
        v_weights.append(v_weight)
        states.append(f.right_state)
        ys.append(f.position(t))
    ys.append(pattern.M)

    if len(states) != pattern.n_active + 1:
        raise InconsistentPattern(f"{len(states)} cells for {pattern.n_active} fronts")

    L_in = math.fsum(sizes)
    L_xi = math.fsum(weights)
    V = math.fsum(v_weights)
    L_0out = math.fsum(abs(f.eps) for f in pattern.standby_left)
    L_Mout = math.fsum(abs(f.eps) for f in pattern.standby_right)

    u = np.array([s.u for s in states])
    v = np.array([s.v for s in states])
    dy = np.diff(np.array(ys))
    dx = u * dy
    rho = 1.0 / u

    return DiagRecord(
        t=t,
        event=event,
        n_fronts=pattern.n_active,
        L=L_in + L_0out + L_Mout,
        L_in=L_in,
        L_0out=L_0out,
        L_Mout=L_Mout,
        L_xi=L_xi,
        F=tuple(math.fsum(bucket) for bucket in F),
        V=V,
        tv_ln_u=0.5 * float(np.sum(np.abs(np.diff(np.log(u))))),
        tv_v=float(np.sum(np.abs(np.diff(v)))),
        osc_v=float(v.max() - v.min()),
        u_min=float(u.min()),
        u_max=float(u.max()),
        mass=float(math.fsum(rho * dx)),
        momentum=float(math.fsum(rho * v * dx)),
        u_left=states[0].u,
        v_left=states[0].v,
        u_right=states[-1].u,
        v_right=states[-1].v,
        int_L_in=int_L_in,
        probes=tuple(probe_snapshot(p, pattern) for p in probes),
    )


def front_weights(f: Front, xi: float, xi_v: float, k_max: int) -> tuple:
    """(|eps|, L_xi weight, F_k bucket index, V weight) of one front."""
    size = abs(f.eps)
    shock = f.eps < 0.0
    weighted = xi * size if shock else size
    v_weight = _power(xi_v, f.gen) * (xi_v * size if shock else size)
    return size, weighted, min(f.gen, k_max) - 1, v_weight


class _RunningSum:
    """Neumaier-compensated sum; stays exact to rounding over millions of updates."""
    __slots__ = ("total", "comp")

    def __init__(self, value: float = 0.0):
        self.total = value
        self.comp = 0.0

    def add(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.comp


@dataclass
class FunctionalLedger:
    """
    Running L_in, L_xi, F_k, V and the absorbed strengths.

    apply() updates the sums from the fronts an interaction or exit touched,
    so an event row costs O(fronts touched) instead of a scan. resync()
    resets everything to a full compute_diag snapshot.
    """
    xi: float
    xi_v: float
    k_max: int
    n_probes: int = 0

    def __post_init__(self):
        self._L_in = _RunningSum()
        self._L_xi = _RunningSum()
        self._V = _RunningSum()
        self._F = [_RunningSum() for _ in range(self.k_max)]
        self._L_0out = _RunningSum()
        self._L_Mout = _RunningSum()

    def resync(self, diag: DiagRecord) -> None:
        self._L_in = _RunningSum(diag.L_in)
        self._L_xi = _RunningSum(diag.L_xi)
        self._V = _RunningSum(diag.V)
        self._F = [_RunningSum(value) for value in diag.F]
        self._L_0out = _RunningSum(diag.L_0out)
        self._L_Mout = _RunningSum(diag.L_Mout)

    def _add(self, f: Front, sign: float) -> None:
        size, weighted, bucket, v_weight = front_weights(f, self.xi, self.xi_v, self.k_max)
        self._L_in.add(sign * size)
        self._L_xi.add(sign * weighted)
        self._F[bucket].add(sign * weighted)
        self._V.add(sign * v_weight)

    def apply(self, record) -> None:
        if isinstance(record, ExitRecord):
            self._add(record.front, -1.0)
            side = self._L_0out if record.side == "left" else self._L_Mout
            side.add(abs(record.front.eps))
            return
        for f in record.ended:
            self._add(f, -1.0)
        for f in record.outgoing:
            self._add(f, 1.0)

    @property
    def L_in(self) -> float:
        return self._L_in.value

    def snapshot(self, pattern: WavePattern, event: str, int_L_in: float = 0.0) -> DiagRecord:
        """Event row: ledger sums plus the boundary cells; scanned columns are NaN."""
        nan = math.nan
        L_in = self._L_in.value
        L_0out, L_Mout = self._L_0out.value, self._L_Mout.value
        left, right = pattern.left_state, pattern.right_state
        return DiagRecord(
            t=pattern.t,
            event=event,
            n_fronts=pattern.n_active,
            L=L_in + L_0out + L_Mout,
            L_in=L_in,
            L_0out=L_0out,
            L_Mout=L_Mout,
            L_xi=self._L_xi.value,
            F=tuple(s.value for s in self._F),
            V=self._V.value,
            tv_ln_u=nan,
            tv_v=nan,
            osc_v=nan,
            u_min=nan,
            u_max=nan,
            mass=nan,
            momentum=nan,
            u_left=left.u,
            v_left=left.v,
            u_right=right.u,
            v_right=right.v,
            int_L_in=int_L_in,
            probes=((nan, nan, nan),) * self.n_probes,
            scanned=False,
        )


# =============================================================================
# Initial bulk and flocking constants
# =============================================================================

def initial_bulk(data: "InitialData", alpha: float) -> float:
    """q = 1/2 TV(ln rho0) + TV(v0) / (2 alpha) over the interior of the support."""
    rho = np.asarray(data.rho, dtype=float)
    if np.any(rho <= 0.0):
        raise NonPositiveDensity("initial density must be positive on every cell")
    v = np.asarray(data.v, dtype=float)
    tv_ln_rho = float(np.sum(np.abs(np.diff(np.log(rho)))))
    tv_v = float(np.sum(np.abs(np.diff(v))))
    return 0.5 * tv_ln_rho + tv_v / (2.0 * alpha)


@dataclass(frozen=True)
class FlockingConstants:
    q: float
    c_q: float
    xi_max: float
    xi_sqrt_max: float
    T1: float
    xi_bar: float
    lambda_of_xi_bar: Optional[float]
    condition_holds: bool
    M: float
    alpha: float
    u_inf: float
    u_sup: float

    def rate(self, xi: float) -> float:
        """lambda(xi) = (1 - xi^2) M / 2 + ln(xi) / T1."""
        return (1.0 - xi * xi) * self.M / 2.0 + math.log(xi) / self.T1

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def state_bounds(q: float, u_tilde_0: float, u_tilde_M: float) -> tuple:
    """(u_inf, u_sup) confining the specific volume for all times."""
    return math.exp(-2.0 * q) * max(u_tilde_0, u_tilde_M), math.exp(2.0 * q) * min(u_tilde_0, u_tilde_M)


def flocking_constants(data: "InitialData", alpha: float, M: float) -> FlockingConstants:
    if data.rho[0] <= 0.0 or data.rho[-1] <= 0.0:
        raise NonPositiveDensity("boundary densities must be positive")
    q = initial_bulk(data, alpha)
    c = c_of_q(q)
    u0, uM = 1.0 / data.rho[0], 1.0 / data.rho[-1]
    T1 = math.exp(2.0 * q) * M / alpha * min(u0, uM)
    xi_max = math.inf if c == 0.0 else 1.0 / c
    xi_sqrt_max = math.inf if c == 0.0 else 1.0 / math.sqrt(c)
    xi_bar = min(xi_sqrt_max, 1.0 / math.sqrt(M * T1))
    holds = math.exp(2.0 * q) * M * M < alpha * max(data.rho[0], data.rho[-1])
    u_inf, u_sup = state_bounds(q, u0, uM)
    constants = FlockingConstants(
        q=q,
        c_q=c,
        xi_max=xi_max,
        xi_sqrt_max=xi_sqrt_max,
        T1=T1,
        xi_bar=xi_bar,
        lambda_of_xi_bar=None,
        condition_holds=holds,
        M=M,
        alpha=alpha,
        u_inf=u_inf,
        u_sup=u_sup,
    )
    if holds:
        constants = replace(constants, lambda_of_xi_bar=constants.rate(xi_bar))
    return constants


# =============================================================================
# W_y probes
# =============================================================================

@dataclass
class ProbeTracker:
    """
    Strength of the waves that crossed the line y.

    W and tv_u hold the contributions of fronts whose life has ended;
    probe_snapshot adds the fronts still moving.
    """
    y: float
    W: float = 0.0
    A: float = 0.0
    tv_u: float = 0.0


def _crossed(y0: float, y1: float, y: float) -> bool:
    return (y0 < y < y1) or (y1 < y < y0)


def probe_update(tracker: ProbeTracker, record) -> ProbeTracker:
    """Account for the fronts whose life ended with `record`."""
    for f in record.ended:
        if _crossed(f.y_birth, f.y, tracker.y):
            tracker.W += abs(f.eps)
            tracker.tv_u += f.u_jump

    if isinstance(record, InteractionRecord) and abs(record.y - tracker.y) <= PROBE_TOL:
        if record.same_family:
            family = record.incoming[0].family
            surviving = record.eps_out[family - 1]
            tracker.W += abs(surviving)
            tracker.tv_u += sum(f.u_jump for f in record.outgoing if f.family == family)
        else:
            tracker.W += sum(abs(f.eps) for f in record.incoming)
            tracker.tv_u += sum(f.u_jump for f in record.incoming)
    return tracker


def probe_snapshot(tracker: ProbeTracker, pattern: WavePattern) -> tuple:
    """(W_y, A_y, TV of u along y) at pattern.t."""
    W, tv_u, A = tracker.W, tracker.tv_u, 0.0
    for f in pattern:
        y = f.position(pattern.t)
        if _crossed(f.y_birth, y, tracker.y):
            W += abs(f.eps)
            tv_u += f.u_jump
        if (f.family == 1 and y > tracker.y) or (f.family == 2 and y < tracker.y):
            A += abs(f.eps)
    tracker.A = A
    return W, A, tv_u


# =============================================================================
# Decay fit
# =============================================================================

def fit_decay(t: Sequence[float], osc: Sequence[float], t0: float = 0.0) -> tuple:
    """Least-squares fit osc ~ C exp(-lambda t) on t >= t0; returns (C, lambda_hat)."""
    t = np.asarray(t, dtype=float)
    osc = np.asarray(osc, dtype=float)
    window = t >= t0
    if window.any() and not np.any(osc[window] > 0.0):
        raise AllZeroOscillation(f"osc_v vanishes on all {int(window.sum())} samples after t0={t0}")
    usable = window & (osc > 0.0)
    if usable.sum() < 10:
        raise InsufficientData(f"need at least 10 positive samples after t0={t0}, got {int(usable.sum())}")
    if usable.sum() < window.sum():
        logger.warning("fit_decay: dropped %d zero samples", int(window.sum() - usable.sum()))
    fit = scipy_stats.linregress(t[usable], np.log(osc[usable]))
    return math.exp(fit.intercept), -fit.slope


# =============================================================================
# Online invariant monitor
# =============================================================================

@dataclass
class InvariantMonitor:
    """
    Checks the estimates of the construction while a run is in progress.

    Every failed check is appended to `violations`; with strict set the
    first one raises InvariantViolation.
    """
    alpha: float
    M: float
    q: float
    xi: float
    xi_v: float
    dt: float
    eta: float
    u_inf: float
    u_sup: float
    strict: bool = True
    slack: float = INVARIANT_SLACK
    violations: list = field(default_factory=list)
    checks: int = 0
    _last: Optional[DiagRecord] = field(default=None, repr=False)
    _first: Optional[DiagRecord] = field(default=None, repr=False)
    _steps: int = 0
    _interval_start: Optional[DiagRecord] = field(default=None, repr=False)

    def __post_init__(self):
        self.c_q = c_of_q(self.q)
        self.c1, self.C1_plus, self.C1_minus = timestep_bounds(self.q)
        self.tv_v_factor = 2.0 * self.alpha * math.cosh(self.q)

    def _check(self, ok: bool, message: str) -> None:
        self.checks += 1
        if ok:
            return
        self.violations.append(message)
        logger.error("invariant violation: %s", message)
        if self.strict:
            raise InvariantViolation(message)

    def split_ratio_ok(self, eps_in: float, eps_refl: float, dt: float) -> bool:
        """c1 M dt |eps_in| <= |eps_refl| <= C1_sign M dt |eps_in|, with absolute and relative slack."""
        scale = self.M * dt * abs(eps_in)
        upper = self.C1_plus if eps_in > 0.0 else self.C1_minus
        refl = abs(eps_refl)
        return (
            self.c1 * scale * (1.0 - 1e-9) - self.slack <= refl
            and refl <= upper * scale * (1.0 + 1e-9) + self.slack
        )

    def _check_confined(self, fronts, t: float) -> None:
        lo, hi = self.u_inf * (1.0 - 1e-12), self.u_sup * (1.0 + 1e-12)
        for f in fronts:
            u = f.right_state.u
            self._check(lo <= u <= hi, f"t={t:.9f}: u = {u:.6e} leaves [{self.u_inf:.6e}, {self.u_sup:.6e}]")

    def _check_rarefactions(self, fronts, t: float) -> None:
        for f in fronts:
            if f.eps > 0.0:
                self._check(
                    f.eps <= self.eta * (1.0 + RAREFACTION_SLACK),
                    f"t={t:.9f}: rarefaction {f.eps:.3e} above eta={self.eta:.3e}",
                )

    def observe_interaction(self, record: InteractionRecord) -> None:
        t = record.t
        a, b = record.incoming
        size_in = abs(a.eps) + abs(b.eps)
        size_out = sum(abs(f.eps) for f in record.outgoing)
        self._check(size_out - size_in <= self.slack, f"t={t:.9f}: L_in grew by {size_out - size_in:.3e}")
        self._check_rarefactions(record.outgoing, t)
        self._check_confined(record.outgoing, t)

        eps1, eps2 = record.eps_out
        if not record.same_family:
            one, two = (a, b) if a.family == 1 else (b, a)
            self._check(
                abs(eps1 - one.eps) <= 1e-10 and abs(eps2 - two.eps) <= 1e-10,
                f"t={t:.9f}: crossing changed strengths ({one.eps:.3e}, {two.eps:.3e}) -> ({eps1:.3e}, {eps2:.3e})",
            )
            return

        # same-family identities
        sign = -1.0 if a.family == 1 else 1.0
        self._check(
            abs((eps2 - eps1) - sign * (a.eps + b.eps)) <= 1e-10
            and abs(h(eps1) + h(eps2) - h(a.eps) - h(b.eps)) <= 1e-10,
            f"t={t:.9f}: same-family identities fail",
        )

        refl = record.eps_refl
        if a.eps < 0.0 and b.eps < 0.0:
            self._check(refl >= 0.0, f"t={t:.9f}: two shocks reflected a shock ({refl:.3e})")
        elif a.eps * b.eps < 0.0:
            self._check(refl <= 0.0, f"t={t:.9f}: mixed interaction reflected a rarefaction ({refl:.3e})")
            bound = self.c_q * min(abs(a.eps), abs(b.eps))
            self._check(abs(refl) <= bound + self.slack, f"t={t:.9f}: |reflected| {abs(refl):.3e} > c(q) min {bound:.3e}")

        def weighted(fronts):
            return sum(self.xi * abs(f.eps) if f.eps < 0.0 else abs(f.eps) for f in fronts)

        delta = weighted(record.outgoing) - weighted(record.incoming)
        scale = max(1.0, self.xi * size_in)
        self._check(
            delta + (self.xi - 1.0) * abs(refl) <= self.slack * scale,
            f"t={t:.9f}: L_xi change {delta:.3e} + (xi-1)|refl| exceeds 0",
        )

    def observe_step(
        self, record: StepRecord, before: DiagRecord, after: DiagRecord
    ) -> None:
        t, dt, M = record.t, record.dt, self.M
        for out in record.outcomes:
            size_in, same, refl = abs(out.eps_in), abs(out.eps_same), abs(out.eps_refl)
            self._check(abs(same + refl - size_in) <= self.slack, f"t={t:.6f}: split changed |eps| at y={out.y:.6f}")
            oracle = implicit_split(out.eps_in, dt, M)
            if out.eps_refl != 0.0:
                self._check(abs(oracle - out.eps_refl) <= 1e-10, f"t={t:.6f}: implicit split {oracle:.3e} vs {out.eps_refl:.3e}")
                self._check(
                    out.eps_refl * out.eps_in < 0.0 and out.eps_same * out.eps_in > 0.0,
                    f"t={t:.6f}: split sign rule fails for eps_in={out.eps_in:.3e}",
                )
                self._check(
                    self.split_ratio_ok(out.eps_in, out.eps_refl, dt),
                    f"t={t:.6f}: reflected ratio {refl / (M * dt * size_in):.12f} outside "
                    f"[{self.c1:.6f}, {self.C1_plus if out.eps_in > 0.0 else self.C1_minus:.6f}]",
                )
        self._check_rarefactions(record.outgoing, t)

        scale = max(1.0, before.L)
        self._check(abs(after.L - before.L) <= self.slack * scale, f"t={t:.6f}: L changed by {after.L - before.L:.3e} at a time step")
        bound = 0.5 * M * dt * (self.xi - 1.0) * before.L_in
        self._check(
            after.L_xi - before.L_xi <= bound + self.slack * max(1.0, self.xi * before.L_in),
            f"t={t:.6f}: L_xi grew by {after.L_xi - before.L_xi:.3e} > {bound:.3e}",
        )
        expected = (1.0 - M * dt) * before.momentum
        self._check(
            abs(after.momentum - expected) <= self.slack * max(1.0, abs(before.momentum)),
            f"t={t:.6f}: momentum {after.momentum:.15e} != (1 - M dt) * {before.momentum:.15e}",
        )
        self._steps = record.n
        self._interval_start = after

    def observe_diag(self, diag: DiagRecord) -> None:
        t = diag.t
        if self._first is None:
            self._first = diag
            self._interval_start = diag
            self._check(diag.L <= self.q + self.slack, f"L(0+) = {diag.L:.6e} exceeds q = {self.q:.6e}")
        first = self._first

        self._check(abs(diag.L - (diag.L_in + diag.L_0out + diag.L_Mout)) <= self.slack * max(1.0, diag.L), f"t={t:.6f}: L != L_in + L_out")
        self._check(
            diag.L_in - self.slack <= diag.L_xi <= self.xi * diag.L_in + self.slack * max(1.0, self.xi),
            f"t={t:.6f}: L_xi outside [L_in, xi L_in]",
        )
        self._check(abs(math.fsum(diag.F) - diag.L_xi) <= self.slack * max(1.0, diag.L_xi), f"t={t:.6f}: sum F_k != L_xi")
        self._check(diag.L_0out + diag.L_Mout <= first.L_in + self.slack, f"t={t:.6f}: W_0 + W_M exceeds L_in(0)")

        growth = _power(1.0 + (self.xi_v ** 2 - 1.0) * self.M * self.dt / 2.0, self._steps)
        self._check(diag.V <= growth * first.V + 1e-10, f"t={t:.6f}: V = {diag.V:.6e} above {growth * first.V:.6e}")

        if diag.scanned:
            self._observe_scan(diag, first)

        start = self._interval_start
        if start is not None and diag.event != "step":
            drift = abs(diag.v_left - start.v_left)
            self._check(
                drift <= self.tv_v_factor * start.L_in + self.slack,
                f"t={t:.6f}: v(0+) drifted {drift:.3e} since t={start.t:.6f}",
            )

        last = self._last
        if last is not None and diag.event != "step":
            self._check(diag.L <= last.L + self.slack * max(1.0, last.L), f"t={t:.6f}: L increased by {diag.L - last.L:.3e}")
        self._last = diag

    def _observe_scan(self, diag: DiagRecord, first: DiagRecord) -> None:
        """Checks that need a full scan of the pattern (time steps and samples)."""
        t = diag.t
        self._check(abs(diag.L_in - diag.tv_ln_u) <= 1e-10, f"t={t:.6f}: L_in {diag.L_in:.12e} != TV(ln u)/2 {diag.tv_ln_u:.12e}")
        self._check(diag.tv_v <= self.tv_v_factor * diag.L_in + self.slack, f"t={t:.6f}: TV v {diag.tv_v:.6e} > 2 alpha cosh(q) L_in")
        self._check(
            self.u_inf * (1.0 - 1e-12) <= diag.u_min and diag.u_max <= self.u_sup * (1.0 + 1e-12),
            f"t={t:.6f}: u range [{diag.u_min:.6e}, {diag.u_max:.6e}] leaves [{self.u_inf:.6e}, {self.u_sup:.6e}]",
        )
        self._check(abs(diag.mass - self.M) <= self.slack * max(1.0, self.M), f"t={t:.6f}: mass {diag.mass:.15e} != M")

        c1w = (3.0 + math.cosh(self.q)) / 2.0
        c2w = (math.cosh(self.q) + 1.0) / 2.0
        w_bound = c1w * first.L_in + c2w * self.M * diag.int_L_in
        for w, _, tv_u in diag.probes:
            self._check(w <= w_bound + self.slack, f"t={t:.6f}: W_y = {w:.6e} above {w_bound:.6e}")
            self._check(tv_u <= 2.0 * self.u_sup * w + self.slack, f"t={t:.6f}: vertical TV of u above 2 u_sup W_y")
