"""
Lagrangian pattern -> Eulerian profile on the flock [a(t), b(t)].

    a(t) = a0 + int_0^t v(0+, s) ds
    x(y, t) = a(t) + int_0^y u(z, t) dz,      b(t) = x(M, t)

rho = 1/u and m = rho v inside [a, b], vacuum (0, 0) outside. The boundary
trace keeps v(0+) piecewise constant in time, so a(t) is integrated exactly.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from errors import DegenerateJump, InconsistentPattern
from front_tracker import WavePattern

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceSegment:
    t_start: float
    t_end: float
    v0: float
    u0: float
    vM: float
    uM: float


@dataclass
class BoundaryTrace:
    """Boundary-cell states over time plus the running integral of v(0+)."""
    a0: float
    t_start: float
    v0: float
    u0: float
    vM: float
    uM: float
    integral: float = 0.0  # int v(0+) over the closed segments
    segments: list = field(default_factory=list)

    def a_at(self, t: float) -> float:
        return self.a0 + self.integral + self.v0 * (t - self.t_start)

    def v_integral(self, t: float) -> float:
        return self.integral + self.v0 * (t - self.t_start)


def start_trace(a0: float, pattern: WavePattern) -> BoundaryTrace:
    left, right = pattern.left_state, pattern.right_state
    return BoundaryTrace(a0=a0, t_start=pattern.t, v0=left.v, u0=left.u, vM=right.v, uM=right.u)


def update_boundary_trace(trace: BoundaryTrace, pattern: WavePattern, event=None) -> BoundaryTrace:
    """Close the current segment if a boundary cell state changed at pattern.t."""
    left, right = pattern.left_state, pattern.right_state
    if (left.v, left.u, right.v, right.u) == (trace.v0, trace.u0, trace.vM, trace.uM):
        return trace
    t = pattern.t
    trace.segments.append(TraceSegment(trace.t_start, t, trace.v0, trace.u0, trace.vM, trace.uM))
    trace.integral += trace.v0 * (t - trace.t_start)
    trace.t_start = t
    trace.v0, trace.u0 = left.v, left.u
    trace.vM, trace.uM = right.v, right.u
    logger.debug(
        "boundary trace segment at t=%.9f (%s): v(0+)=%.6g",
        t, getattr(event, "kind", "manual"), trace.v0,
    )
    return trace


@dataclass(frozen=True)
class EulerianFrame:
    t: float
    a: float
    b: float
    x: tuple  # x_0 = a, ..., x_{N+1} = b
    rho: tuple
    v: tuple
    m: tuple
    speeds: tuple  # x'_j
    rh_residual: tuple  # per discontinuity, nan for a degenerate jump
    families: tuple = ()  # per interior discontinuity
    kinds: tuple = ()

    @property
    def widths(self) -> tuple:
        return tuple(x1 - x0 for x0, x1 in zip(self.x, self.x[1:]))


def _rh_speed(rho_l: float, m_l: float, rho_r: float, m_r: float) -> float:
    d_rho = rho_r - rho_l
    d_m = m_r - m_l
    if d_rho == 0.0:
        return 0.0 if d_m == 0.0 else math.nan
    return d_m / d_rho


def to_euler(pattern: WavePattern, trace: BoundaryTrace) -> EulerianFrame:
    """
    Eulerian frame at pattern.t.

    x'_j is the time derivative of x(y_j(t), t) along the assigned front
    speeds s_l:  x'_j = v(0+) + sum_{l<j} (u_{l-1} - u_l) s_l + u_{j-1} s_j,
    and b' is the same sum without the last term.
    """
    t = pattern.t
    fronts = pattern.fronts
    states = [pattern.left_state] + [f.right_state for f in fronts]
    ys = [0.0] + [f.position(t) for f in fronts] + [pattern.M]
    if any(y1 < y0 - 1e-12 for y0, y1 in zip(ys, ys[1:])):
        raise InconsistentPattern(f"fronts out of order at t={t}")

    a = trace.a_at(t)
    x = [a]
    for state, y0, y1 in zip(states, ys, ys[1:]):
        x.append(x[-1] + state.u * (y1 - y0))

    rho = tuple(1.0 / s.u for s in states)
    v = tuple(s.v for s in states)
    m = tuple(r * vi for r, vi in zip(rho, v))

    v0 = states[0].v
    speeds = [v0]
    drift = v0
    for j, f in enumerate(fronts):
        u_l, u_r = states[j].u, states[j + 1].u
        speeds.append(drift + u_l * f.speed)
        drift += (u_l - u_r) * f.speed
    speeds.append(drift)

    # vacuum on both sides of the flock
    rho_ext = (0.0,) + rho + (0.0,)
    m_ext = (0.0,) + m + (0.0,)
    residuals = []
    for j, speed in enumerate(speeds):
        target = _rh_speed(rho_ext[j], m_ext[j], rho_ext[j + 1], m_ext[j + 1])
        residuals.append(abs(speed - target) if not math.isnan(target) else math.nan)

    return EulerianFrame(
        t=t,
        a=a,
        b=x[-1],
        x=tuple(x),
        rho=rho,
        v=v,
        m=m,
        speeds=tuple(speeds),
        rh_residual=tuple(residuals),
        families=tuple(f.family for f in fronts),
        kinds=tuple(f.kind for f in fronts),
    )


def mass(frame: EulerianFrame) -> float:
    return math.fsum(r * w for r, w in zip(frame.rho, frame.widths))


def momentum(frame: EulerianFrame) -> float:
    """Total momentum over [a, b]."""
    return math.fsum(r * v * w for r, v, w in zip(frame.rho, frame.v, frame.widths))


def rh_residual_max(frame: EulerianFrame) -> float:
    if any(math.isnan(r) for r in frame.rh_residual):
        raise DegenerateJump(f"jump with equal densities and different momenta at t={frame.t}")
    return max(frame.rh_residual, default=0.0)


def lagrangian_profile(frame: EulerianFrame) -> tuple:
    """(y breakpoints, u per cell) recovered from the frame."""
    ys = [0.0]
    for r, w in zip(frame.rho, frame.widths):
        ys.append(ys[-1] + r * w)
    return tuple(ys), tuple(1.0 / r for r in frame.rho)


def profile_l1(p: tuple, q: tuple) -> float:
    """L1 distance on (0, M) between two piecewise-constant (ys, u) profiles."""
    ys_p, u_p = np.asarray(p[0]), np.asarray(p[1])
    ys_q, u_q = np.asarray(q[0]), np.asarray(q[1])
    grid = np.union1d(ys_p, ys_q)
    grid = grid[(grid >= 0.0) & (grid <= min(ys_p[-1], ys_q[-1]))]
    mid = 0.5 * (grid[:-1] + grid[1:])
    idx_p = np.clip(np.searchsorted(ys_p, mid, side="right") - 1, 0, len(u_p) - 1)
    idx_q = np.clip(np.searchsorted(ys_q, mid, side="right") - 1, 0, len(u_q) - 1)
    return float(np.sum(np.abs(u_p[idx_p] - u_q[idx_q]) * np.diff(grid)))


def deshift(frame: EulerianFrame, v_bar: float) -> EulerianFrame:
    """Undo the mean-velocity normalization: x -> x + v_bar t, v -> v + v_bar."""
    shift = v_bar * frame.t
    v = tuple(vi + v_bar for vi in frame.v)
    return EulerianFrame(
        t=frame.t,
        a=frame.a + shift,
        b=frame.b + shift,
        x=tuple(xi + shift for xi in frame.x),
        rho=frame.rho,
        v=v,
        m=tuple(r * vi for r, vi in zip(frame.rho, v)),
        speeds=tuple(s + v_bar for s in frame.speeds),
        rh_residual=frame.rh_residual,
        families=frame.families,
        kinds=frame.kinds,
    )


def frame_to_dict(frame: EulerianFrame, v_bar: Optional[float] = None) -> dict:
    """JSONL object for one frame; de-shifted when v_bar is given."""
    if v_bar is not None:
        frame = deshift(frame, v_bar)
    finite = [r for r in frame.rh_residual if not math.isnan(r)]
    return {
        "t": frame.t,
        "a": frame.a,
        "b": frame.b,
        "x": list(frame.x),
        "rho": list(frame.rho),
        "v": list(frame.v),
        "m": list(frame.m),
        "families": list(frame.families),
        "kinds": list(frame.kinds),
        "mass": mass(frame),
        "momentum": momentum(frame),
        "rh_residual_max": max(finite, default=0.0),
        "degenerate": len(finite) != len(frame.rh_residual),
    }


def frame_from_dict(entry: dict) -> EulerianFrame:
    """Rebuild a frame from its JSONL object; speeds and residuals are not stored."""
    return EulerianFrame(
        t=entry["t"],
        a=entry["a"],
        b=entry["b"],
        x=tuple(entry["x"]),
        rho=tuple(entry["rho"]),
        v=tuple(entry["v"]),
        m=tuple(entry["m"]),
        speeds=(),
        rh_residual=(),
        families=tuple(entry.get("families", ())),
        kinds=tuple(entry.get("kinds", ())),
    )
