"""
Fractional step for the damping source at t^n = n * dt.

The velocity of every cell is multiplied by (1 - M dt). Each front then
separates two states that no longer lie on one wave curve; re-solving its
Riemann problem gives a transmitted wave of the same family (generation
kept) and a reflected wave of the other family (generation + 1).

implicit_split solves the same split as one scalar equation and is used to
cross-check the Riemann route.
"""
import logging
import math
from dataclasses import dataclass, replace

from scipy.optimize import bisect

from config import RIEMANN_TOL
from errors import BracketFailure, TimeStepTooLarge
from front_tracker import Front, WavePattern, build_wave_fan, install_fronts
from riemann_core import h, solve_riemann

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitOutcome:
    y: float
    family_in: int
    eps_in: float
    gen_in: int
    eps_same: float
    eps_refl: float
    gen_same: int
    gen_refl: int


@dataclass
class StepRecord:
    t: float
    n: int
    dt: float
    outcomes: tuple
    incoming: tuple
    outgoing: tuple
    kind: str = "time_step"

    @property
    def ended(self) -> tuple:
        return self.incoming


def _check_step(M: float, dt: float) -> None:
    if not (0.0 <= M * dt < 1.0):
        raise TimeStepTooLarge(f"M*dt = {M * dt:.6g} must lie in [0, 1)")


def damp_velocities(pattern: WavePattern, M: float, dt: float) -> WavePattern:
    """v -> v (1 - M dt) in every cell; u, t and the standby ledgers are untouched."""
    _check_step(M, dt)
    if dt == 0.0:
        return pattern
    factor = 1.0 - M * dt
    pattern.left_state = replace(pattern.left_state, v=pattern.left_state.v * factor)
    for f in pattern:
        f.right_state = replace(f.right_state, v=f.right_state.v * factor)
    return pattern


def resolve_time_step(pattern: WavePattern, M: float, dt: float) -> StepRecord:
    """Damp, re-solve every front and rebuild the schedule at t^n."""
    _check_step(M, dt)
    n = pattern.step_index
    incoming = pattern.fronts
    damp_velocities(pattern, M, dt)

    outgoing = []
    outcomes = []
    left = pattern.left_state
    for f in incoming:
        right = f.right_state
        y = f.position(pattern.t)
        ws = solve_riemann(left, right, pattern.alpha, pattern.wave_floor)
        if f.family == 1:
            eps_same, eps_refl = ws.eps1, ws.eps2
            gens = (f.gen, f.gen + 1)
        else:
            eps_same, eps_refl = ws.eps2, ws.eps1
            gens = (f.gen + 1, f.gen)
        outgoing.extend(build_wave_fan(pattern, left, right, y, gens, sizes=ws))
        outcomes.append(SplitOutcome(
            y=y,
            family_in=f.family,
            eps_in=f.eps,
            gen_in=f.gen,
            eps_same=eps_same,
            eps_refl=eps_refl,
            gen_same=f.gen,
            gen_refl=f.gen + 1,
        ))
        f.end(pattern.t, y)
        left = right

    install_fronts(pattern, outgoing)
    pattern.step_index = n + 1
    logger.debug(
        "time step %d at t=%.6f: %d fronts -> %d fronts", n, pattern.t, len(incoming), len(outgoing)
    )
    return StepRecord(
        t=pattern.t,
        n=n,
        dt=dt,
        outcomes=tuple(outcomes),
        incoming=tuple(incoming),
        outgoing=tuple(outgoing),
    )


def implicit_split(x: float, s: float, M: float) -> float:
    """
    Reflected strength y of a wave x after a damping step of length s.

    y is the unique root of h(y) + h(x + y) = h(x) (1 - M s); it lies in
    (-x, 0) for x > 0 and in (0, -x) for x < 0. The same equation covers
    both families: the transmitted strength is x + y.
    """
    _check_step(M, s)
    if x == 0.0 or s == 0.0:
        return 0.0
    target = h(x) * (1.0 - M * s)

    def residual(y: float) -> float:
        return h(y) + h(x + y) - target

    lo, hi = (-x, 0.0) if x > 0.0 else (0.0, -x)
    if residual(lo) * residual(hi) > 0.0:
        raise BracketFailure(f"no sign change on [{lo}, {hi}] for x={x}, M*s={M * s}")
    y = bisect(residual, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=400)
    if abs(residual(y)) > RIEMANN_TOL * max(1.0, abs(target)):
        raise BracketFailure(f"implicit split residual {residual(y):.3e} for x={x}")
    return y


def timestep_bounds(q: float) -> tuple:
    """(c1, C1_plus, C1_minus): |eps_refl| / (M dt |eps_in|) lies in [c1, C1_sign(eps_in)]."""
    return 1.0 / (1.0 + math.cosh(q)), 0.5, 0.5 * math.cosh(q)


def eta_floor(q: float, M: float, dt: float) -> float:
    """Smallest eta keeping time-step rarefactions below the cap: C1_minus M dt q."""
    return timestep_bounds(q)[2] * M * dt * q
