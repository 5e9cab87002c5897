"""
Wave algebra of the isothermal p-system in Lagrangian mass coordinates.

    u_t - v_y = 0,    v_t + p(u)_y = 0,    p(u) = alpha^2 / u

A wave of family 1 with strength eps takes a left state to
u = u_l * exp(2 eps), a wave of family 2 to u = u_l * exp(-2 eps); both move
the velocity by 2 * alpha * h(eps). eps < 0 is a shock, eps > 0 a rarefaction.

Everything here is a pure function of its arguments.
"""
import logging
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from config import RIEMANN_TOL, ZERO_WAVE
from errors import BracketFailure, NonPositiveInput, NonPositiveVolume

logger = logging.getLogger(__name__)

FAMILIES = (1, 2)


@dataclass(frozen=True)
class LagState:
    """Constant state: specific volume u and velocity v."""
    u: float
    v: float

    @property
    def rho(self) -> float:
        return 1.0 / self.u


@dataclass(frozen=True)
class WaveSizes:
    """Solution of a Riemann problem: at most one wave per family."""
    eps1: float
    eps2: float
    middle: LagState


def check_volume(*volumes: float) -> None:
    for u in volumes:
        if not (u > 0.0 and math.isfinite(u)):
            raise NonPositiveVolume(f"specific volume must be positive and finite, got {u!r}")


def _check_family(family: int) -> None:
    if family not in FAMILIES:
        raise ValueError(f"family must be 1 or 2, got {family!r}")


def h(eps: float) -> float:
    """Velocity increment per unit 2*alpha along a wave curve."""
    return eps if eps >= 0.0 else math.sinh(eps)


def h_prime(eps: float) -> float:
    return 1.0 if eps >= 0.0 else math.cosh(eps)


def lax_state(family: int, left: LagState, eps: float, alpha: float) -> LagState:
    """State reached from `left` along the family curve at parameter eps."""
    _check_family(family)
    sign = 1.0 if family == 1 else -1.0
    return LagState(
        u=left.u * math.exp(2.0 * sign * eps),
        v=left.v + 2.0 * alpha * h(eps),
    )


def solve_riemann(
    left: LagState, right: LagState, alpha: float, floor: float = ZERO_WAVE
) -> WaveSizes:
    """
    Solve the Riemann problem (left, right).

    The strengths satisfy

        eps2 - eps1      = 1/2 ln(u_l / u_r)
        h(eps1) + h(eps2) = (v_r - v_l) / (2 alpha)

    Eliminating eps2 leaves one strictly increasing equation in eps1 whose
    root lies in [-B, B], B = max(|1/2 ln(u_r/u_l)|, |v_r - v_l| / (2 alpha)).
    The root is bracketed there, found with brentq and polished by Newton.
    Strengths below `floor` are emitted as "no wave".
    """
    check_volume(left.u, right.u)
    if not alpha > 0.0:
        raise NonPositiveInput(f"alpha must be positive, got {alpha!r}")

    gap = 0.5 * math.log(left.u / right.u)
    target = (right.v - left.v) / (2.0 * alpha)
    if gap == 0.0 and target == 0.0:
        return WaveSizes(0.0, 0.0, left)

    def residual(e: float) -> float:
        return h(e) + h(e + gap) - target

    # residual' >= 2, so padding the a priori bracket makes the signs strict
    bound = max(abs(gap), abs(target))
    pad = 1e-6 * (1.0 + bound)
    lo, hi = -bound - pad, bound + pad
    if residual(lo) > 0.0 or residual(hi) < 0.0:
        raise BracketFailure(f"no sign change on [{lo}, {hi}] for gap={gap}, target={target}")

    eps1 = brentq(residual, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=200)
    for _ in range(3):
        r = residual(eps1)
        if r == 0.0:
            break
        eps1 -= r / (h_prime(eps1) + h_prime(eps1 + gap))

    tol = RIEMANN_TOL * max(1.0, abs(target))
    if abs(residual(eps1)) > tol:
        raise BracketFailure(f"Riemann residual {residual(eps1):.3e} above {tol:.1e}")

    eps2 = eps1 + gap

    # Zero-wave policy; the surviving strength keeps eps2 - eps1 = gap
    if abs(eps1) < floor and abs(eps2) < floor:
        eps1 = eps2 = 0.0
    elif abs(eps1) < floor:
        eps1, eps2 = 0.0, gap
    elif abs(eps2) < floor:
        eps1, eps2 = -gap, 0.0

    return WaveSizes(eps1, eps2, lax_state(1, left, eps1, alpha))


def shock_speed(family: int, u_left: float, u_right: float, alpha: float) -> float:
    """Lagrangian Rankine-Hugoniot speed of a shock joining u_left and u_right."""
    _check_family(family)
    check_volume(u_left, u_right)
    speed = alpha / math.sqrt(u_left * u_right)
    return -speed if family == 1 else speed


def char_speed(family: int, state: LagState, alpha: float) -> float:
    _check_family(family)
    check_volume(state.u)
    return -alpha / state.u if family == 1 else alpha / state.u


def front_speed(family: int, eps: float, left: LagState, right: LagState, alpha: float) -> float:
    """Assigned speed: exact RH for shocks, right-state characteristic for rarefactions."""
    if eps < 0.0:
        return shock_speed(family, left.u, right.u, alpha)
    return char_speed(family, right, alpha)
