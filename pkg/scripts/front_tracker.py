"""
Event-driven front tracking on the Lagrangian interval (0, M).

Active fronts form a doubly linked list ordered by position. Each front
carries the state of the cell to its right; the leftmost cell state lives on
the pattern. A front moves linearly, y(t) = y + speed * (t - t_ref), so
nothing has to be touched between events.

Pending interactions and boundary exits sit in a heap and are validated
lazily when they reach the top: an entry is stale once one of its fronts has
ended, changed neighbor or had its speed perturbed. Time steps are not kept
in the heap; next_event synthesizes them from the pattern's step counter.

Ties at equal times resolve as boundary exit < interaction < time step.
"""
import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterator, Optional, Sequence, Union

from config import (
    CONSISTENCY_TOL,
    DEFAULT_EVENT_CAP,
    DEFAULT_RAREFACTION_POLICY,
    PERTURB_SCALE,
    RAREFACTION_POLICIES,
    RAREFACTION_SLACK,
    SIMULTANEITY_TOL,
    ZERO_WAVE,
)
from errors import (
    EmptyDomain,
    EventCapExceeded,
    InconsistentPattern,
    NonAdjacentFronts,
    NonPositiveInput,
    NotAtBoundary,
    RarefactionTooLarge,
)
from riemann_core import LagState, WaveSizes, check_volume, front_speed, lax_state, solve_riemann

logger = logging.getLogger(__name__)

# Fronts may sit this close to a boundary when their exit is processed
BOUNDARY_TOL = 1e-9


class FrontStatus(str, Enum):
    ACTIVE = "active"
    STANDBY_LEFT = "standby_left"
    STANDBY_RIGHT = "standby_right"
    ENDED = "ended"  # consumed by an interaction or a time step


class EventKind(IntEnum):
    # value doubles as the tie-break priority at equal times
    BOUNDARY_EXIT = 0
    INTERACTION = 1
    TIME_STEP = 2


@dataclass(eq=False)
class Front:
    """A single discontinuity. `y` is its position at time `t_ref`."""
    id: int
    y: float
    t_ref: float
    family: int
    eps: float
    speed: float
    gen: int
    right_state: LagState
    u_jump: float = 0.0  # |u_right - u_left|, fixed for the front's lifetime
    y_birth: float = 0.0
    t_birth: float = 0.0
    status: FrontStatus = FrontStatus.ACTIVE
    exit_time: Optional[float] = None
    rev: int = 0
    prev: Optional["Front"] = field(default=None, repr=False)
    next: Optional["Front"] = field(default=None, repr=False)

    @property
    def kind(self) -> str:
        return "shock" if self.eps < 0.0 else "rarefaction"

    @property
    def active(self) -> bool:
        return self.status is FrontStatus.ACTIVE

    def position(self, t: float) -> float:
        if not self.active:
            return self.y
        return self.y + self.speed * (t - self.t_ref)

    def rebase(self, t: float) -> None:
        self.y = self.position(t)
        self.t_ref = t

    def end(self, t: float, y: Optional[float] = None) -> None:
        self.y = self.position(t) if y is None else y
        self.t_ref = t
        self.status = FrontStatus.ENDED


@dataclass(order=True)
class Event:
    time: float
    kind: EventKind
    seq: int
    fronts: tuple = field(default=(), compare=False)
    revs: tuple = field(default=(), compare=False)
    side: Optional[str] = field(default=None, compare=False)
    step: Optional[int] = field(default=None, compare=False)


@dataclass
class InteractionRecord:
    t: float
    y: float
    incoming: tuple
    outgoing: tuple
    same_family: bool
    eps_out: tuple  # total outgoing strength per family (eps1, eps2)
    eps_refl: float
    kind: str = "interaction"

    @property
    def ended(self) -> tuple:
        return self.incoming


@dataclass
class ExitRecord:
    t: float
    front: Front
    side: str
    kind: str = "exit"

    @property
    def ended(self) -> tuple:
        return (self.front,)


@dataclass(eq=False)
class WavePattern:
    """The piecewise-constant Lagrangian solution at time t."""
    t: float
    alpha: float
    M: float
    eta: float
    left_state: LagState
    head: Optional[Front] = None
    tail: Optional[Front] = None
    standby_left: list = field(default_factory=list)
    standby_right: list = field(default_factory=list)
    dt: Optional[float] = None  # fractional-step length, None disables time steps
    step_index: int = 1  # n of the next time step t^n = n * dt
    event_cap: int = DEFAULT_EVENT_CAP
    max_fronts: Optional[int] = None
    perturb_scale: float = PERTURB_SCALE
    rarefaction_policy: str = DEFAULT_RAREFACTION_POLICY
    wave_floor: float = ZERO_WAVE
    events_processed: int = 0
    n_active: int = 0
    n_perturbations: int = 0
    _queue: list = field(default_factory=list, repr=False)
    _ids: Iterator[int] = field(default_factory=lambda: itertools.count(1), repr=False)
    _seq: Iterator[int] = field(default_factory=itertools.count, repr=False)
    _perturbed: set = field(default_factory=set, repr=False)

    def __iter__(self) -> Iterator[Front]:
        f = self.head
        while f is not None:
            yield f
            f = f.next

    @property
    def fronts(self) -> list:
        return list(self)

    @property
    def states(self) -> list:
        return [self.left_state] + [f.right_state for f in self]

    @property
    def right_state(self) -> LagState:
        """State of the cell touching y = M."""
        return self.tail.right_state if self.tail is not None else self.left_state

    @property
    def next_time_step(self) -> float:
        if self.dt is None:
            return math.inf
        return self.step_index * self.dt

    def left_of(self, front: Front) -> LagState:
        return front.prev.right_state if front.prev is not None else self.left_state

    def new_id(self) -> int:
        return next(self._ids)


# =============================================================================
# Construction
# =============================================================================

def split_rarefaction(eps: float, eta: float) -> list:
    """Split a rarefaction of size eps into N = floor(eps/eta) + 1 equal fronts."""
    if not (eps > 0.0 and eta > 0.0):
        raise NonPositiveInput(f"rarefaction split needs eps > 0 and eta > 0, got {eps}, {eta}")
    n = math.floor(eps / eta) + 1
    return [eps / n] * n


def _rarefaction_pieces(pattern: WavePattern, eps: float, split_all: bool) -> list:
    if split_all:
        return split_rarefaction(eps, pattern.eta)
    if eps <= pattern.eta * (1.0 + RAREFACTION_SLACK):
        return [eps]
    if pattern.rarefaction_policy == "split":
        logger.debug("re-splitting outgoing rarefaction %.3e > eta=%.3e", eps, pattern.eta)
        return split_rarefaction(eps, pattern.eta)
    raise RarefactionTooLarge(
        f"outgoing rarefaction {eps:.6e} exceeds eta={pattern.eta:.6e} at t={pattern.t:.6f}"
    )


def build_wave_fan(
    pattern: WavePattern,
    left: LagState,
    right: LagState,
    y: float,
    gens: tuple,
    sizes: Optional[WaveSizes] = None,
    split_all: bool = False,
) -> list:
    """
    Fronts (1-waves then 2-waves) resolving the jump left|right at y.

    Rarefactions are split into fans when split_all is set; otherwise the
    rarefaction policy applies. The last state is pinned to `right`.
    """
    ws = sizes or solve_riemann(left, right, pattern.alpha, pattern.wave_floor)
    out = []
    state = left
    for family, eps, gen in ((1, ws.eps1, gens[0]), (2, ws.eps2, gens[1])):
        if eps == 0.0:
            continue
        pieces = _rarefaction_pieces(pattern, eps, split_all) if eps > 0.0 else [eps]
        for piece in pieces:
            nxt = lax_state(family, state, piece, pattern.alpha)
            out.append(Front(
                id=pattern.new_id(),
                y=y,
                t_ref=pattern.t,
                family=family,
                eps=piece,
                speed=front_speed(family, piece, state, nxt, pattern.alpha),
                gen=gen,
                right_state=nxt,
                u_jump=abs(nxt.u - state.u),
                y_birth=y,
                t_birth=pattern.t,
            ))
            state = nxt

    if out:
        last = out[-1]
        before = out[-2].right_state if len(out) > 1 else left
        last.right_state = right
        last.speed = front_speed(last.family, last.eps, before, right, pattern.alpha)
        last.u_jump = abs(right.u - before.u)
    return out


def _link(fronts: Sequence[Front]) -> None:
    for a, b in zip(fronts, fronts[1:]):
        a.next = b
        b.prev = a


def _splice(pattern: WavePattern, first: Front, last: Front, new: Sequence[Front]) -> None:
    """Replace the run first..last with `new`."""
    before, after = first.prev, last.next
    removed = 1
    f = first
    while f is not last:
        removed += 1
        f = f.next
    if new:
        _link(new)
        new[0].prev = before
        new[-1].next = after
        if before is not None:
            before.next = new[0]
        if after is not None:
            after.prev = new[-1]
        head_new, tail_new = new[0], new[-1]
    else:
        if before is not None:
            before.next = after
        if after is not None:
            after.prev = before
        head_new, tail_new = after, before
    if pattern.head is first:
        pattern.head = head_new
    if pattern.tail is last:
        pattern.tail = tail_new
    first.prev = None
    last.next = None
    pattern.n_active += len(new) - removed
    if pattern.max_fronts is not None and pattern.n_active > pattern.max_fronts:
        raise EventCapExceeded(
            f"{pattern.n_active} active fronts exceed the cap of {pattern.max_fronts}"
        )


def install_fronts(pattern: WavePattern, fronts: Sequence[Front]) -> None:
    """Make `fronts` the complete active list and rebuild the schedule."""
    for f in fronts:
        f.prev = f.next = None
    _link(fronts)
    pattern.head = fronts[0] if fronts else None
    pattern.tail = fronts[-1] if fronts else None
    pattern.n_active = len(fronts)
    if pattern.max_fronts is not None and pattern.n_active > pattern.max_fronts:
        raise EventCapExceeded(
            f"{pattern.n_active} active fronts exceed the cap of {pattern.max_fronts}"
        )
    rebuild_queue(pattern)


def init_pattern(
    cells: Sequence,
    alpha: float,
    eta: float,
    *,
    dt: Optional[float] = None,
    event_cap: int = DEFAULT_EVENT_CAP,
    max_fronts: Optional[int] = None,
    perturb_scale: float = PERTURB_SCALE,
    rarefaction_policy: str = DEFAULT_RAREFACTION_POLICY,
    wave_floor: float = ZERO_WAVE,
) -> WavePattern:
    """
    Build the pattern at t = 0+ from piecewise-constant Lagrangian data.

    `cells` is a sequence of (dy, LagState) pairs covering (0, M) left to
    right. Every breakpoint gets its Riemann fan, rarefactions are split
    with split_rarefaction, all fronts start with generation 1.
    """
    if not cells:
        raise EmptyDomain("no cells in the initial data")
    if not eta > 0.0:
        raise NonPositiveInput(f"eta must be positive, got {eta!r}")
    if rarefaction_policy not in RAREFACTION_POLICIES:
        raise ValueError(f"unknown rarefaction policy {rarefaction_policy!r}")
    for dy, state in cells:
        if not dy > 0.0:
            raise NonPositiveInput(f"cell mass must be positive, got {dy!r}")
        check_volume(state.u)
    M = math.fsum(dy for dy, _ in cells)
    if not M > 0.0:
        raise EmptyDomain(f"total mass must be positive, got {M}")

    pattern = WavePattern(
        t=0.0,
        alpha=alpha,
        M=M,
        eta=eta,
        left_state=cells[0][1],
        dt=dt,
        event_cap=event_cap,
        max_fronts=max_fronts,
        perturb_scale=perturb_scale,
        rarefaction_policy=rarefaction_policy,
        wave_floor=wave_floor,
    )

    fronts = []
    y = 0.0
    for (dy, left), (_, right) in zip(cells, cells[1:]):
        y += dy
        fronts.extend(build_wave_fan(pattern, left, right, y, (1, 1), split_all=True))
    install_fronts(pattern, fronts)
    logger.info("initial pattern: %d fronts on (0, %.6g)", len(fronts), M)
    return pattern


# =============================================================================
# Scheduling
# =============================================================================

def collision_time(pattern: WavePattern, a: Front, b: Front) -> Optional[float]:
    """Time at which adjacent a (left) and b (right) meet, or None if they never do."""
    if a.speed <= b.speed:
        return None
    gap = b.position(pattern.t) - a.position(pattern.t)
    return pattern.t + max(gap, 0.0) / (a.speed - b.speed)


def _push(pattern: WavePattern, event: Event) -> None:
    heapq.heappush(pattern._queue, event)


def schedule_pair(pattern: WavePattern, a: Optional[Front], b: Optional[Front]) -> None:
    if a is None or b is None:
        return
    t = collision_time(pattern, a, b)
    if t is None:
        return
    _push(pattern, Event(t, EventKind.INTERACTION, next(pattern._seq), (a, b), (a.rev, b.rev)))


def schedule_exit(pattern: WavePattern, f: Optional[Front]) -> None:
    if f is None:
        return
    y = f.position(pattern.t)
    if f.speed < 0.0:
        t, side = pattern.t + max(y, 0.0) / -f.speed, "left"
    elif f.speed > 0.0:
        t, side = pattern.t + max(pattern.M - y, 0.0) / f.speed, "right"
    else:
        return
    _push(pattern, Event(t, EventKind.BOUNDARY_EXIT, next(pattern._seq), (f,), (f.rev,), side=side))


def schedule_front(pattern: WavePattern, f: Front) -> None:
    schedule_exit(pattern, f)
    schedule_pair(pattern, f.prev, f)
    schedule_pair(pattern, f, f.next)


def rebuild_queue(pattern: WavePattern) -> None:
    pattern._queue.clear()
    for f in pattern:
        schedule_exit(pattern, f)
        schedule_pair(pattern, f, f.next)


def _is_valid(event: Event) -> bool:
    if any(not f.active or f.rev != r for f, r in zip(event.fronts, event.revs)):
        return False
    if event.kind is EventKind.INTERACTION:
        a, b = event.fronts
        return a.next is b
    f = event.fronts[0]
    return f.prev is None if event.side == "left" else f.next is None


def _peek(pattern: WavePattern) -> Optional[Event]:
    queue = pattern._queue
    while queue and not _is_valid(queue[0]):
        heapq.heappop(queue)
    return queue[0] if queue else None


def _perturb(pattern: WavePattern, victim: Front, trio: Sequence[Front]) -> None:
    """Nudge `victim` so the three-front tie splits into pairwise events."""
    delta = pattern.perturb_scale * pattern.eta
    sign = -1.0 if victim is trio[0] else 1.0
    victim.rebase(pattern.t)
    victim.speed += sign * delta
    victim.rev += 1
    pattern._perturbed.add(victim.id)
    pattern.n_perturbations += 1
    logger.debug("perturbed front %d by %+.3e at t=%.9f", victim.id, sign * delta, pattern.t)
    schedule_front(pattern, victim)


def _break_simultaneity(pattern: WavePattern, event: Event) -> bool:
    """Perturb once if a neighbor pair collides within the tolerance; True if it did."""
    a, b = event.fronts
    for other, trio in (((a.prev, a), (a.prev, a, b)), ((b, b.next), (a, b, b.next))):
        if other[0] is None or other[1] is None:
            continue
        t_other = collision_time(pattern, *other)
        if t_other is None or abs(t_other - event.time) > SIMULTANEITY_TOL:
            continue
        victim = max(trio, key=lambda f: f.id)
        if victim.id in pattern._perturbed:
            continue
        _perturb(pattern, victim, trio)
        return True
    return False


def next_event(pattern: WavePattern, t_stop: float) -> Optional[Event]:
    """
    Earliest pending event with time <= t_stop, or None.

    A time step at t^n <= t_stop is reported as a TIME_STEP event; exits and
    interactions at the same instant come first.
    """
    while True:
        event = _peek(pattern)
        step_time = pattern.next_time_step
        if event is None or event.time > step_time:
            if step_time <= t_stop:
                return Event(step_time, EventKind.TIME_STEP, -1, step=pattern.step_index)
            return None
        if event.time > t_stop:
            return None
        if event.time < pattern.t - SIMULTANEITY_TOL:
            raise InconsistentPattern(f"event at {event.time} lies before t={pattern.t}")
        if event.kind is EventKind.INTERACTION and _break_simultaneity(pattern, event):
            continue
        return event


# =============================================================================
# Event handlers
# =============================================================================

def _interaction_gens(a: Front, b: Front) -> tuple:
    if a.family != b.family:
        one, two = (a, b) if a.family == 1 else (b, a)
        return one.gen, two.gen
    keep, refl = min(a.gen, b.gen), max(a.gen, b.gen) + 1
    return (keep, refl) if a.family == 1 else (refl, keep)


def resolve_interaction(
    pattern: WavePattern, a: Front, b: Front, y: float, t: float
) -> InteractionRecord:
    """Replace the colliding pair a|b by the solution of their Riemann problem."""
    if not (a.active and b.active and a.next is b):
        raise NonAdjacentFronts(f"fronts {a.id} and {b.id} are not adjacent active fronts")
    pattern.t = max(pattern.t, t)
    y = min(max(y, 0.0), pattern.M)
    left, right = pattern.left_of(a), b.right_state
    before, after = a.prev, b.next

    ws = solve_riemann(left, right, pattern.alpha, pattern.wave_floor)
    outgoing = build_wave_fan(pattern, left, right, y, _interaction_gens(a, b), sizes=ws)
    a.end(pattern.t, y)
    b.end(pattern.t, y)
    _splice(pattern, a, b, outgoing)

    for f in outgoing:
        schedule_exit(pattern, f)
    if outgoing:
        schedule_pair(pattern, before, outgoing[0])
        schedule_pair(pattern, outgoing[-1], after)
    else:
        schedule_pair(pattern, before, after)

    same = a.family == b.family
    eps_refl = 0.0
    if same:
        eps_refl = ws.eps2 if a.family == 1 else ws.eps1
    logger.debug(
        "interaction t=%.9f y=%.6f: (%d:%+.3e, %d:%+.3e) -> (%+.3e, %+.3e)",
        pattern.t, y, a.family, a.eps, b.family, b.eps, ws.eps1, ws.eps2,
    )
    return InteractionRecord(
        t=pattern.t,
        y=y,
        incoming=(a, b),
        outgoing=tuple(outgoing),
        same_family=same,
        eps_out=(ws.eps1, ws.eps2),
        eps_refl=eps_refl,
    )


def absorb_at_boundary(pattern: WavePattern, front: Front, side: str) -> ExitRecord:
    """Freeze `front` in the standby ledger of `side` and update the boundary cell."""
    if not front.active:
        raise NotAtBoundary(f"front {front.id} is not active")
    target = 0.0 if side == "left" else pattern.M
    outermost = front.prev is None if side == "left" else front.next is None
    y = front.position(pattern.t)
    if not outermost or abs(y - target) > BOUNDARY_TOL * (1.0 + pattern.M):
        raise NotAtBoundary(f"front {front.id} at y={y:.12g} cannot exit at the {side} boundary")

    if side == "left":
        pattern.left_state = front.right_state
        new_edge = front.next
        pattern.head = new_edge
        if new_edge is not None:
            new_edge.prev = None
        else:
            pattern.tail = None
        front.status = FrontStatus.STANDBY_LEFT
        pattern.standby_left.append(front)
    else:
        new_edge = front.prev
        pattern.tail = new_edge
        if new_edge is not None:
            new_edge.next = None
        else:
            pattern.head = None
        front.status = FrontStatus.STANDBY_RIGHT
        pattern.standby_right.append(front)

    front.y = target
    front.t_ref = pattern.t
    front.exit_time = pattern.t
    front.prev = front.next = None
    pattern.n_active -= 1
    # a simultaneous exit of the new outermost front may have been dropped as stale
    schedule_exit(pattern, new_edge)
    logger.debug("front %d (eps=%+.3e) absorbed %s at t=%.9f", front.id, front.eps, side, pattern.t)
    return ExitRecord(t=pattern.t, front=front, side=side)


def process_event(pattern: WavePattern, event: Event) -> Union[InteractionRecord, ExitRecord]:
    if pattern.events_processed >= pattern.event_cap:
        raise EventCapExceeded(f"event cap of {pattern.event_cap} reached at t={pattern.t:.6f}")
    top = _peek(pattern)
    if top is not event:
        raise InconsistentPattern("event is not the next pending event")
    heapq.heappop(pattern._queue)
    pattern.t = max(pattern.t, event.time)
    pattern.events_processed += 1
    if event.kind is EventKind.INTERACTION:
        a, b = event.fronts
        y = 0.5 * (a.position(pattern.t) + b.position(pattern.t))
        return resolve_interaction(pattern, a, b, y, pattern.t)
    return absorb_at_boundary(pattern, event.fronts[0], event.side)


def iter_events(pattern: WavePattern, t_target: float) -> Iterator:
    """Process events up to t_target one at a time, yielding each record."""
    if t_target < pattern.t - SIMULTANEITY_TOL:
        raise InconsistentPattern(f"cannot advance backwards from {pattern.t} to {t_target}")
    while True:
        event = next_event(pattern, t_target)
        if event is None:
            break
        if event.kind is EventKind.TIME_STEP:
            if event.time < t_target - SIMULTANEITY_TOL:
                raise InconsistentPattern(
                    f"advance to {t_target} would cross the time step at {event.time}"
                )
            break
        yield process_event(pattern, event)
    pattern.t = max(pattern.t, t_target)


def advance(pattern: WavePattern, t_target: float) -> tuple:
    """Advance to t_target; returns (pattern, processed records)."""
    records = list(iter_events(pattern, t_target))
    return pattern, records


def check_consistency(pattern: WavePattern, tol: float = CONSISTENCY_TOL) -> None:
    """Raise InconsistentPattern if ordering or states vs strengths drifted."""
    state = pattern.left_state
    y_prev = 0.0
    count = 0
    for f in pattern:
        y = f.position(pattern.t)
        if y < y_prev - SIMULTANEITY_TOL or y > pattern.M + BOUNDARY_TOL * (1.0 + pattern.M):
            raise InconsistentPattern(f"front {f.id} at y={y:.12g} out of order")
        expected = lax_state(f.family, state, f.eps, pattern.alpha)
        err = max(
            abs(expected.u - f.right_state.u) / f.right_state.u,
            abs(expected.v - f.right_state.v) / max(1.0, abs(f.right_state.v)),
        )
        if err > tol:
            raise InconsistentPattern(f"front {f.id}: state drift {err:.3e} above {tol:.1e}")
        state = f.right_state
        y_prev = y
        count += 1
    if count != pattern.n_active:
        raise InconsistentPattern(f"front count {count} != bookkeeping {pattern.n_active}")
