import math

import pytest

from errors import (
    EventCapExceeded,
    InconsistentPattern,
    NonAdjacentFronts,
    NonPositiveInput,
    NotAtBoundary,
    RarefactionTooLarge,
)
from front_tracker import (
    Event,
    EventKind,
    ExitRecord,
    FrontStatus,
    InteractionRecord,
    absorb_at_boundary,
    advance,
    build_wave_fan,
    check_consistency,
    init_pattern,
    next_event,
    process_event,
    rebuild_queue,
    resolve_interaction,
    split_rarefaction,
)
from functionals import c_of_q
from riemann_core import LagState, lax_state


def test_split_rarefaction():
    pieces = split_rarefaction(0.25, 0.1)
    assert len(pieces) == 3
    assert sum(pieces) == pytest.approx(0.25, abs=1e-15)
    assert all(p <= 0.1 for p in pieces)
    assert split_rarefaction(0.05, 0.1) == [0.05]


def test_split_rarefaction_rejects_shock():
    with pytest.raises(NonPositiveInput):
        split_rarefaction(-0.1, 0.1)


def test_constant_data_has_no_fronts():
    pattern = init_pattern([(1.0, LagState(0.5, 0.0))], alpha=1.0, eta=0.1)
    assert pattern.fronts == []
    assert pattern.n_active == 0
    assert next_event(pattern, 100.0) is None


def test_init_pattern_two_shocks(two_shock_pattern):
    pattern = two_shock_pattern
    f1, f2 = pattern.fronts
    assert (f1.family, f2.family) == (1, 2)
    assert f1.eps < 0 and f2.eps < 0
    assert f1.eps == pytest.approx(math.asinh(-0.15), abs=1e-13)
    assert f1.speed < 0 < f2.speed
    assert (f1.gen, f2.gen) == (1, 1)
    assert f2.right_state == LagState(1.0, -0.3)
    assert pattern.M == 1.0
    check_consistency(pattern)


def test_init_pattern_splits_rarefactions():
    left = LagState(1.0, 0.0)
    right = lax_state(1, left, 0.25, 1.0)
    pattern = init_pattern([(0.5, left), (0.5, right)], alpha=1.0, eta=0.1)
    assert [f.family for f in pattern] == [1, 1, 1]
    assert sum(f.eps for f in pattern) == pytest.approx(0.25, abs=1e-12)
    assert pattern.fronts[-1].right_state == right
    check_consistency(pattern)


def test_event_tie_order():
    exit_ = Event(1.0, EventKind.BOUNDARY_EXIT, 5)
    interaction = Event(1.0, EventKind.INTERACTION, 1)
    step = Event(1.0, EventKind.TIME_STEP, 0)
    assert sorted([step, interaction, exit_]) == [exit_, interaction, step]


def test_shocks_leave_the_domain(two_shock_pattern):
    pattern = two_shock_pattern
    L0 = sum(abs(f.eps) for f in pattern)
    f1, f2 = pattern.fronts
    middle = f1.right_state

    pattern, records = advance(pattern, 1.0)

    assert [r.kind for r in records] == ["exit", "exit"]
    assert pattern.n_active == 0
    assert pattern.standby_left == [f1] and pattern.standby_right == [f2]
    assert f1.status is FrontStatus.STANDBY_LEFT
    assert f1.exit_time == pytest.approx(0.5 / abs(f1.speed), rel=1e-12)
    assert pattern.left_state == middle
    L_out = sum(abs(f.eps) for f in pattern.standby_left + pattern.standby_right)
    assert L_out == pytest.approx(L0, abs=1e-15)
    assert pattern.t == 1.0


def test_crossing_preserves_strengths(crossing_pattern):
    pattern = crossing_pattern
    inner_2 = pattern.fronts[1]
    inner_1 = pattern.fronts[2]
    assert (inner_2.family, inner_1.family) == (2, 1)

    event = next_event(pattern, 10.0)
    assert event.kind is EventKind.INTERACTION
    assert event.fronts == (inner_2, inner_1)
    assert event.time == pytest.approx((1 / 6) / inner_2.speed, rel=1e-12)

    pattern, records = advance(pattern, event.time)
    record = records[-1]
    assert isinstance(record, InteractionRecord)
    assert not record.same_family
    assert record.y == pytest.approx(0.5, abs=1e-12)
    eps1, eps2 = record.eps_out
    assert eps1 == pytest.approx(inner_1.eps, abs=1e-12)
    assert eps2 == pytest.approx(inner_2.eps, abs=1e-12)
    assert [f.gen for f in record.outgoing] == [1, 1]
    assert inner_1.status is FrontStatus.ENDED
    check_consistency(pattern)


def test_same_family_generations():
    # a faster 2-shock behind a slower 2-rarefaction
    s0 = LagState(1.0, 0.0)
    s1 = lax_state(2, s0, -0.3, 1.0)
    s2 = lax_state(2, s1, 0.05, 1.0)
    pattern = init_pattern([(0.1, s0), (0.1, s1), (0.8, s2)], alpha=1.0, eta=0.1)
    shock, rarefaction = pattern.fronts
    assert (shock.eps < 0.0, rarefaction.eps > 0.0) == (True, True)
    assert shock.speed > rarefaction.speed
    shock.gen, rarefaction.gen = 2, 3

    pattern, records = advance(pattern, 1.0)
    record = records[0]
    assert record.kind == "interaction"
    assert record.same_family
    by_family = {f.family: f for f in record.outgoing}
    assert by_family[2].gen == 2
    assert by_family[2].eps < 0.0
    assert by_family[1].gen == 4
    assert record.eps_refl < 0.0
    check_consistency(pattern)


def _two_wave_interaction(first: float, second: float, gens=(1, 1)) -> InteractionRecord:
    """First interaction of two adjacent 2-waves of strengths first|second."""
    s0 = LagState(1.0, 0.0)
    s1 = lax_state(2, s0, first, 1.0)
    s2 = lax_state(2, s1, second, 1.0)
    pattern = init_pattern([(0.1, s0), (0.1, s1), (0.8, s2)], alpha=1.0, eta=0.25)
    a, b = pattern.fronts
    assert a.speed > b.speed
    a.gen, b.gen = gens
    pattern, records = advance(pattern, 1.0)
    assert records[0].kind == "interaction"
    check_consistency(pattern)
    return records[0]


def test_two_shocks_merge_and_reflect_a_rarefaction():
    record = _two_wave_interaction(-0.3, -0.2, gens=(1, 2))
    by_family = {f.family: f for f in record.outgoing}
    assert record.same_family
    assert by_family[2].eps < 0.0
    assert 0.3 < abs(by_family[2].eps) < 0.5
    assert by_family[2].gen == 1
    assert by_family[1].eps > 0.0
    assert by_family[1].gen == 3
    assert record.eps_refl == pytest.approx(by_family[1].eps)


def test_rarefaction_hitting_shock_reflects_bounded_shock():
    record = _two_wave_interaction(0.2, -0.3)
    s0, s1 = LagState(1.0, 0.0), record.incoming[0].right_state
    s2 = record.incoming[1].right_state
    q = 0.5 * (abs(math.log(s1.u / s0.u)) + abs(math.log(s2.u / s1.u))) + 0.5 * (abs(s1.v - s0.v) + abs(s2.v - s1.v))
    assert record.eps_refl < 0.0
    assert abs(record.eps_refl) <= c_of_q(q) * 0.2
    assert [f.eps < 0.0 for f in record.outgoing] == [True, True]


def test_init_pattern_fans_single_rarefaction():
    right = LagState(math.e, 1.0)
    pattern = init_pattern([(0.5, LagState(1.0, 0.0)), (0.5, right)], alpha=1.0, eta=0.2)
    fronts = pattern.fronts
    assert [f.family for f in fronts] == [1, 1, 1]
    assert [f.eps for f in fronts] == pytest.approx([1 / 6] * 3, abs=1e-12)
    assert all(f.y == 0.5 for f in fronts)
    assert fronts[-1].right_state == right


def _one_shock_train(*positions: float):
    """Weak 1-shocks at the given positions on (0, 1)."""
    cells, state, last = [], LagState(1.0, 0.0), 0.0
    for y in positions:
        cells.append((y - last, state))
        state = lax_state(1, state, -0.05, 1.0)
        last = y
    cells.append((1.0 - last, state))
    return init_pattern(cells, alpha=1.0, eta=0.25)


@pytest.mark.parametrize("positions, speeds, kind, y", [
    ((0.3, 0.5), (1.0, -1.0), EventKind.INTERACTION, 0.4),
    ((0.2,), (-2.0,), EventKind.BOUNDARY_EXIT, 0.0),
])
def test_next_event_follows_linear_motion(positions, speeds, kind, y):
    pattern = _one_shock_train(*positions)
    for f, speed in zip(pattern.fronts, speeds):
        f.speed = speed
    rebuild_queue(pattern)

    event = next_event(pattern, 1.0)
    assert event.kind is kind
    assert event.time == pytest.approx(0.1, abs=1e-15)
    record = process_event(pattern, event)
    assert record.t == pytest.approx(0.1, abs=1e-15)
    if isinstance(record, ExitRecord):
        assert record.side == "left"
        assert record.front.y == y
    else:
        assert record.y == pytest.approx(y, abs=1e-15)


def test_resolve_interaction_requires_neighbors(crossing_pattern):
    first, _, third, _ = crossing_pattern.fronts
    with pytest.raises(NonAdjacentFronts):
        resolve_interaction(crossing_pattern, first, third, 0.5, 0.0)


def test_absorb_requires_boundary(two_shock_pattern):
    f1 = two_shock_pattern.fronts[0]
    with pytest.raises(NotAtBoundary):
        absorb_at_boundary(two_shock_pattern, f1, "left")


def test_event_cap(two_shock_pattern):
    two_shock_pattern.event_cap = 1
    with pytest.raises(EventCapExceeded):
        advance(two_shock_pattern, 1.0)
    assert two_shock_pattern.events_processed == 1


def test_front_cap():
    cells = [(0.5, LagState(1.0, 0.3)), (0.5, LagState(1.0, -0.3))]
    with pytest.raises(EventCapExceeded):
        init_pattern(cells, alpha=1.0, eta=0.25, max_fronts=1)


def test_guard_policy_rejects_large_rarefaction():
    pattern = init_pattern([(1.0, LagState(1.0, 0.0))], alpha=1.0, eta=0.15)
    with pytest.raises(RarefactionTooLarge):
        build_wave_fan(pattern, LagState(1.0, 0.0), LagState(math.e, 1.0), 0.5, (1, 1))


def test_split_policy_refans_large_rarefaction():
    pattern = init_pattern([(1.0, LagState(1.0, 0.0))], alpha=1.0, eta=0.15, rarefaction_policy="split")
    right = LagState(math.e, 1.0)
    fronts = build_wave_fan(pattern, LagState(1.0, 0.0), right, 0.5, (1, 1))
    assert len(fronts) == 4
    assert sum(f.eps for f in fronts) == pytest.approx(0.5, abs=1e-12)
    assert fronts[-1].right_state == right
    assert all(f.speed < 0 for f in fronts)


def test_advance_stops_before_time_step(two_shock_pattern):
    two_shock_pattern.dt = 0.1
    with pytest.raises(InconsistentPattern):
        advance(two_shock_pattern, 0.2)
    event = next_event(two_shock_pattern, 0.2)
    assert event.kind is EventKind.TIME_STEP
    assert event.time == pytest.approx(0.1)


def test_check_consistency_detects_drift(two_shock_pattern):
    f1 = two_shock_pattern.fronts[0]
    f1.right_state = LagState(f1.right_state.u * 1.01, f1.right_state.v)
    with pytest.raises(InconsistentPattern):
        check_consistency(two_shock_pattern)
