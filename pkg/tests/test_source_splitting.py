import math

import pytest

from errors import TimeStepTooLarge
from functionals import compute_diag
from riemann_core import h
from source_splitting import (
    damp_velocities,
    eta_floor,
    implicit_split,
    resolve_time_step,
    timestep_bounds,
)


@pytest.mark.parametrize("x", [0.3, 0.05, -0.05, -0.3, -1.2])
def test_implicit_split_root(x):
    s, M = 0.1, 1.0
    y = implicit_split(x, s, M)
    assert h(y) + h(x + y) == pytest.approx(h(x) * (1 - M * s), abs=1e-13)
    # reflected has the opposite sign, transmitted keeps the sign
    assert y * x < 0
    assert (x + y) * x > 0
    assert abs(y) + abs(x + y) == pytest.approx(abs(x), abs=1e-15)


def test_implicit_split_trivial():
    assert implicit_split(0.0, 0.1, 1.0) == 0.0
    assert implicit_split(0.2, 0.0, 1.0) == 0.0


def test_implicit_split_rejects_large_step():
    with pytest.raises(TimeStepTooLarge):
        implicit_split(0.1, 1.0, 1.0)


def test_timestep_bounds():
    assert timestep_bounds(0.0) == (0.5, 0.5, 0.5)
    c1, c_plus, c_minus = timestep_bounds(1.0)
    assert c1 == pytest.approx(1 / (1 + math.cosh(1.0)))
    assert c_plus == 0.5
    assert c_minus == pytest.approx(math.cosh(1.0) / 2)


def test_eta_floor():
    assert eta_floor(0.3, 1.0, 0.125) == pytest.approx(0.5 * math.cosh(0.3) * 0.125 * 0.3)


def test_damp_velocities(two_shock_pattern):
    damp_velocities(two_shock_pattern, 1.0, 0.2)
    assert two_shock_pattern.left_state.v == pytest.approx(0.24)
    assert two_shock_pattern.right_state.v == pytest.approx(-0.24)


def test_damp_rejects_large_step(two_shock_pattern):
    with pytest.raises(TimeStepTooLarge):
        damp_velocities(two_shock_pattern, 1.0, 1.0)


def test_time_step_split(two_shock_pattern):
    pattern = two_shock_pattern
    pattern.dt = 0.125
    q = 0.3  # TV(v) / (2 alpha)
    pattern.t = 0.125
    before = compute_diag(pattern, xi=1.0, k_max=4)

    record = resolve_time_step(pattern, 1.0, 0.125)
    after = compute_diag(pattern, xi=1.0, k_max=4)

    assert record.n == 1
    assert pattern.step_index == 2
    assert len(record.outcomes) == 2
    assert pattern.n_active == 4

    c1, _, c_minus = timestep_bounds(q)
    for out in record.outcomes:
        assert abs(out.eps_same) + abs(out.eps_refl) == pytest.approx(abs(out.eps_in), abs=1e-14)
        assert out.eps_refl > 0 > out.eps_same
        assert out.gen_refl == out.gen_in + 1
        assert out.eps_refl == pytest.approx(implicit_split(out.eps_in, 0.125, 1.0), abs=1e-10)
        ratio = abs(out.eps_refl) / (0.125 * abs(out.eps_in))
        assert c1 <= ratio <= c_minus

    assert after.L == pytest.approx(before.L, abs=1e-14)
    assert after.momentum == pytest.approx((1 - 0.125) * before.momentum, abs=1e-14)
    assert after.v_left == pytest.approx(0.875 * before.v_left)
    assert {f.gen for f in pattern} == {1, 2}
