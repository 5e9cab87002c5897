import json
import math

import pytest

from errors import EmptySupport, InputError, NonPositiveDensity, SchemaError
from initial_data import load_initial_data, normalize, parse_initial_data
from riemann_core import LagState


def _raw(cells, a0=0.0, b0=None):
    if b0 is None:
        b0 = a0 + sum(c["len"] for c in cells)
    return {"a0": a0, "b0": b0, "cells": cells}


def test_riemann_jump_bulk(dataset):
    data = dataset("riemann_jump")
    assert data.name == "riemann_jump"
    assert data.M == pytest.approx(1.5)
    assert data.M1 == 0.0
    assert data.q == pytest.approx(0.5 * math.log(2))
    assert (data.u_tilde_0, data.u_tilde_M) == (1.0, 0.5)


def test_constant_dataset(dataset):
    data = dataset("constant")
    assert data.M == 1.0
    assert data.u_tilde_0 == data.u_tilde_M == 0.5
    assert data.q == 0.0


def test_lagrangian_cells(dataset):
    cells = dataset("riemann_jump").lagrangian_cells()
    assert cells == [(0.5, LagState(1.0, 0.0)), (1.0, LagState(0.5, 0.0))]


def test_zero_density_rejected(tmp_path):
    path = tmp_path / "vacuum.json"
    path.write_text(json.dumps(_raw([{"len": 0.5, "rho": 1.0, "v": 0.0}, {"len": 0.5, "rho": 0.0, "v": 0.0}])))
    with pytest.raises(NonPositiveDensity) as e:
        load_initial_data(path)
    assert e.value.exit_code == 2


@pytest.mark.parametrize("raw", [
    {"a0": 0.0, "cells": [{"len": 1.0, "rho": 1.0, "v": 0.0}]},
    _raw([{"len": 1.0, "rho": "dense", "v": 0.0}]),
    _raw([{"len": 1.0, "rho": 1.0}]),
    _raw([{"len": 0.0, "rho": 1.0, "v": 0.0}], b0=1.0),
    _raw([{"len": 0.5, "rho": 1.0, "v": 0.0}], b0=1.0),
    {"a0": 0.0, "b0": 1.0, "cells": "none"},
])
def test_schema_errors(raw):
    with pytest.raises(SchemaError):
        parse_initial_data(raw)


@pytest.mark.parametrize("raw", [
    {"a0": 0.0, "b0": 1.0, "cells": []},
    {"a0": 1.0, "b0": 1.0, "cells": [{"len": 0.0, "rho": 1.0, "v": 0.0}]},
])
def test_empty_support(raw):
    with pytest.raises(EmptySupport):
        parse_initial_data(raw)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(SchemaError):
        load_initial_data(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        load_initial_data(bad)


def test_normalize_uniform_flow():
    data = parse_initial_data(_raw([{"len": 1.0, "rho": 1.0, "v": 3.0}]))
    shifted = normalize(data)
    assert shifted.v == (0.0,)
    assert shifted.v_bar_shift == 3.0
    assert normalize(shifted) is shifted


def test_normalize_weighted_mean():
    data = parse_initial_data(_raw([
        {"len": 0.5, "rho": 1.0, "v": 1.0},
        {"len": 0.5, "rho": 2.0, "v": 0.0},
    ]))
    assert data.v_bar == pytest.approx(1 / 3)
    shifted = normalize(data)
    assert shifted.v == pytest.approx((2 / 3, -1 / 3))
    assert shifted.M1 == pytest.approx(0.0, abs=1e-15)
    assert shifted.q == pytest.approx(data.q)
