"""
Initial-data files: piecewise-constant density and velocity on [a0, b0].

File layout (JSON):

    {
      "name": "two_shock",            (optional)
      "a0": 0.0,
      "b0": 1.0,
      "cells": [{"len": 0.5, "rho": 1.0, "v": 0.3}, ...]
    }

Cell lengths must add up to b0 - a0. The Lagrangian data on (0, M) follows
from the exact mass map: a cell of length l and density rho becomes a cell
of mass rho * l with specific volume 1 / rho.
"""
import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Union

from config import DEFAULT_ALPHA
from errors import EmptySupport, NonPositiveDensity, SchemaError
from functionals import initial_bulk
from riemann_core import LagState

logger = logging.getLogger(__name__)

# Relative tolerance on sum(len) == b0 - a0
LENGTH_TOL = 1e-9


@dataclass(frozen=True)
class InitialData:
    a0: float
    b0: float
    lengths: tuple
    rho: tuple
    v: tuple
    v_bar_shift: float = 0.0  # mean velocity removed by normalize()
    alpha: float = DEFAULT_ALPHA
    name: str = ""

    @property
    def M(self) -> float:
        return math.fsum(r * l for r, l in zip(self.rho, self.lengths))

    @property
    def M1(self) -> float:
        return math.fsum(r * v * l for r, v, l in zip(self.rho, self.v, self.lengths))

    @property
    def v_bar(self) -> float:
        return self.M1 / self.M

    @property
    def u_tilde_0(self) -> float:
        return 1.0 / self.rho[0]

    @property
    def u_tilde_M(self) -> float:
        return 1.0 / self.rho[-1]

    @property
    def q(self) -> float:
        return initial_bulk(self, self.alpha)

    def lagrangian_cells(self) -> list:
        """[(dy, LagState)] on (0, M), left to right."""
        return [
            (r * l, LagState(u=1.0 / r, v=v))
            for r, v, l in zip(self.rho, self.v, self.lengths)
        ]


def _number(cell: dict, key: str, index: int) -> float:
    if key not in cell:
        raise SchemaError(f"cell {index} is missing '{key}'")
    value = cell[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"cell {index}: '{key}' must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"cell {index}: '{key}' must be finite, got {value!r}")
    return value


def parse_initial_data(raw: dict, alpha: float = DEFAULT_ALPHA, name: str = "") -> InitialData:
    """Validate a decoded initial-data object."""
    if not isinstance(raw, dict):
        raise SchemaError("initial data must be a JSON object")
    for key in ("a0", "b0", "cells"):
        if key not in raw:
            raise SchemaError(f"missing top-level key '{key}'")
    try:
        a0, b0 = float(raw["a0"]), float(raw["b0"])
    except (TypeError, ValueError) as e:
        raise SchemaError(f"a0/b0 must be numbers: {e}") from e
    cells = raw["cells"]
    if not isinstance(cells, list):
        raise SchemaError("'cells' must be a list")
    if not cells or not a0 < b0:
        raise EmptySupport(f"empty support [{a0}, {b0}] with {len(cells)} cells")

    lengths, rho, v = [], [], []
    for i, cell in enumerate(cells):
        if not isinstance(cell, dict):
            raise SchemaError(f"cell {i} must be an object")
        length = _number(cell, "len", i)
        density = _number(cell, "rho", i)
        if not length > 0.0:
            raise SchemaError(f"cell {i}: 'len' must be positive, got {length}")
        if not density > 0.0:
            raise NonPositiveDensity(f"cell {i}: density {density} is not positive")
        lengths.append(length)
        rho.append(density)
        v.append(_number(cell, "v", i))

    total = math.fsum(lengths)
    if abs(total - (b0 - a0)) > LENGTH_TOL * max(1.0, b0 - a0):
        raise SchemaError(f"cell lengths add up to {total}, support has length {b0 - a0}")

    return InitialData(
        a0=a0,
        b0=b0,
        lengths=tuple(lengths),
        rho=tuple(rho),
        v=tuple(v),
        alpha=alpha,
        name=raw.get("name", name),
    )


def load_initial_data(path: Union[str, Path], alpha: float = DEFAULT_ALPHA) -> InitialData:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"{path}: no such file")
    try:
        with open(path) as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON ({e})") from e
    data = parse_initial_data(raw, alpha=alpha, name=path.stem)
    logger.info(
        "loaded %s: %d cells on [%g, %g], M=%.6g, q=%.6g",
        path.name, len(data.rho), data.a0, data.b0, data.M, data.q,
    )
    return data


def normalize(data: InitialData) -> InitialData:
    """Shift velocities by the mean v_bar = M1 / M so the total momentum vanishes."""
    v_bar = data.v_bar
    if v_bar == 0.0:
        return data
    return replace(
        data,
        v=tuple(v - v_bar for v in data.v),
        v_bar_shift=data.v_bar_shift + v_bar,
    )
