"""JSON payloads <-> lattice models, regions, weights and functions."""
from __future__ import annotations

import logging
from typing import Any, Optional

import numpy as np

from lab.errors import InvalidParameterError, ModelMismatchError
from lab.funcspace import LatticeFunction, indicator
from lab.group_lattice import CompactRegion, GroupKind, GroupModel, GroupPoint
from lab.weights import ConstantWeight, PowerLawWeight, StepWeight, TableWeight, WeightSpec

logger = logging.getLogger(__name__)

FUNCTION_FORMS = ("points", "indicator", "delta", "bump", "random")


def model_to_dict(model: GroupModel) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": model.kind.value, "dim": model.dim}
    if model.kind is GroupKind.DISCRETIZED_LINE:
        out["h"] = model.h
    if model.kind is GroupKind.FINITE_CYCLIC:
        out["q"] = model.q
    return out


def dict_to_model(data: dict[str, Any]) -> GroupModel:
    kind = data.get("kind", GroupKind.INTEGER_LATTICE.value)
    try:
        kind = GroupKind(kind)
    except ValueError as e:
        raise InvalidParameterError(f"unknown model kind {kind!r}") from e
    if kind is GroupKind.INTEGER_LATTICE:
        return GroupModel.integer_lattice(int(data.get("dim", 1)))
    if kind is GroupKind.DISCRETIZED_LINE:
        if "h" not in data:
            raise InvalidParameterError("a discretized line needs the cell width h")
        return GroupModel.discretized_line(float(data["h"]))
    if "q" not in data:
        raise InvalidParameterError("a finite cyclic model needs the modulus q")
    return GroupModel.finite_cyclic(int(data["q"]))


def point_to_list(x: GroupPoint) -> list[int]:
    return [int(c) for c in x]


def dict_to_point(model: GroupModel, raw: Any) -> GroupPoint:
    if isinstance(raw, bool):
        raise InvalidParameterError(f"not a lattice point: {raw!r}")
    return model.point(raw)


def region_to_dict(region: CompactRegion) -> dict[str, Any]:
    return {"points": [point_to_list(x) for x in region.sorted_cells()]}


def dict_to_region(model: GroupModel, data: Any) -> CompactRegion:
    """{"interval": [lo, hi]}, {"box": {"lo": [...], "hi": [...]}} or {"points": [...]}."""
    if not isinstance(data, dict) or len(data) != 1:
        raise InvalidParameterError("a region is one of {interval}, {box}, {points}")
    (form, body), = data.items()
    if form == "interval":
        lo, hi = body
        if model.dim != 1:
            raise InvalidParameterError("interval regions need a one-dimensional model")
        region = CompactRegion.from_points(model, range(int(lo), int(hi) + 1))
    elif form == "box":
        region = CompactRegion.box(model, body["lo"], body["hi"])
    elif form == "points":
        region = CompactRegion.from_points(model, body)
    else:
        raise InvalidParameterError(f"unknown region form {form!r}")
    return region


def weight_to_dict(w: WeightSpec) -> dict[str, Any]:
    if isinstance(w, ConstantWeight):
        return {"family": w.family, "c": w.c}
    if isinstance(w, StepWeight):
        return {"family": w.family, "v_neg": w.v_neg, "v_pos": w.v_pos, "direction": list(w.direction), "pivot": w.pivot}
    if isinstance(w, PowerLawWeight):
        return {"family": w.family, "gamma": w.gamma, "direction": list(w.direction)}
    if isinstance(w, TableWeight):
        entries = [[point_to_list(x), v] for x, v in sorted(w.entries.items())]
        return {"family": w.family, "entries": entries, "default": w.default}
    raise InvalidParameterError(f"cannot serialize weight {w!r}")


def dict_to_weight(data: dict[str, Any], dim: int = 1) -> WeightSpec:
    family = data.get("family")
    direction = tuple(data.get("direction", [1] + [0] * (dim - 1)))
    if family == "constant":
        return ConstantWeight(float(data.get("c", 1.0)))
    if family == "step":
        return StepWeight(
            v_neg=float(data.get("v_neg", 2.0)),
            v_pos=float(data.get("v_pos", 0.5)),
            direction=direction,
            pivot=int(data.get("pivot", 0)),
        )
    if family == "power_law":
        return PowerLawWeight(gamma=float(data.get("gamma", 1.0)), direction=direction)
    if family == "table":
        entries = {}
        for x, v in data.get("entries", []):
            key = (int(x),) if isinstance(x, int) else tuple(int(c) for c in x)
            entries[key] = float(v)
        return TableWeight(entries=entries, default=float(data.get("default", 1.0)))
    raise InvalidParameterError(f"unknown weight family {family!r}")


def function_to_dict(f: LatticeFunction) -> dict[str, Any]:
    return {"model": model_to_dict(f.model), "points": [[point_to_list(x), v] for x, v in f.items()]}


def _bump(model: GroupModel, body: dict[str, Any]) -> LatticeFunction:
    """Tent of the given height, zero at L∞ distance radius + 1 from the center."""
    center = dict_to_point(model, body["center"])
    radius = int(body.get("radius", 1))
    height = float(body.get("height", 1.0))
    if radius < 0:
        raise InvalidParameterError(f"bump radius must be >= 0, got {radius}")
    lo = [c - radius for c in center]
    hi = [c + radius for c in center]
    values = {}
    for x in CompactRegion.box(model, lo, hi).sorted_cells():
        dist = max(abs(xi - ci) for xi, ci in zip(x, center))
        values[x] = height * (1.0 - dist / (radius + 1))
    return LatticeFunction(model, values)


def _random(model: GroupModel, body: dict[str, Any], rng: np.random.Generator) -> LatticeFunction:
    lo, hi = int(body.get("lo", -5)), int(body.get("hi", 5))
    count = int(body.get("count", 5))
    if hi < lo or count < 0:
        raise InvalidParameterError(f"random function needs lo <= hi and count >= 0, got {body}")
    coords = rng.integers(lo, hi + 1, size=(count, model.dim))
    values = rng.uniform(-1.0, 1.0, size=count)
    return LatticeFunction.from_points(model, zip(coords.tolist(), values.tolist()))


def dict_to_function(
    model: GroupModel, data: Any, rng: Optional[np.random.Generator] = None
) -> LatticeFunction:
    """Decode one of the function payload forms (points, indicator, delta, bump, random).

    A "model" entry next to the form, as function_to_dict writes it, must match the given model.
    """
    if isinstance(data, dict) and "model" in data:
        data = dict(data)
        encoded = dict_to_model(data.pop("model"))
        if encoded != model:
            raise ModelMismatchError(f"function encoded on {model_to_dict(encoded)}, expected {model_to_dict(model)}")
    if not isinstance(data, dict) or len(data) != 1:
        raise InvalidParameterError(f"a function payload is one of {FUNCTION_FORMS}")
    (form, body), = data.items()
    if form == "points":
        return LatticeFunction.from_points(model, ((dict_to_point(model, x), v) for x, v in body))
    if form == "indicator":
        return indicator(model, dict_to_region(model, body))
    if form == "delta":
        return LatticeFunction.delta(model, dict_to_point(model, body))
    if form == "bump":
        return _bump(model, body)
    if form == "random":
        if rng is None:
            raise InvalidParameterError("random functions need a seeded generator")
        return _random(model, body, rng)
    raise InvalidParameterError(f"unknown function form {form!r}")
