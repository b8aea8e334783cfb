"""Positive bounded weights and the weight products that drive the criteria.

Every product is accumulated as a sum of logarithms. Scalar products use math.fsum, which
is correctly rounded and therefore independent of summation order; the vectorized tables
behind the searches use numpy cumulative sums.

With the group written additively:
    φ_n(x)      = Π_{s=1}^{n}   w(x + s·a)
    φ̃_n(x)      = (Π_{s=0}^{n-1} w(x - s·a))^{-1}
    R_n^{j,l}(x) = Π_{s=0}^{n-1} w_j(x - s·a) / w_l(x - s·a)
"""
from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, Mapping, Optional, Sequence, Union

import numpy as np

from lab.errors import DimensionMismatchError, EmptyRegionError, InvalidParameterError
from lab.group_lattice import CompactRegion, GroupModel, GroupPoint, PointLike

logger = logging.getLogger(__name__)


def _positive(name: str, v: float) -> float:
    v = float(v)
    if not (v > 0 and math.isfinite(v)):
        raise InvalidParameterError(f"weight parameter {name} must be positive and finite, got {v}")
    return v


class WeightSpec(ABC):
    """A bounded function w: G -> (0, inf)."""

    family: ClassVar[str]

    @abstractmethod
    def log_eval(self, coords: np.ndarray) -> np.ndarray:
        """log w at canonical integer coordinates (last axis = dim)."""

    @abstractmethod
    def eval(self, x: GroupPoint) -> float:
        ...

    @abstractmethod
    def upper_bound(self) -> float:
        ...


def _projection(coords: np.ndarray, direction: tuple[int, ...]) -> np.ndarray:
    if coords.shape[-1] != len(direction):
        raise DimensionMismatchError(
            f"weight direction {direction} does not match point dimension {coords.shape[-1]}"
        )
    return coords @ np.asarray(direction, dtype=np.int64)


@dataclass(frozen=True)
class ConstantWeight(WeightSpec):
    family: ClassVar[str] = "constant"
    c: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _positive("c", self.c))

    def log_eval(self, coords: np.ndarray) -> np.ndarray:
        return np.full(coords.shape[:-1], math.log(self.c))

    def eval(self, x: GroupPoint) -> float:
        return self.c

    def upper_bound(self) -> float:
        return self.c


@dataclass(frozen=True)
class StepWeight(WeightSpec):
    """v_neg where <x, direction> <= pivot, v_pos elsewhere."""

    family: ClassVar[str] = "step"
    v_neg: float = 2.0
    v_pos: float = 0.5
    direction: tuple[int, ...] = (1,)
    pivot: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "v_neg", _positive("v_neg", self.v_neg))
        object.__setattr__(self, "v_pos", _positive("v_pos", self.v_pos))
        object.__setattr__(self, "direction", tuple(int(d) for d in self.direction))
        object.__setattr__(self, "pivot", int(self.pivot))

    def log_eval(self, coords: np.ndarray) -> np.ndarray:
        t = _projection(coords, self.direction)
        return np.where(t <= self.pivot, math.log(self.v_neg), math.log(self.v_pos))

    def eval(self, x: GroupPoint) -> float:
        t = sum(int(xi) * d for xi, d in zip(x, self.direction))
        return self.v_neg if t <= self.pivot else self.v_pos

    def upper_bound(self) -> float:
        return max(self.v_neg, self.v_pos)


@dataclass(frozen=True)
class PowerLawWeight(WeightSpec):
    """w(x) = ((|t| + 2) / (|t| + 1))^gamma with t = <x, direction>."""

    family: ClassVar[str] = "power_law"
    gamma: float = 1.0
    direction: tuple[int, ...] = (1,)

    def __post_init__(self) -> None:
        if not math.isfinite(self.gamma):
            raise InvalidParameterError(f"power-law exponent must be finite, got {self.gamma}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "direction", tuple(int(d) for d in self.direction))

    def log_eval(self, coords: np.ndarray) -> np.ndarray:
        t = np.abs(_projection(coords, self.direction)).astype(float)
        return self.gamma * np.log1p(1.0 / (t + 1.0))

    def eval(self, x: GroupPoint) -> float:
        t = abs(sum(int(xi) * d for xi, d in zip(x, self.direction)))
        return ((t + 2) / (t + 1)) ** self.gamma

    def upper_bound(self) -> float:
        return 2.0 ** self.gamma if self.gamma >= 0 else 1.0


@dataclass(frozen=True)
class TableWeight(WeightSpec):
    """Tabulated values on finitely many points, a default everywhere else."""

    family: ClassVar[str] = "table"
    entries: Mapping[GroupPoint, float] = field(default_factory=dict)
    default: float = 1.0
    _log_entries: Mapping[GroupPoint, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        entries = {tuple(int(c) for c in k): _positive(f"entries[{k}]", v) for k, v in self.entries.items()}
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "default", _positive("default", self.default))
        object.__setattr__(self, "_log_entries", {k: math.log(v) for k, v in entries.items()})

    def log_eval(self, coords: np.ndarray) -> np.ndarray:
        flat = coords.reshape(-1, coords.shape[-1]).tolist()
        log_default = math.log(self.default)
        out = np.fromiter(
            (self._log_entries.get(tuple(row), log_default) for row in flat), dtype=float, count=len(flat)
        )
        return out.reshape(coords.shape[:-1])

    def eval(self, x: GroupPoint) -> float:
        return self.entries.get(tuple(x), self.default)

    def upper_bound(self) -> float:
        return max([self.default, *self.entries.values()])


@dataclass(frozen=True)
class ProductValue:
    """A weight product carried as its logarithm (-inf underflow, +inf overflow)."""

    log_value: float

    @property
    def value(self) -> float:
        if self.log_value > 709.78:
            return math.inf
        return math.exp(self.log_value)

    def reciprocal(self) -> "ProductValue":
        return ProductValue(-self.log_value)

    def less_than(self, bound: float) -> bool:
        """Strict comparison against a positive bound, done in the log domain."""
        return self.log_value < math.log(bound)


@dataclass(frozen=True)
class Forward:
    w: WeightSpec


@dataclass(frozen=True)
class BackwardInv:
    w: WeightSpec


@dataclass(frozen=True)
class Ratio:
    w_j: WeightSpec
    w_l: WeightSpec


ProductSelector = Union[Forward, BackwardInv, Ratio]


def _default_model(x: PointLike, model: Optional[GroupModel]) -> GroupModel:
    if model is not None:
        return model
    dim = 1 if isinstance(x, (int, np.integer)) else len(x)
    return GroupModel.integer_lattice(dim)


def _orbit(model: GroupModel, x: PointLike, a: PointLike, offsets: Sequence[int]) -> np.ndarray:
    """Canonical coordinates of x + s·a for s in offsets, shape (len(offsets), dim)."""
    xp = np.asarray(model.point(x), dtype=np.int64)
    ap = np.asarray(model.point(a), dtype=np.int64)
    s = np.asarray(offsets, dtype=np.int64).reshape(-1, 1)
    return model.normalize_array(xp[None, :] + s * ap[None, :])


def _check_n(n: int) -> int:
    if n < 0:
        raise InvalidParameterError(f"product length n must be >= 0, got {n}")
    return int(n)


def eval_weight(w: WeightSpec, x: PointLike, model: Optional[GroupModel] = None) -> float:
    m = _default_model(x, model)
    return w.eval(m.point(x))


def forward_product(
    w: WeightSpec, a: PointLike, x: PointLike, n: int, model: Optional[GroupModel] = None
) -> ProductValue:
    """φ_n(x) = Π_{s=1}^{n} w(x + s·a)."""
    n = _check_n(n)
    m = _default_model(x, model)
    logs = w.log_eval(_orbit(m, x, a, range(1, n + 1)))
    return ProductValue(math.fsum(logs.tolist()))


def backward_product_inv(
    w: WeightSpec, a: PointLike, x: PointLike, n: int, model: Optional[GroupModel] = None
) -> ProductValue:
    """φ̃_n(x) = (Π_{s=0}^{n-1} w(x - s·a))^{-1}."""
    n = _check_n(n)
    m = _default_model(x, model)
    logs = w.log_eval(_orbit(m, x, a, range(0, -n, -1)))
    return ProductValue(-math.fsum(logs.tolist()))


def ratio_product(
    w_j: WeightSpec, w_l: WeightSpec, a: PointLike, x: PointLike, n: int, model: Optional[GroupModel] = None
) -> ProductValue:
    """R_n^{j,l}(x) = Π_{s=0}^{n-1} w_j(x - s·a) / w_l(x - s·a)."""
    n = _check_n(n)
    m = _default_model(x, model)
    pts = _orbit(m, x, a, range(0, -n, -1))
    diffs = w_j.log_eval(pts) - w_l.log_eval(pts)
    return ProductValue(math.fsum(diffs.tolist()))


def product_at(
    which: ProductSelector, a: PointLike, x: PointLike, n: int, model: Optional[GroupModel] = None
) -> ProductValue:
    if isinstance(which, Forward):
        return forward_product(which.w, a, x, n, model)
    if isinstance(which, BackwardInv):
        return backward_product_inv(which.w, a, x, n, model)
    return ratio_product(which.w_j, which.w_l, a, x, n, model)


def sup_product_on(
    region: CompactRegion,
    which: ProductSelector,
    a: PointLike,
    n: int,
    model: Optional[GroupModel] = None,
) -> ProductValue:
    """max over the region of the selected product."""
    if region.is_empty():
        raise EmptyRegionError("sup of a product over an empty region")
    cells = region.sorted_cells()
    m = _default_model(cells[0], model)
    return ProductValue(max(product_at(which, a, x, n, m).log_value for x in cells))


def product_table(
    model: GroupModel,
    which: ProductSelector,
    a: PointLike,
    region: CompactRegion,
    n_max: int,
) -> np.ndarray:
    """Log products for every cell of the region (sorted order) and every n in 0..n_max.

    Row i, column n holds log of the selected product at the i-th cell; column 0 is 0.
    """
    n_max = _check_n(n_max)
    cells = region.as_array(model.dim)
    ap = np.asarray(model.point(a), dtype=np.int64)
    out = np.zeros((len(cells), n_max + 1))
    if n_max == 0 or len(cells) == 0:
        return out
    if isinstance(which, Forward):
        steps = np.arange(1, n_max + 1, dtype=np.int64)
    else:
        steps = -np.arange(0, n_max, dtype=np.int64)
    pts = model.normalize_array(cells[:, None, :] + steps[None, :, None] * ap[None, None, :])
    if isinstance(which, Forward):
        logs = which.w.log_eval(pts)
    elif isinstance(which, BackwardInv):
        logs = -which.w.log_eval(pts)
    else:
        logs = which.w_j.log_eval(pts) - which.w_l.log_eval(pts)
    out[:, 1:] = np.cumsum(logs, axis=1)
    return out
