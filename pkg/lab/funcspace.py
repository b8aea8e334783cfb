"""Sparse compactly supported functions on a lattice model and their L^p norms.

Scalars are real: every quantity the criteria look at depends only on |f(x)| and on
positive weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

import numpy as np

from lab.errors import InvalidParameterError, ModelMismatchError
from lab.group_lattice import CompactRegion, GroupModel, GroupPoint, PointLike


@dataclass(frozen=True)
class NormParam:
    p: float = 2.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and self.p >= 1):
            raise InvalidParameterError(f"norm exponent p must satisfy 1 <= p < inf, got {self.p}")


def as_p(p: Union[float, NormParam]) -> float:
    """Validate and unwrap a norm exponent."""
    if isinstance(p, NormParam):
        return p.p
    return NormParam(float(p)).p


@dataclass(frozen=True)
class LatticeFunction:
    """Finitely supported real function on a GroupModel, stored without zero entries."""

    model: GroupModel
    values: Mapping[GroupPoint, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        canonical = {}
        for x, v in self.values.items():
            v = float(v)
            if v != 0.0:
                key = self.model.point(x)
                canonical[key] = canonical.get(key, 0.0) + v
        object.__setattr__(self, "values", {k: v for k, v in canonical.items() if v != 0.0})

    @classmethod
    def zero(cls, model: GroupModel) -> "LatticeFunction":
        return cls(model, {})

    @classmethod
    def from_points(cls, model: GroupModel, items: Iterable[tuple[PointLike, float]]) -> "LatticeFunction":
        acc: dict[GroupPoint, float] = {}
        for x, v in items:
            key = model.point(x)
            acc[key] = acc.get(key, 0.0) + float(v)
        return cls(model, acc)

    @classmethod
    def delta(cls, model: GroupModel, x: PointLike, value: float = 1.0) -> "LatticeFunction":
        return cls(model, {model.point(x): value})

    def __call__(self, x: PointLike) -> float:
        return self.values.get(self.model.point(x), 0.0)

    def __len__(self) -> int:
        return len(self.values)

    def is_zero(self) -> bool:
        return not self.values

    def support(self) -> CompactRegion:
        return CompactRegion(frozenset(self.values))

    def items(self) -> list[tuple[GroupPoint, float]]:
        return sorted(self.values.items())

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(coords (m, dim) int64, values (m,) float64) in sorted point order."""
        items = self.items()
        if not items:
            return np.zeros((0, self.model.dim), dtype=np.int64), np.zeros(0)
        coords = np.array([x for x, _ in items], dtype=np.int64).reshape(-1, self.model.dim)
        vals = np.array([v for _, v in items], dtype=float)
        return coords, vals

    def _check_same_model(self, other: "LatticeFunction") -> None:
        if other.model != self.model:
            raise ModelMismatchError(f"functions live on different models: {self.model} vs {other.model}")

    def __add__(self, other: "LatticeFunction") -> "LatticeFunction":
        self._check_same_model(other)
        acc = dict(self.values)
        for x, v in other.values.items():
            acc[x] = acc.get(x, 0.0) + v
        return LatticeFunction(self.model, acc)

    def __sub__(self, other: "LatticeFunction") -> "LatticeFunction":
        return self + other.scale(-1.0)

    def __neg__(self) -> "LatticeFunction":
        return self.scale(-1.0)

    def scale(self, c: float) -> "LatticeFunction":
        return LatticeFunction(self.model, {x: c * v for x, v in self.values.items()})

    def restrict(self, region: CompactRegion) -> "LatticeFunction":
        """f·χ_E."""
        return LatticeFunction(self.model, {x: v for x, v in self.values.items() if x in region.cells})

    def translated(self, a: PointLike, s: int = 1) -> "LatticeFunction":
        """x -> f(x - s*a), the function whose support is supp(f) + s*a."""
        ap = self.model.point(a)
        out = {}
        for x, v in self.values.items():
            out[self.model.point(tuple(xi + s * ai for xi, ai in zip(x, ap)))] = v
        return LatticeFunction(self.model, out)


def indicator(model: GroupModel, region: CompactRegion) -> LatticeFunction:
    """χ_region."""
    return LatticeFunction(model, {x: 1.0 for x in region.cells})


def saturating_pow(x: float, y: float) -> float:
    """x ** y for x >= 0, inf where the float result overflows."""
    try:
        return x ** y
    except OverflowError:
        return math.inf


def saturating_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _scaled_power_sum(mags: np.ndarray, pv: float, cell_volume: float) -> tuple[float, float]:
    """(top, Σ (|v| / top)^p · cell_volume) with top = max |v|; the sum is at least one cell."""
    top = float(mags.max())
    if math.isinf(top):
        return top, cell_volume
    return top, math.fsum(((mags / top) ** pv).tolist()) * cell_volume


def lp_norm_from_logs(log_abs: np.ndarray, p: Union[float, NormParam], cell_volume: float = 1.0) -> float:
    """L^p norm of the values exp(log_abs), one per cell; saturates to inf or 0."""
    pv = as_p(p)
    log_abs = np.asarray(log_abs, dtype=float)
    if log_abs.size == 0:
        return 0.0
    top = float(log_abs.max())
    if not math.isfinite(top):
        return saturating_exp(top)
    scaled = math.fsum(np.exp(pv * (log_abs - top)).tolist()) * cell_volume
    return saturating_exp(top + math.log(scaled) / pv)


def _magnitudes(f: LatticeFunction) -> np.ndarray:
    return np.abs(np.fromiter(f.values.values(), dtype=float, count=len(f.values)))


def lp_norm(f: LatticeFunction, p: Union[float, NormParam]) -> float:
    """(Σ_x |f(x)|^p · cell_volume)^(1/p), scaled by max |f| so it saturates to inf instead of overflowing."""
    pv = as_p(p)
    if f.is_zero():
        return 0.0
    top, total = _scaled_power_sum(_magnitudes(f), pv, f.model.cell_volume)
    return top * total ** (1.0 / pv)


def lp_norm_p(f: LatticeFunction, p: Union[float, NormParam]) -> float:
    """‖f‖_p^p without the final root."""
    pv = as_p(p)
    if f.is_zero():
        return 0.0
    top, total = _scaled_power_sum(_magnitudes(f), pv, f.model.cell_volume)
    return saturating_pow(top, pv) * total


def lp_distance(f: LatticeFunction, g: LatticeFunction, p: Union[float, NormParam]) -> float:
    """‖f - g‖_p; ball membership test for B(f_j, ε)."""
    f._check_same_model(g)
    return lp_norm(f - g, p)


def sup_norm(f: LatticeFunction) -> float:
    """max |f(x)| over the support (0 for the zero function)."""
    if f.is_zero():
        return 0.0
    return max(abs(v) for v in f.values.values())
