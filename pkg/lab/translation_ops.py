"""Weighted translations T_{a,w} f(x) = w(x) f(x - a) and the right inverse S_{a,w}.

Powers use the closed forms
    (T^n f)(y + n·a) = φ_n(y) f(y)        (S^n h)(y - n·a) = φ̃_n(y) h(y)
with the products summed in the log domain, so T^n S^n h = h holds up to the two final
roundings. Iterated application is kept only as a test oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from lab.errors import InvalidParameterError
from lab.funcspace import LatticeFunction, NormParam, as_p, lp_norm_from_logs
from lab.group_lattice import CompactRegion, GroupPoint, PointLike
from lab.weights import WeightSpec


@dataclass(frozen=True)
class OperatorSpec:
    """T_{a,w}^r."""

    a: GroupPoint
    w: WeightSpec
    r: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(int(c) for c in self.a))
        if int(self.r) < 1:
            raise InvalidParameterError(f"operator power r must be >= 1, got {self.r}")
        object.__setattr__(self, "r", int(self.r))

    def exponent(self, n: int) -> int:
        return self.r * n

    def power(self, n: int, f: LatticeFunction) -> LatticeFunction:
        """(T_{a,w}^r)^n f."""
        return apply_T_power(self.a, self.w, self.exponent(n), f)

    def inverse_power(self, n: int, h: LatticeFunction) -> LatticeFunction:
        """(S_{a,w}^r)^n h."""
        return apply_S_power(self.a, self.w, self.exponent(n), h)


def _check_n(n: int) -> int:
    if n < 0:
        raise InvalidParameterError(f"operator power must be >= 0, got {n}")
    return int(n)


def _row_fsums(mat: np.ndarray) -> list[float]:
    return [math.fsum(row) for row in mat.tolist()]


def _weighted(vals: np.ndarray, log_factor: np.ndarray) -> np.ndarray:
    """vals · exp(log_factor), saturating to inf or 0 without numpy overflow warnings."""
    with np.errstate(over="ignore", under="ignore"):
        return vals * np.exp(log_factor)


def _orbit_logs(f: LatticeFunction, a: PointLike, w: WeightSpec, start: int, stop: int, step: int) -> tuple:
    """For every support point y of f: log w(y + s·a) for s in range(start, stop, step)."""
    model = f.model
    coords, vals = f.as_arrays()
    ap = np.asarray(model.point(a), dtype=np.int64)
    steps = np.arange(start, stop, step, dtype=np.int64)
    pts = model.normalize_array(coords[:, None, :] + steps[None, :, None] * ap[None, None, :])
    return coords, vals, w.log_eval(pts) if len(steps) else np.zeros((len(coords), 0))


def _shifted_function(f: LatticeFunction, coords: np.ndarray, shift: np.ndarray, values: np.ndarray) -> LatticeFunction:
    new_coords = f.model.normalize_array(coords + shift[None, :])
    return LatticeFunction(f.model, {tuple(c): v for c, v in zip(new_coords.tolist(), values.tolist())})


def apply_T(a: PointLike, w: WeightSpec, f: LatticeFunction) -> LatticeFunction:
    """g(x) = w(x) f(x - a)."""
    model = f.model
    ap = model.point(a)
    out = {}
    for y, v in f.values.items():
        x = model.point(tuple(yi + ai for yi, ai in zip(y, ap)))
        out[x] = w.eval(x) * v
    return LatticeFunction(model, out)


def apply_T_iterated(a: PointLike, w: WeightSpec, n: int, f: LatticeFunction) -> LatticeFunction:
    """n-fold apply_T; reference oracle for the closed forms."""
    g = f
    for _ in range(_check_n(n)):
        g = apply_T(a, w, g)
    return g


def apply_T_power(a: PointLike, w: WeightSpec, n: int, f: LatticeFunction) -> LatticeFunction:
    """g(x) = [Π_{s=0}^{n-1} w(x - s·a)] f(x - n·a)."""
    n = _check_n(n)
    if n == 0 or f.is_zero():
        return f
    coords, vals, logs = _orbit_logs(f, a, w, 1, n + 1, 1)
    shift = n * np.asarray(f.model.point(a), dtype=np.int64)
    return _shifted_function(f, coords, shift, _weighted(vals, np.asarray(_row_fsums(logs))))


def apply_S_power(a: PointLike, w: WeightSpec, n: int, h: LatticeFunction) -> LatticeFunction:
    """g(x) = h(x + n·a) / Π_{s=1}^{n} w(x + s·a)."""
    n = _check_n(n)
    if n == 0 or h.is_zero():
        return h
    coords, vals, logs = _orbit_logs(h, a, w, 0, -n, -1)
    shift = -n * np.asarray(h.model.point(a), dtype=np.int64)
    return _shifted_function(h, coords, shift, _weighted(vals, -np.asarray(_row_fsums(logs))))


def apply_TS_power(
    a: PointLike, w_t: WeightSpec, t_power: int, w_s: WeightSpec, s_power: int, g: LatticeFunction
) -> LatticeFunction:
    """T_{a,w_t}^A S_{a,w_s}^B g evaluated in one pass, without materializing S^B g.

    The entry coming from y lands at y + (A - B)·a with log factor
    Σ_{s=1}^{A} log w_t(y - B·a + s·a) - Σ_{s=0}^{B-1} log w_s(y - s·a).
    For w_t = w_s and A = B both sums run over the same points, so g comes back exactly.
    """
    A, B = _check_n(t_power), _check_n(s_power)
    if g.is_zero():
        return g
    coords, vals, s_logs = _orbit_logs(g, a, w_s, 0, -B, -1)
    _, _, t_logs = _orbit_logs(g, a, w_t, 1 - B, A - B + 1, 1)
    log_factor = np.asarray(_row_fsums(t_logs)) - np.asarray(_row_fsums(s_logs))
    shift = (A - B) * np.asarray(g.model.point(a), dtype=np.int64)
    return _shifted_function(g, coords, shift, _weighted(vals, log_factor))


def norm_via_products(
    a: PointLike,
    w: WeightSpec,
    n: int,
    f: LatticeFunction,
    E: CompactRegion,
    p: Union[float, NormParam],
    which: Literal["T", "S"],
) -> float:
    """(∫_E φ_n^p |f|^p dλ)^{1/p} for T, (∫_E φ̃_n^p |f|^p dλ)^{1/p} for S.

    This is the change of variables that turns ‖T^n(fχ_E)‖_p and ‖S^n(fχ_E)‖_p into
    integrals of the weight products over E.
    """
    pv = as_p(p)
    n = _check_n(n)
    fe = f.restrict(E)
    if fe.is_zero():
        return 0.0
    if which == "T":
        coords, vals, logs = _orbit_logs(fe, a, w, 1, n + 1, 1)
        log_prod = np.asarray(_row_fsums(logs))
    elif which == "S":
        coords, vals, logs = _orbit_logs(fe, a, w, 0, -n, -1)
        log_prod = -np.asarray(_row_fsums(logs))
    else:
        raise InvalidParameterError(f"which must be 'T' or 'S', got {which!r}")
    return lp_norm_from_logs(log_prod + np.log(np.abs(vals)), pv, f.model.cell_volume)
