"""Lattice models of second countable locally compact abelian groups.

Groups are realized as lattices with a cell Haar measure: Z^d with unit cells, the real
line cut into cells of width h, and Z/qZ (kept only as a negative control, every element
of a finite group being periodic). Points are integer coordinate tuples and the group is
written additively, so the right translate x*a^{-s} is x - s*a.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from lab.errors import DimensionMismatchError, EmptyRegionError, InvalidParameterError

logger = logging.getLogger(__name__)

GroupPoint = tuple[int, ...]
PointLike = Union[int, Sequence[int], np.ndarray]


class GroupKind(str, Enum):
    INTEGER_LATTICE = "integer_lattice"
    DISCRETIZED_LINE = "discretized_line"
    FINITE_CYCLIC = "finite_cyclic"


@dataclass(frozen=True)
class GroupModel:
    """Lattice realization of G with its cell volume (the Haar measure of one cell)."""

    kind: GroupKind
    dim: int = 1
    h: float = 1.0
    q: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidParameterError(f"lattice dimension must be >= 1, got {self.dim}")
        if self.kind is GroupKind.DISCRETIZED_LINE:
            if not (self.h > 0 and math.isfinite(self.h)):
                raise InvalidParameterError(f"cell width h must be positive, got {self.h}")
            if self.dim != 1:
                raise InvalidParameterError("a discretized line is one-dimensional")
        if self.kind is GroupKind.FINITE_CYCLIC:
            if self.q < 2:
                raise InvalidParameterError(f"cyclic modulus q must be >= 2, got {self.q}")
            if self.dim != 1:
                raise InvalidParameterError("a finite cyclic group is one-dimensional")

    @classmethod
    def integer_lattice(cls, d: int = 1) -> "GroupModel":
        return cls(GroupKind.INTEGER_LATTICE, dim=d)

    @classmethod
    def discretized_line(cls, h: float) -> "GroupModel":
        return cls(GroupKind.DISCRETIZED_LINE, dim=1, h=float(h))

    @classmethod
    def finite_cyclic(cls, q: int) -> "GroupModel":
        return cls(GroupKind.FINITE_CYCLIC, dim=1, q=int(q))

    @property
    def cell_volume(self) -> float:
        return self.h if self.kind is GroupKind.DISCRETIZED_LINE else 1.0

    @property
    def is_finite(self) -> bool:
        return self.kind is GroupKind.FINITE_CYCLIC

    def zero(self) -> GroupPoint:
        """Identity element e."""
        return (0,) * self.dim

    def point(self, coords: PointLike) -> GroupPoint:
        """Validate coordinates and return the canonical GroupPoint (residues reduced mod q)."""
        if isinstance(coords, (int, np.integer)):
            raw: tuple = (int(coords),)
        else:
            raw = tuple(coords)
        if len(raw) != self.dim:
            raise DimensionMismatchError(
                f"point {raw} has dimension {len(raw)}, model {self.kind.value} has {self.dim}"
            )
        out = []
        for c in raw:
            if isinstance(c, float) and not c.is_integer():
                raise DimensionMismatchError(f"lattice coordinates must be integers, got {raw}")
            out.append(int(c))
        if self.is_finite:
            out = [c % self.q for c in out]
        return tuple(out)

    def normalize_array(self, coords: np.ndarray) -> np.ndarray:
        """Reduce an integer coordinate array (last axis = dim) to canonical form."""
        if self.is_finite:
            return np.mod(coords, self.q)
        return coords


@dataclass(frozen=True)
class CompactRegion:
    """Finite set of lattice cells standing in for a compact set K (or a Borel set E ⊂ K)."""

    cells: frozenset[GroupPoint] = frozenset()

    @classmethod
    def from_points(cls, model: GroupModel, points: Iterable[PointLike]) -> "CompactRegion":
        return cls(frozenset(model.point(p) for p in points))

    @classmethod
    def interval(cls, lo: int, hi: int) -> "CompactRegion":
        """Cells lo..hi inclusive on a one-dimensional model."""
        return cls(frozenset((i,) for i in range(int(lo), int(hi) + 1)))

    @classmethod
    def box(cls, model: GroupModel, lo: Sequence[int], hi: Sequence[int]) -> "CompactRegion":
        lo_p, hi_p = model.point(lo), model.point(hi)
        axes = [range(l, u + 1) for l, u in zip(lo_p, hi_p)]
        grid = np.stack(np.meshgrid(*[np.arange(r.start, r.stop) for r in axes], indexing="ij"), axis=-1)
        return cls.from_points(model, grid.reshape(-1, model.dim).tolist())

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[GroupPoint]:
        return iter(sorted(self.cells))

    def __contains__(self, x: object) -> bool:
        return x in self.cells

    def is_empty(self) -> bool:
        return not self.cells

    def sorted_cells(self) -> list[GroupPoint]:
        return sorted(self.cells)

    def as_array(self, dim: int) -> np.ndarray:
        """Cells as an (m, dim) int64 array in sorted order."""
        if not self.cells:
            return np.zeros((0, dim), dtype=np.int64)
        return np.array(self.sorted_cells(), dtype=np.int64).reshape(-1, dim)

    def union(self, other: "CompactRegion") -> "CompactRegion":
        return CompactRegion(self.cells | other.cells)

    def difference(self, other: "CompactRegion") -> "CompactRegion":
        return CompactRegion(self.cells - other.cells)

    def intersection(self, other: "CompactRegion") -> "CompactRegion":
        return CompactRegion(self.cells & other.cells)

    def issubset(self, other: "CompactRegion") -> bool:
        return self.cells <= other.cells


def check_region(model: GroupModel, region: CompactRegion) -> None:
    for x in region.cells:
        if model.point(x) != x:
            raise DimensionMismatchError(f"cell {x} is not canonical for model {model.kind.value}")


def translate(model: GroupModel, x: PointLike, a: PointLike, s: int) -> GroupPoint:
    """x*a^{-s}, i.e. x - s*a (mod q on a finite cyclic model)."""
    xp, ap = model.point(x), model.point(a)
    return model.point(tuple(xi - s * ai for xi, ai in zip(xp, ap)))


def translate_region(model: GroupModel, region: CompactRegion, a: PointLike, s: int) -> CompactRegion:
    """{x - s*a : x in region}."""
    ap = model.point(a)
    return CompactRegion(
        frozenset(model.point(tuple(xi - s * ai for xi, ai in zip(x, ap))) for x in region.cells)
    )


def haar_measure(model: GroupModel, region: CompactRegion) -> float:
    """λ(region) = number of cells times the cell volume."""
    return len(region) * model.cell_volume


@dataclass(frozen=True)
class Horizon:
    """K ∩ (K ± n·a) = ∅ for every n > N."""

    N: int


@dataclass(frozen=True)
class Periodic:
    """The element generates a relatively compact subgroup; no horizon exists."""

    reason: str = "periodic element"


def classify_element(model: GroupModel, a: PointLike) -> dict:
    """Report whether a is aperiodic, with the torsion order on finite models."""
    ap = model.point(a)
    if model.is_finite:
        order = model.q // math.gcd(model.q, ap[0]) if ap[0] else 1
        return {"kind": "periodic", "torsion_order": order}
    if not any(ap):
        return {"kind": "periodic", "torsion_order": 1}
    return {"kind": "aperiodic", "torsion_order": None}


def _difference_multiples(model: GroupModel, K: CompactRegion, a: GroupPoint) -> np.ndarray:
    """All n >= 1 with y - x = n*a for some x, y in K."""
    arr = K.as_array(model.dim)
    diffs = (arr[:, None, :] - arr[None, :, :]).reshape(-1, model.dim)
    axis = next(i for i, ai in enumerate(a) if ai != 0)
    num = diffs[:, axis]
    divisible = num % a[axis] == 0
    n = num // a[axis]
    exact = np.all(diffs == n[:, None] * np.asarray(a, dtype=np.int64)[None, :], axis=1)
    hits = n[divisible & exact & (n > 0)]
    return hits


def aperiodicity_horizon(model: GroupModel, K: CompactRegion, a: PointLike) -> Union[Horizon, Periodic]:
    """Least N with K ∩ (K ± n·a) = ∅ for all n > N, or Periodic.

    The horizon is read off the pairwise differences of K: K meets K + n·a exactly when
    some difference y - x equals n·a, and the difference set is symmetric so both signs
    are covered at once.
    """
    if K.is_empty():
        raise EmptyRegionError("aperiodicity horizon needs a nonempty region K")
    check_region(model, K)
    ap = model.point(a)
    if model.is_finite:
        return Periodic(reason=f"finite cyclic group Z/{model.q}Z: every element is periodic")
    if not any(ap):
        return Periodic(reason="a = 0 generates the trivial subgroup")
    hits = _difference_multiples(model, K, ap)
    N = int(hits.max()) if hits.size else 0
    logger.debug("aperiodicity horizon |K|=%d a=%s -> N=%d", len(K), ap, N)
    return Horizon(N)


def region_meets_translate(model: GroupModel, K: CompactRegion, a: PointLike, n: int) -> bool:
    """Whether K ∩ (K + n·a) is nonempty."""
    shifted = translate_region(model, K, a, -n)
    return not K.intersection(shifted).is_empty()
