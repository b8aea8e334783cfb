"""Unit tests for lattice models, regions and the aperiodicity horizon."""
from __future__ import annotations

import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from lab.errors import DimensionMismatchError, EmptyRegionError, InvalidParameterError
from lab.group_lattice import (
    CompactRegion,
    GroupModel,
    Horizon,
    Periodic,
    aperiodicity_horizon,
    classify_element,
    haar_measure,
    region_meets_translate,
    translate,
    translate_region,
)


def test_model_validation():
    with pytest.raises(InvalidParameterError):
        GroupModel.discretized_line(-1.0)
    with pytest.raises(InvalidParameterError):
        GroupModel.finite_cyclic(1)
    with pytest.raises(InvalidParameterError):
        GroupModel.integer_lattice(0)


def test_point_canonical_forms(z1):
    assert z1.point(3) == (3,)
    assert GroupModel.finite_cyclic(5).point(7) == (2,)
    with pytest.raises(DimensionMismatchError):
        z1.point((1, 2))
    with pytest.raises(DimensionMismatchError):
        z1.point((0.5,))


def test_translate_is_right_translation_by_inverse_power(z1):
    assert translate(z1, 4, 1, 3) == (1,)
    assert translate(GroupModel.finite_cyclic(5), 1, 2, 1) == (4,)
    K = CompactRegion.interval(0, 2)
    assert translate_region(z1, K, 1, -5) == CompactRegion.interval(5, 7)


def test_haar_measure_uses_cell_volume():
    K = CompactRegion.interval(0, 9)
    assert haar_measure(GroupModel.integer_lattice(1), K) == 10
    assert haar_measure(GroupModel.discretized_line(0.25), K) == pytest.approx(2.5)


def test_box_region():
    model = GroupModel.integer_lattice(2)
    box = CompactRegion.box(model, [0, 0], [2, 1])
    assert len(box) == 6
    assert (2, 1) in box


def test_horizon_unit_step_with_exhaustive_check(z1):
    K = CompactRegion.interval(0, 10)
    hz = aperiodicity_horizon(z1, K, 1)
    assert hz == Horizon(10)
    assert region_meets_translate(z1, K, 1, 10)
    for n in range(11, 111):
        assert not region_meets_translate(z1, K, 1, n)
        assert not region_meets_translate(z1, K, 1, -n)


def test_horizon_step_three(z1):
    assert aperiodicity_horizon(z1, CompactRegion.interval(0, 10), 3) == Horizon(3)


def test_horizon_two_dimensional():
    model = GroupModel.integer_lattice(2)
    K = CompactRegion.box(model, [0, 0], [2, 2])
    assert aperiodicity_horizon(model, K, (1, 1)) == Horizon(2)
    assert aperiodicity_horizon(model, K, (3, 0)) == Horizon(0)


def test_finite_cyclic_is_periodic():
    model = GroupModel.finite_cyclic(12)
    K = CompactRegion.from_points(model, [0, 1, 2])
    assert isinstance(aperiodicity_horizon(model, K, 1), Periodic)
    assert classify_element(model, 8) == {"kind": "periodic", "torsion_order": 3}


def test_zero_element_is_periodic(z1):
    assert isinstance(aperiodicity_horizon(z1, CompactRegion.interval(0, 3), 0), Periodic)
    assert classify_element(z1, 2)["kind"] == "aperiodic"


def test_empty_region_rejected(z1):
    with pytest.raises(EmptyRegionError):
        aperiodicity_horizon(z1, CompactRegion(), 1)


def test_translate_examples():
    z2 = GroupModel.integer_lattice(2)
    assert translate(z2, (0, 0), (1, -1), 3) == (-3, 3)
    assert translate(GroupModel.finite_cyclic(12), 5, 4, 2) == (9,)
    assert translate(z2, (4, -2), (1, 1), 0) == (4, -2)


@seed(41)
@settings(max_examples=100, deadline=None)
@given(
    x=st.tuples(st.integers(-100, 100), st.integers(-100, 100)),
    a=st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
    s=st.integers(-50, 50),
    t=st.integers(-50, 50),
)
def test_translate_composes(x, a, s, t):
    z2 = GroupModel.integer_lattice(2)
    assert translate(z2, translate(z2, x, a, s), a, t) == translate(z2, x, a, s + t)


@seed(42)
@settings(max_examples=50, deadline=None)
@given(
    points=st.sets(st.integers(-30, 30), min_size=1, max_size=20),
    a=st.integers(-40, 40),
    q=st.integers(2, 17),
)
def test_haar_measure_is_translation_invariant(points, a, q):
    for model in (GroupModel.integer_lattice(1), GroupModel.discretized_line(0.25), GroupModel.finite_cyclic(q)):
        region = CompactRegion.from_points(model, points)
        assert haar_measure(model, translate_region(model, region, a, 1)) == haar_measure(model, region)
