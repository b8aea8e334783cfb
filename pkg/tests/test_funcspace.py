"""Unit tests for sparse lattice functions and L^p norms."""
from __future__ import annotations

import math

import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from lab.errors import InvalidParameterError, ModelMismatchError
from lab.funcspace import (
    LatticeFunction,
    NormParam,
    indicator,
    lp_distance,
    lp_norm,
    lp_norm_from_logs,
    lp_norm_p,
    sup_norm,
)
from lab.group_lattice import CompactRegion, GroupModel, haar_measure
from tests.strategies import Z1, functions


def test_zero_entries_are_dropped(z1):
    f = LatticeFunction(z1, {(0,): 0.0, (1,): 2.0})
    assert f.support() == CompactRegion.interval(1, 1)
    assert LatticeFunction.from_points(z1, [(0, 1.0), (0, -1.0)]).is_zero()


def test_norms(z1):
    d = LatticeFunction.delta(z1, 4)
    assert lp_norm(d, 1) == 1.0
    assert lp_norm(d, 3.5) == 1.0
    chi = indicator(z1, CompactRegion.interval(0, 3))
    assert lp_norm(chi, 2) == 2.0
    assert lp_norm_p(chi, 2) == 4.0
    assert lp_norm(LatticeFunction.zero(z1), 2) == 0.0


def test_norm_scales_with_cell_volume():
    model = GroupModel.discretized_line(0.5)
    d = LatticeFunction.delta(model, 0)
    assert lp_norm(d, 2) == pytest.approx(math.sqrt(0.5))


def test_norm_param_validation():
    with pytest.raises(InvalidParameterError):
        NormParam(0.5)
    with pytest.raises(InvalidParameterError):
        lp_norm(LatticeFunction.zero(GroupModel.integer_lattice(1)), math.inf)


def test_algebra(z1):
    f = LatticeFunction.from_points(z1, [(0, 1.0), (1, 2.0)])
    g = LatticeFunction.from_points(z1, [(1, 2.0), (2, -1.0)])
    assert (f - g).values == {(0,): 1.0, (2,): 1.0}
    assert (-f)(1) == -2.0
    assert f.scale(3.0)(0) == 3.0
    assert f.restrict(CompactRegion.interval(1, 5)).values == {(1,): 2.0}
    assert f.translated(1, 2).values == {(2,): 1.0, (3,): 2.0}
    assert sup_norm(g) == 2.0
    assert lp_distance(f, f, 2) == 0.0


def test_model_mismatch(z1):
    other = GroupModel.discretized_line(0.5)
    with pytest.raises(ModelMismatchError):
        LatticeFunction.delta(z1, 0) + LatticeFunction.delta(other, 0)


def test_distance_between_unit_masses(z1):
    d0, d1 = LatticeFunction.delta(z1, 0), LatticeFunction.delta(z1, 1)
    assert lp_distance(d0, d1, 2) == pytest.approx(math.sqrt(2.0))
    assert lp_distance(d1, d0, 2) == lp_distance(d0, d1, 2)
    assert lp_distance(indicator(z1, CompactRegion.interval(0, 3)), LatticeFunction.zero(z1), 2) == 2.0


@seed(31)
@settings(max_examples=100, deadline=None)
@given(f=functions, shift=st.integers(min_value=-1000, max_value=1000), p=st.sampled_from([1.0, 2.0, 3.5]))
def test_translation_isometry(f, shift, p):
    assert lp_norm(f.translated(shift), p) == lp_norm(f, p)


@seed(32)
@settings(max_examples=100, deadline=None)
@given(f=functions, g=functions, p=st.sampled_from([1.0, 2.0, 3.5]))
def test_disjoint_supports_add_in_pth_power(f, g, p):
    g = g.translated(200)
    assert f.support().intersection(g.support()).is_empty()
    assert lp_norm_p(f + g, p) == pytest.approx(lp_norm_p(f, p) + lp_norm_p(g, p), rel=1e-12)


@seed(33)
@settings(max_examples=100, deadline=None)
@given(f=functions, lo=st.integers(min_value=-60, max_value=60), width=st.integers(min_value=0, max_value=40))
def test_restriction_bounded_by_sup_and_measure(f, lo, width):
    E = CompactRegion.interval(lo, lo + width)
    for p in (1.0, 2.0, 3.5):
        bound = sup_norm(f) * haar_measure(Z1, E) ** (1.0 / p)
        assert lp_norm(f.restrict(E), p) <= bound * (1.0 + 1e-12)


def test_norms_saturate_instead_of_overflowing(z1):
    big = LatticeFunction(z1, {(0,): 1e200, (1,): -1e200})
    assert lp_norm(big, 2) == pytest.approx(math.sqrt(2.0) * 1e200)
    assert lp_norm_p(big, 2) == math.inf
    assert lp_norm(LatticeFunction(z1, {(0,): 1e308, (1,): 1e308}), 1) == math.inf
    assert lp_norm(LatticeFunction(z1, {(0,): math.inf}), 2) == math.inf
    tiny = LatticeFunction(z1, {(0,): 1e-200})
    assert lp_norm_p(tiny, 2) == 0.0
    assert lp_norm(tiny, 2) == 1e-200


def test_norm_from_logs():
    assert lp_norm_from_logs([math.log(3.0), math.log(4.0)], 2) == pytest.approx(5.0)
    assert lp_norm_from_logs([1000.0, 0.0], 2) == math.inf
    assert lp_norm_from_logs([-1000.0], 1) == 0.0
    assert lp_norm_from_logs([], 2) == 0.0
    assert lp_norm_from_logs([math.log(2.0)], 1, cell_volume=0.5) == pytest.approx(1.0)
