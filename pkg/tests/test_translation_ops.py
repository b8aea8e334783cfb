"""Unit and property tests for weighted translation operators."""
from __future__ import annotations

import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from lab.errors import InvalidParameterError
from lab.funcspace import LatticeFunction, indicator, lp_norm
from lab.group_lattice import CompactRegion, GroupModel
from lab.translation_ops import (
    OperatorSpec,
    apply_S_power,
    apply_T,
    apply_T_iterated,
    apply_T_power,
    apply_TS_power,
    norm_via_products,
)
from lab.weights import ConstantWeight
from tests.strategies import functions, weights


def test_examples(z1, salas):
    d0 = LatticeFunction.delta(z1, 0)
    assert apply_T_power(1, salas, 2, d0)((2,)) == pytest.approx(0.25)
    assert apply_S_power(1, ConstantWeight(2.0), 1, d0)((-1,)) == pytest.approx(0.5)
    assert apply_S_power(1, salas, 2, d0)((-2,)) == pytest.approx(0.25)
    assert apply_T(1, salas, d0)((1,)) == 0.5


def test_negative_power_rejected(z1, salas):
    with pytest.raises(InvalidParameterError):
        apply_T_power(1, salas, -1, LatticeFunction.delta(z1, 0))
    with pytest.raises(InvalidParameterError):
        OperatorSpec((1,), salas, r=0)


@seed(20240601)
@settings(max_examples=200, deadline=None)
@given(w=weights, h=functions, n=st.sampled_from([1, 7, 64]))
def test_inverse_identity(w, h, n):
    back = apply_T_power(1, w, n, apply_S_power(1, w, n, h))
    assert back.support() == h.support()
    assert max(abs(back(x) - v) for x, v in h.items()) <= 1e-12


@seed(7)
@settings(max_examples=150, deadline=None)
@given(w=weights, h=functions, p=st.sampled_from([1.0, 2.0, 3.5]))
def test_norm_formula_oracle(w, h, p):
    E = h.support()
    for which, apply in (("T", apply_T_power), ("S", apply_S_power)):
        direct = lp_norm(apply(1, w, 9, h), p)
        assert norm_via_products(1, w, 9, h, E, p, which) == pytest.approx(direct, rel=1e-9)


def test_norm_via_products_examples(z1, salas):
    d0 = LatticeFunction.delta(z1, 0)
    assert norm_via_products(1, ConstantWeight(2.0), 3, d0, CompactRegion.interval(0, 0), 1, "T") == pytest.approx(8.0)
    chi = indicator(z1, CompactRegion.interval(0, 3))
    assert norm_via_products(1, salas, 50, chi, CompactRegion.interval(0, 3), 2, "S") < 1e-13
    assert norm_via_products(1, salas, 0, chi, CompactRegion.interval(-5, 5), 2, "T") == pytest.approx(lp_norm(chi, 2))
    with pytest.raises(InvalidParameterError):
        norm_via_products(1, salas, 1, chi, chi.support(), 2, "X")


@seed(12)
@settings(max_examples=100, deadline=None)
@given(w=weights, h=functions, m=st.integers(min_value=0, max_value=10), k=st.integers(min_value=0, max_value=10))
def test_semigroup(w, h, m, k):
    once = apply_T_power(1, w, m + k, h)
    twice = apply_T_power(1, w, k, apply_T_power(1, w, m, h))
    assert once.support() == twice.support()
    for x, v in once.items():
        assert twice(x) == pytest.approx(v, rel=1e-9)


@seed(9)
@settings(max_examples=100, deadline=None)
@given(w=weights, h=functions, n=st.integers(min_value=0, max_value=12))
def test_closed_form_matches_iterated_oracle(w, h, n):
    closed = apply_T_power(1, w, n, h)
    iterated = apply_T_iterated(1, w, n, h)
    assert closed.support() == iterated.support()
    for x, v in iterated.items():
        assert closed(x) == pytest.approx(v, rel=1e-12)


@seed(17)
@settings(max_examples=50, deadline=None)
@given(h=functions, n=st.integers(min_value=0, max_value=40))
def test_unweighted_isometry(h, n):
    assert lp_norm(apply_T_power(1, ConstantWeight(1.0), n, h), 2) == lp_norm(h, 2)


def test_ts_power_identity_and_cancellation(z1, salas):
    g = LatticeFunction.from_points(z1, [(-2, 0.3), (1, -0.7)])
    assert apply_TS_power(1, salas, 40, salas, 40, g) == g
    # T^{2n} S^n = T^n
    lhs = apply_TS_power(1, salas, 20, salas, 10, g)
    rhs = apply_T_power(1, salas, 10, g)
    assert lhs.support() == rhs.support()
    for x, v in rhs.items():
        assert lhs(x) == pytest.approx(v, rel=1e-12)


def test_operator_spec_power(z1, salas):
    op = OperatorSpec((1,), salas, r=2)
    h = LatticeFunction.delta(z1, -1)
    assert op.exponent(3) == 6
    assert op.power(3, h) == apply_T_power(1, salas, 6, h)
    assert op.inverse_power(3, h) == apply_S_power(1, salas, 6, h)


def test_cyclic_model_returns_to_start():
    model = GroupModel.finite_cyclic(5)
    h = LatticeFunction.delta(model, 2)
    out = apply_T_power(1, ConstantWeight(2.0), 5, h)
    assert out.support() == h.support()
    assert out((2,)) == pytest.approx(32.0)
