"""Hypothesis strategies for weights and finitely supported functions on Z."""
from __future__ import annotations

from hypothesis import strategies as st

from lab.funcspace import LatticeFunction
from lab.group_lattice import GroupModel
from lab.weights import ConstantWeight, PowerLawWeight, StepWeight, TableWeight

Z1 = GroupModel.integer_lattice(1)

# Nonzero values bounded away from the subnormal range so operator powers never underflow.
VALUES = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False).filter(lambda v: abs(v) > 1e-3)

constant_weights = st.builds(ConstantWeight, c=st.floats(min_value=0.5, max_value=2.0))

step_weights = st.builds(
    StepWeight,
    v_neg=st.floats(min_value=1.0, max_value=4.0),
    v_pos=st.floats(min_value=0.25, max_value=1.0),
    pivot=st.integers(min_value=-5, max_value=5),
)

power_law_weights = st.builds(PowerLawWeight, gamma=st.floats(min_value=-2.0, max_value=2.0))

table_weights = st.builds(
    lambda entries, default: TableWeight({(x,): v for x, v in entries.items()}, default=default),
    st.dictionaries(st.integers(min_value=-60, max_value=60), st.floats(min_value=0.25, max_value=4.0), max_size=30),
    st.floats(min_value=0.5, max_value=2.0),
)

weights = st.one_of(constant_weights, step_weights, power_law_weights, table_weights)

# Step weights that expand on the left and contract on the right.
hypercyclic_steps = st.builds(
    StepWeight,
    v_neg=st.floats(min_value=1.5, max_value=4.0),
    v_pos=st.floats(min_value=0.25, max_value=0.7),
    pivot=st.integers(min_value=-3, max_value=3),
)

functions = st.dictionaries(
    st.integers(min_value=-50, max_value=50), VALUES, min_size=1, max_size=12
).map(lambda values: LatticeFunction(Z1, {(x,): v for x, v in values.items()}))
