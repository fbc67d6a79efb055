from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from props import (
    prop_alpha_laws,
    prop_mesh_alpha_closure,
    prop_mesh_reflexive,
    prop_parser_round_trip,
    prop_prefix_closed,
    prop_reduction_deterministic,
    prop_substitution_idempotent,
)

seeds = st.integers(min_value=0, max_value=2**31)
many = settings(max_examples=200, deadline=None)


@many
@given(seeds)
def test_parser_round_trip(seed):
    prop_parser_round_trip(seed)


@many
@given(seeds)
def test_substitution_idempotent(seed):
    prop_substitution_idempotent(seed)


@many
@given(seeds)
def test_alpha_laws(seed):
    prop_alpha_laws(seed)


@many
@given(seeds)
def test_reduction_deterministic(seed):
    prop_reduction_deterministic(seed)


@many
@given(seeds)
def test_prefix_closed(seed):
    prop_prefix_closed(seed)


@many
@given(seeds)
def test_mesh_alpha_closure(seed):
    prop_mesh_alpha_closure(seed)


@many
@given(seeds)
def test_mesh_reflexive(seed):
    prop_mesh_reflexive(seed)
