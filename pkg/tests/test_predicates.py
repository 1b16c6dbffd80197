import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ada.contracts import entails
from ada.model import ASSUMPTION, GUARANTEE, Clause
from ada.predicates import (SIGNALS, SUBJECTS, ConfigValid, ObstacleBehaviour,
                            PredicateError, SafeSetpointRule, SeparationBound,
                            StateErrorBound, TrackingBound, atom_entails, atom_from_dict,
                            atom_to_dict, predicate_entails)

MANY = settings(max_examples=10_000, deadline=None)

bounds = st.floats(min_value=0.0, max_value=100.0, allow_nan=False)
positive = st.floats(min_value=1e-3, max_value=100.0, allow_nan=False)

state_error = st.builds(StateErrorBound, st.sampled_from(SIGNALS), st.sampled_from(SUBJECTS),
                        bounds)
atoms = st.one_of(
    state_error,
    st.builds(SeparationBound, positive),
    st.builds(TrackingBound, bounds, bounds, bounds),
    st.builds(ConfigValid, st.sampled_from(["r1", "r2"]), positive),
    st.builds(SafeSetpointRule, bounds),
    st.builds(ObstacleBehaviour, st.just("constant_velocity"), bounds, bounds),
)
conjunctions = st.lists(atoms, min_size=1, max_size=4).map(tuple)


def as_guarantee(pred):
    return Clause("X.G1", GUARANTEE, "", pred)


def as_assumption(pred):
    return Clause("Y.A1", ASSUMPTION, "", pred)


@MANY
@given(conjunctions)
def test_entails_reflexive(pred):
    assert entails(as_guarantee(pred), as_assumption(pred))


@MANY
@given(conjunctions, conjunctions, conjunctions)
def test_entails_transitive(a, b, c):
    if predicate_entails(a, b) and predicate_entails(b, c):
        assert predicate_entails(a, c)


@MANY
@given(st.sampled_from(SIGNALS), st.sampled_from(SUBJECTS), bounds, bounds)
def test_state_error_antisymmetric_up_to_equal_bound(signal, subject, e1, e2):
    a = StateErrorBound(signal, subject, e1)
    b = StateErrorBound(signal, subject, e2)
    if atom_entails(a, b) and atom_entails(b, a):
        assert e1 == e2


@MANY
@given(st.sampled_from(SIGNALS), st.sampled_from(SUBJECTS), bounds, bounds, bounds)
def test_weakening_provider_never_repairs_incompatibility(signal, subject, provided, needed,
                                                          extra):
    consumer = StateErrorBound(signal, subject, needed)
    before = atom_entails(StateErrorBound(signal, subject, provided), consumer)
    after = atom_entails(StateErrorBound(signal, subject, provided + extra), consumer)
    if not before:
        assert not after


@MANY
@given(conjunctions, conjunctions, atoms)
def test_extra_provider_atom_keeps_entailment(provider, consumer, extra):
    if predicate_entails(provider, consumer):
        assert predicate_entails(provider + (extra,), consumer)


@given(atoms)
def test_atom_json_round_trip(atom):
    assert atom_from_dict(atom_to_dict(atom)) == atom


def test_tighter_bound_discharges_looser():
    p = as_guarantee((StateErrorBound("position_m", "obstacle", 0.5),))
    c = as_assumption((StateErrorBound("position_m", "obstacle", 1.0),))
    assert entails(p, c)


def test_looser_bound_does_not_discharge_tighter():
    p = as_guarantee((StateErrorBound("position_m", "obstacle", 2.0),))
    c = as_assumption((StateErrorBound("position_m", "obstacle", 1.0),))
    assert not entails(p, c)


def test_signal_and_subject_must_match():
    own = StateErrorBound("position_m", "own", 0.1)
    assert not atom_entails(own, StateErrorBound("position_m", "obstacle", 1.0))
    assert not atom_entails(own, StateErrorBound("speed_mps", "own", 1.0))


def test_separation_direction():
    assert atom_entails(SeparationBound(40.0), SeparationBound(30.0))
    assert not atom_entails(SeparationBound(20.0), SeparationBound(30.0))


def test_variants_do_not_mix():
    assert not atom_entails(SeparationBound(30.0), ConfigValid("r", 30.0))


def test_informal_clause_never_entails():
    p = Clause("X.G1", GUARANTEE, "prose only")
    c = as_assumption((SeparationBound(1.0),))
    assert not entails(p, c)
    assert not entails(as_guarantee((SeparationBound(1.0),)), Clause("Y.A1", ASSUMPTION, "x"))


def test_entails_rejects_swapped_kinds():
    with pytest.raises(ValueError):
        entails(as_assumption((SeparationBound(1.0),)), as_assumption((SeparationBound(1.0),)))


@pytest.mark.parametrize("build", [
    lambda: StateErrorBound("position_m", "own", -1.0),
    lambda: StateErrorBound("altitude", "own", 1.0),
    lambda: SeparationBound(0.0),
    lambda: TrackingBound(1.0, math.inf, 1.0),
    lambda: ObstacleBehaviour("random_walk", 1.0, 0.0),
    lambda: ConfigValid("", 10.0),
])
def test_invalid_parameters_rejected(build):
    with pytest.raises(PredicateError):
        build()


def test_unknown_variant_rejected():
    with pytest.raises(PredicateError):
        atom_from_dict({"variant": "Nope"})
    with pytest.raises(PredicateError):
        atom_from_dict({"variant": "SeparationBound", "d_min": 1.0, "extra": 2})


@MANY
@given(st.sampled_from(SIGNALS), st.sampled_from(SUBJECTS),
       st.lists(bounds, min_size=3, max_size=3))
def test_transitivity_along_tightening_chain(signal, subject, eps):
    a, b, c = (StateErrorBound(signal, subject, e) for e in sorted(eps))
    assert atom_entails(a, b) and atom_entails(b, c) and atom_entails(a, c)
