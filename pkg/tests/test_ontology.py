"""Entity registry: bootstrap taxonomy, definitions, descent queries."""
from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from xfo.errors import (
    BadParentError,
    DuplicateNameError,
    InvalidNameError,
    UnknownEntityError,
)
from xfo.ontology import B_TAXONOMY, Layer, Registry, bootstrap_b_taxonomy


def test_bootstrap_exact_tree():
    reg = bootstrap_b_taxonomy()
    assert len(reg) == 14
    got = {e.name: e.parent for e in reg.entities()}
    assert got == dict(B_TAXONOMY)
    assert all(e.layer is Layer.B for e in reg.entities())


def test_bootstrap_known_parents():
    reg = bootstrap_b_taxonomy()
    assert reg.lookup("B_Object").parent == "B_MaterialEntity"
    assert reg.lookup("B_Entity").parent is None
    assert reg.lookup("X_Substance").parent == "B_MaterialEntity"
    assert reg.lookup("X_Transitional").parent == "B_Occurrent"
    assert reg.lookup("B_RelationalQuality").parent == "B_Quality"


def test_bootstrap_idempotent():
    a = {(e.name, e.layer, e.parent) for e in bootstrap_b_taxonomy().entities()}
    b = {(e.name, e.layer, e.parent) for e in bootstrap_b_taxonomy().entities()}
    assert a == b


def test_define_universal():
    reg = bootstrap_b_taxonomy()
    pid = reg.define_universal("Pottery", "B_Object")
    assert pid == "Pottery"
    assert reg.lookup("Pottery").layer is Layer.U
    reg.define_universal("Firing", "B_Process")
    reg.define_universal("BiscuitFiring", "Firing")  # U under U
    assert reg.lookup("BiscuitFiring").parent == "Firing"


def test_define_universal_errors():
    reg = bootstrap_b_taxonomy()
    reg.define_universal("Pottery", "B_Object")
    with pytest.raises(DuplicateNameError):
        reg.define_universal("Pottery", "B_Object")
    with pytest.raises(BadParentError):
        reg.define_universal("X", "Nope")
    reg.instantiate_particular("pot1", "Pottery")
    with pytest.raises(BadParentError):
        reg.define_universal("Y", "pot1")  # P parent
    with pytest.raises(InvalidNameError):
        reg.define_universal("", "B_Object")
    with pytest.raises(InvalidNameError):
        reg.define_universal("has space", "B_Object")


def test_instantiate_particular():
    reg = bootstrap_b_taxonomy()
    reg.define_universal("TrafficLight", "B_Object")
    lid = reg.instantiate_particular("lightA", "TrafficLight")
    e = reg.lookup(lid)
    assert e.layer is Layer.P and e.parent == "TrafficLight"
    with pytest.raises(BadParentError):
        reg.instantiate_particular("x", "B_Object")  # B is not instantiable
    with pytest.raises(BadParentError):
        reg.instantiate_particular("y", "lightA")  # P is not instantiable
    with pytest.raises(DuplicateNameError):
        reg.instantiate_particular("lightA", "TrafficLight")


def test_is_descendant():
    reg = bootstrap_b_taxonomy()
    reg.define_universal("Firing", "B_Process")
    reg.define_universal("BiscuitFiring", "Firing")
    assert reg.is_descendant("BiscuitFiring", "B_Process")
    assert reg.is_descendant("BiscuitFiring", "B_Entity")
    assert not reg.is_descendant("B_Entity", "B_Object")
    assert reg.is_descendant("B_Object", "B_Object")  # reflexive
    with pytest.raises(UnknownEntityError):
        reg.is_descendant("Nope", "B_Entity")
    with pytest.raises(UnknownEntityError):
        reg.is_descendant("B_Entity", "Nope")


def test_b_ancestor():
    reg = bootstrap_b_taxonomy()
    reg.define_universal("Lamp", "B_Object")
    reg.instantiate_particular("lampA_green", "Lamp")
    reg.define_universal("Color", "B_Quality")
    reg.instantiate_particular("green", "Color")
    assert reg.b_ancestor("lampA_green") == "B_Object"
    assert reg.b_ancestor("green") == "B_Quality"
    assert reg.b_ancestor("B_Quality") == "B_Quality"  # B is its own ancestor
    with pytest.raises(UnknownEntityError):
        reg.b_ancestor("Nope")


def test_name_bijection():
    reg = bootstrap_b_taxonomy()
    reg.define_universal("Pottery", "B_Object")
    reg.instantiate_particular("pot1", "Pottery")
    for e in reg.entities():
        assert reg.lookup(e.name) is e


def test_parent_chain():
    reg = bootstrap_b_taxonomy()
    reg.define_universal("Pottery", "B_Object")
    reg.instantiate_particular("pot1", "Pottery")
    assert reg.parent_chain("pot1") == [
        "pot1", "Pottery", "B_Object", "B_MaterialEntity",
        "B_IndependentContinuant", "B_Continuant", "B_Entity",
    ]
    assert reg.parent_chain("B_Entity") == ["B_Entity"]


def _check_registry_invariants(reg: Registry):
    size = len(reg)
    order = {Layer.P: 0, Layer.U: 1, Layer.B: 2}
    for e in reg.entities():
        chain = reg.parent_chain(e.name)
        assert len(chain) <= size
        assert chain[-1] == "B_Entity"
        layers = [reg.lookup(n).layer for n in chain]
        ranks = [order[l] for l in layers]
        assert ranks == sorted(ranks), f"layer sequence broken along {chain}"
        assert sum(1 for l in layers if l is Layer.P) <= 1  # P never nests


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_random_definitions_keep_invariants(data):
    reg = bootstrap_b_taxonomy()
    universals = [name for name, _ in B_TAXONOMY]
    instantiable: list[str] = []
    n = data.draw(st.integers(min_value=1, max_value=40))
    for i in range(n):
        if instantiable and data.draw(st.booleans()):
            parent = data.draw(st.sampled_from(instantiable))
            reg.instantiate_particular(f"p{i}", parent)
        else:
            parent = data.draw(st.sampled_from(universals))
            reg.define_universal(f"u{i}", parent)
            universals.append(f"u{i}")
            instantiable.append(f"u{i}")
    _check_registry_invariants(reg)
    for e in reg.entities():
        assert reg.lookup(e.name) is e
