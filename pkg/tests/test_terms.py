import logging
import re

import pytest

from ontocomply.rdf import RDF_TYPE, Graph, IRI, Literal, Triple, is_vocabulary, parse
from ontocomply.terms import (
    DECLARATION_PREDICATES,
    find_classes_and_properties,
    find_concepts_and_relations,
    split_name,
    tokenize,
)

B = "https://brickschema.org/schema/Brick#"


def test_empty_kg():
    inv = find_concepts_and_relations(Graph())
    assert inv.size == 0


def test_single_triple():
    s, p, o = IRI("http://e/s"), IRI("http://e/p"), IRI("http://e/o")
    inv = find_concepts_and_relations(Graph([Triple(s, p, o)]))
    assert inv.concepts == {s, o}
    assert inv.relations == {p}


def test_labels_are_not_relations():
    g = parse('<http://e/s> <http://www.w3.org/2000/01/rdf-schema#label> "x" .', "ntriples")
    assert find_concepts_and_relations(g).relations == frozenset()


def _position_scan(kg):
    concepts, relations = set(), set()
    for t in sorted(kg.triples, key=lambda t: t.n3()):
        if t.predicate == RDF_TYPE:
            if t.object.is_iri and not is_vocabulary(t.object):
                concepts.add(t.object)
        elif t.predicate in DECLARATION_PREDICATES:
            pass
        else:
            if not is_vocabulary(t.predicate):
                relations.add(t.predicate)
            for x in (t.subject, t.object):
                if x.is_iri and not is_vocabulary(x):
                    concepts.add(x)
    return concepts, relations


def test_fixture_inventory_matches_position_scan(kg1):
    inv = find_concepts_and_relations(kg1)
    concepts, relations = _position_scan(kg1)
    assert inv.concepts == concepts
    assert inv.relations == relations
    assert IRI(B + "hasPoint") in inv.relations


def test_class_and_property_counts(brick, data_dir):
    text = (data_dir / "brick.ttl").read_text()
    k = sum(line.count(" a owl:Class") for line in text.splitlines())
    m = len(re.findall(r" a owl:(?:Object|Datatype|Annotation)Property\b", text))
    schema = find_classes_and_properties(brick)
    assert (len(schema.classes), len(schema.properties)) == (k, m)


def test_one_class():
    g = parse("<http://e/C> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .", "ntriples")
    schema = find_classes_and_properties(g)
    assert len(schema.classes) == 1 and not schema.properties


def test_kg_by_mistake_warns(kg1, caplog):
    with caplog.at_level(logging.WARNING):
        schema = find_classes_and_properties(kg1)
    assert schema.size == 0
    assert "no classes" in caplog.text


@pytest.mark.parametrize(
    "name, tokens",
    [
        ("hasPoint", ["has", "point"]),
        ("Supply_Air_Temperature_Sensor", ["supply", "air", "temperature", "sensor"]),
        ("AHU1", ["ahu", "1"]),
        ("HVACZone", ["hvac", "zone"]),
        ("VAVUnit", ["vav", "unit"]),
        ("CO2Sensor", ["co", "2", "sensor"]),
        ("isPartOf", ["is", "part", "of"]),
        ("Fan_Speed_Command", ["fan", "speed", "command"]),
        ("feeds", ["feeds"]),
        ("HVAC_Zone", ["hvac", "zone"]),
        ("SF1_Status", ["sf", "1", "status"]),
        ("ZATSP1", ["zatsp", "1"]),
        ("Room101", ["room", "101"]),
        ("hasCapability", ["has", "capability"]),
        ("Level", ["level"]),
        ("locatedIn", ["located", "in"]),
        ("AirHandlingUnit", ["air", "handling", "unit"]),
        ("FanSpeedActuator", ["fan", "speed", "actuator"]),
        ("HVACEquipment", ["hvac", "equipment"]),
        ("Building1", ["building", "1"]),
    ],
)
def test_split_name_hand_checked(name, tokens):
    assert split_name(name) == tokens


def test_tokenize_iri_and_errors():
    assert tokenize(IRI(B + "hasPoint")).tokens == ("has", "point")
    assert tokenize(IRI("https://w3id.org/rec/core/Building")).tokens == ("building",)
    with pytest.raises(ValueError):
        tokenize(IRI("http://example.org/ns#"))
    with pytest.raises(ValueError):
        tokenize(Literal("x"))


def test_tokenize_deterministic():
    t = IRI(B + "Zone_Air_Temperature_Setpoint")
    assert tokenize(t) == tokenize(t)
