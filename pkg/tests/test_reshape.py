import itertools
import random

import pytest

from ontocomply.matching import MatchCandidate, MatchConfig, cascade
from ontocomply.rdf import (
    RDF_TYPE,
    RDFS_SUBCLASSOF,
    BNode,
    Graph,
    IRI,
    Literal,
    Triple,
    is_vocabulary,
    parse,
)
from ontocomply.reshape import (
    find_super_closure,
    original_report,
    render_table,
    reshape_from_matches,
    restore,
    within_compliance,
)
from ontocomply.terms import find_classes_and_properties, find_concepts_and_relations

O = "http://o.org/"
OWL_CLASS = IRI("http://www.w3.org/2002/07/owl#Class")


def naive_closure(seeds, onto, pred):
    """Repeat one-step expansion until nothing changes."""
    cur = set(seeds)
    while True:
        step = {t.object for t in onto.triples
                if t.predicate == pred and t.subject in cur and t.object.is_iri and not is_vocabulary(t.object)}
        if step <= cur:
            return frozenset(cur)
        cur |= step


def test_chain():
    onto = parse(
        "@prefix o: <http://o.org/> .\n@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
        "o:A rdfs:subClassOf o:B .\no:B rdfs:subClassOf o:C .\no:D rdfs:subClassOf o:C .\n"
    )
    assert find_super_closure({IRI(O + "A")}, onto, "class") == {IRI(O + n) for n in "ABC"}
    assert find_super_closure(set(), onto, "class") == frozenset()


def test_cycle_terminates():
    onto = Graph([
        Triple(IRI(O + "A"), RDFS_SUBCLASSOF, IRI(O + "B")),
        Triple(IRI(O + "B"), RDFS_SUBCLASSOF, IRI(O + "A")),
    ])
    assert find_super_closure({IRI(O + "A")}, onto, "class") == {IRI(O + "A"), IRI(O + "B")}


def test_closure_matches_fixpoint_on_random_dags():
    rng = random.Random(3)
    for _ in range(30):
        n = 12
        triples = [
            Triple(IRI(O + f"c{i}"), RDFS_SUBCLASSOF, IRI(O + f"c{j}"))
            for i in range(n) for j in range(i + 1, n) if rng.random() < 0.15
        ]
        onto = Graph(triples)
        seeds = {IRI(O + f"c{i}") for i in rng.sample(range(n), 3)}
        assert find_super_closure(seeds, onto, "class") == naive_closure(seeds, onto, RDFS_SUBCLASSOF)


def test_closure_on_brick(brick):
    schema = find_classes_and_properties(brick)
    for cls in sorted(schema.classes)[:25]:
        assert find_super_closure({cls}, brick, "class") == naive_closure({cls}, brick, RDFS_SUBCLASSOF)


def brute_restore(kept, onto):
    def ok(o):
        return o.is_literal or (o.is_iri and (o in kept or is_vocabulary(o)))

    out = set()
    for t in onto.triples:
        if t.subject not in kept:
            continue
        if t.object.is_blank:
            inner = [u for u in onto.triples if u.subject == t.object]
            if inner and all(ok(u.object) for u in inner):
                out.add(t)
                out.update(inner)
        elif ok(t.object):
            out.add(t)
    return out


def test_restore_against_brute_force(brick):
    schema = find_classes_and_properties(brick)
    rng = random.Random(11)
    everything = sorted(schema.classes) + sorted(schema.properties)
    for _ in range(10):
        pick = set(rng.sample(everything, 15))
        cls = {t for t in pick if t in schema.classes}
        pro = pick - cls
        got = restore(cls, pro, brick).graph
        assert set(got.triples) == brute_restore(cls | pro, brick)


def test_restore_full_and_empty():
    onto = parse(
        "@prefix o: <http://o.org/> .\n@prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
        "o:A a owl:Class ; rdfs:label \"A\" ; rdfs:subClassOf o:B , _:r .\n"
        "_:r a owl:Restriction ; owl:onProperty o:p ; owl:someValuesFrom o:B .\n"
        "o:B a owl:Class .\no:p a owl:ObjectProperty ; rdfs:domain o:A .\n"
    )
    schema = find_classes_and_properties(onto)
    full = restore(schema.classes, schema.properties, onto)
    assert set(full.graph.triples) == set(onto.triples)
    assert len(restore(set(), set(), onto).graph) == 0
    # dropping o:p must cut the restriction and the domain axiom
    partial = restore(schema.classes, set(), onto)
    assert not any(t.subject.is_blank or t.object.is_blank for t in partial.graph.triples)
    assert Triple(IRI(O + "A"), RDFS_SUBCLASSOF, IRI(O + "B")) in partial.graph.triples


def test_reshape_keeps_literals():
    onto = Graph([
        Triple(IRI(O + "A"), RDF_TYPE, OWL_CLASS),
        Triple(IRI(O + "A"), IRI("http://www.w3.org/2000/01/rdf-schema#comment"), Literal("x")),
    ])
    m = MatchCandidate(IRI("http://k/A"), IRI(O + "A"), 1, 1.0)
    assert set(reshape_from_matches([m], onto).graph.triples) == set(onto.triples)


def test_verbatim_kg_is_fully_compliant():
    onto = parse(
        "@prefix o: <http://o.org/> .\n@prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
        "o:Room a owl:Class .\no:Floor a owl:Class .\no:hasPart a owl:ObjectProperty .\n"
    )
    kg = parse(
        "@prefix o: <http://o.org/> .\n"
        "o:Floor o:hasPart o:Room .\n"
    )
    reshaped, report, matches = within_compliance(kg, onto, MatchConfig(max_level=1))
    assert report.matching_rate == 1.0
    assert report.confidence == 1.0
    assert report.used_entity_rate == 1.0
    assert reshaped.kept == {IRI(O + "Room"), IRI(O + "Floor"), IRI(O + "hasPart")}


def test_reshaped_rate_beats_original(mismatch_kg, brick, vectors):
    for lv in range(1, 5):
        cfg = MatchConfig(max_level=lv, semantic_provider=vectors)
        reshaped, rep, matches = within_compliance(mismatch_kg, brick, cfg)
        orig = original_report(mismatch_kg, brick, matches, reshaped, lv)
        assert rep.used_entity_rate > orig.used_entity_rate
        assert rep.matching_rate == orig.matching_rate
        assert rep.confidence == orig.confidence
        assert rep.kept == len(reshaped.kept)


def test_used_entity_counts_distinct_targets():
    onto = parse("@prefix o: <http://o.org/> .\n@prefix owl: <http://www.w3.org/2002/07/owl#> .\no:A a owl:Class .\no:B a owl:Class .\n")
    kg = parse("@prefix k: <http://k.org/> .\nk:x a k:A .\nk:y a k:a .\n")
    reshaped, rep, matches = within_compliance(kg, onto, MatchConfig(max_level=1))
    assert len(matches) == 2 and rep.used == 1
    assert rep.used_entity_rate == 1.0


def test_empty_kg_is_vacuous(brick):
    reshaped, rep, _ = within_compliance(Graph(role="kg"), brick, MatchConfig())
    assert rep.vacuous and rep.confidence == 1.0 and rep.matching_rate == 1.0
    assert len(reshaped.graph) == 0


def test_render_table_layout(mismatch_kg, brick):
    reshaped, rep, matches = within_compliance(mismatch_kg, brick, MatchConfig(max_level=1))
    text = render_table([original_report(mismatch_kg, brick, matches, reshaped, 1), rep])
    lines = text.splitlines()
    assert len(lines) == 4
    assert "Original Ontology & Matching Lv. 1" in lines[2]
    assert "Reshaped Ontology & Matching Lv. 1" in lines[3]
    assert len({len(line) for line in lines}) == 1
