"""Term inventories and keyword extraction.

KG side: concepts (IRI subjects/objects and typed classes) and relations
(non-vocabulary predicates).  Ontology side: declared classes and
properties.  Names are split into lowercase keyword bags.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .rdf import (
    OWL,
    RDF,
    RDF_TYPE,
    RDFS,
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    Graph,
    IRI,
    Term,
    is_vocabulary,
    local_name,
)

log = logging.getLogger(__name__)

DECLARATION_PREDICATES = frozenset({RDF_TYPE, RDFS_SUBCLASSOF, RDFS_SUBPROPERTYOF})

CLASS_TYPES = frozenset({IRI(OWL + "Class"), IRI(RDFS + "Class")})
PROPERTY_TYPES = frozenset(
    {
        IRI(OWL + "ObjectProperty"),
        IRI(OWL + "DatatypeProperty"),
        IRI(OWL + "AnnotationProperty"),
        IRI(RDF + "Property"),
    }
)


@dataclass(frozen=True)
class TermInventory:
    concepts: frozenset = frozenset()
    relations: frozenset = frozenset()

    def __or__(self, other: "TermInventory") -> "TermInventory":
        return TermInventory(self.concepts | other.concepts, self.relations | other.relations)

    @property
    def size(self) -> int:
        return len(self.concepts) + len(self.relations)


@dataclass(frozen=True)
class SchemaInventory:
    classes: frozenset = frozenset()
    properties: frozenset = frozenset()

    def __or__(self, other: "SchemaInventory") -> "SchemaInventory":
        return SchemaInventory(self.classes | other.classes, self.properties | other.properties)

    @property
    def entities(self) -> frozenset:
        return self.classes | self.properties

    @property
    def size(self) -> int:
        return len(self.entities)


@dataclass(frozen=True)
class KeywordBag:
    source: Term
    tokens: tuple = field(default=())

    @property
    def joined(self) -> str:
        return " ".join(self.tokens)


def find_concepts_and_relations(kg: Graph) -> TermInventory:
    concepts, relations = set(), set()
    for t in kg.triples:
        if t.predicate in DECLARATION_PREDICATES:
            if t.predicate == RDF_TYPE and t.object.is_iri and not is_vocabulary(t.object):
                concepts.add(t.object)
            continue
        if not is_vocabulary(t.predicate):
            relations.add(t.predicate)
        for node in (t.subject, t.object):
            if node.is_iri and not is_vocabulary(node):
                concepts.add(node)
    return TermInventory(frozenset(concepts), frozenset(relations))


def find_classes_and_properties(onto: Graph) -> SchemaInventory:
    classes, properties = set(), set()
    for s, o in onto.pairs(RDF_TYPE):
        if not s.is_iri:
            continue
        if o in CLASS_TYPES:
            classes.add(s)
        elif o in PROPERTY_TYPES:
            properties.add(s)
    if not classes:
        log.warning("ontology declares no classes (%d triples)", len(onto))
    return SchemaInventory(frozenset(classes), frozenset(properties))


_CAMEL = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


def split_name(name: str) -> list[str]:
    words = []
    for chunk in re.split(r"[_\-\s.]+", name):
        words.extend(m.group(0).lower() for m in _CAMEL.finditer(chunk))
    return words


def tokenize(term: Term) -> KeywordBag:
    if not term.is_iri:
        raise ValueError(f"can only tokenize IRIs, got {term.kind}")
    name = local_name(term.value)
    if not name:
        raise ValueError(f"empty local name in {term.value!r}")
    tokens = split_name(name) or [name.lower()]
    return KeywordBag(term, tuple(tokens))
