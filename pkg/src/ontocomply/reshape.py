"""Ontology reconstruction around a KG's footprint and the compliance metrics.

After the cascade has matched KG terms to ontology entities, the ontology
is cut down to the matched entities plus their super-class/super-property
closure, keeping every triple attached to a kept entity whose IRI objects
survive (one level of blank-node chasing picks up restriction axioms).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .matching import MatchCandidate, MatchConfig, cascade, total_confidence
from .rdf import (
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    Graph,
    Term,
    Triple,
    is_vocabulary,
)
from .terms import find_classes_and_properties, find_concepts_and_relations

_HIERARCHY = {"class": RDFS_SUBCLASSOF, "property": RDFS_SUBPROPERTYOF}


@dataclass(frozen=True)
class ReshapedOntology:
    graph: Graph
    kept_classes: frozenset
    kept_properties: frozenset
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def kept(self) -> frozenset:
        return self.kept_classes | self.kept_properties


@dataclass
class ComplianceReport:
    scope: str  # "original" | "reshaped"
    max_level: int
    used_entity_rate: float
    matching_rate: float
    confidence: float
    kg_terms: int
    onto_entities: int
    matched: int
    used: int
    kept: int
    vacuous: bool = False
    matched_per_level: dict = field(default_factory=dict)
    unmatched: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def find_super_closure(matched, onto: Graph, kind: str) -> frozenset:
    """``matched`` plus every transitive ancestor along subClassOf/subPropertyOf."""
    pred = _HIERARCHY[kind]
    seen = set(matched)
    stack = list(matched)
    while stack:
        node = stack.pop()
        for parent in onto.objects(node, pred):
            if parent.is_iri and not is_vocabulary(parent) and parent not in seen:
                seen.add(parent)
                stack.append(parent)
    return frozenset(seen)


def _object_ok(o: Term, kept) -> bool:
    return o.is_literal or (o.is_iri and (o in kept or is_vocabulary(o)))


def restore(kept_cls, kept_pro, onto: Graph, provenance: dict | None = None) -> ReshapedOntology:
    kept = frozenset(kept_cls) | frozenset(kept_pro)
    out: list[Triple] = []
    for s in sorted(kept):
        for p, o in onto.neighbors(s, "out"):
            if o.is_blank:
                attached = onto.neighbors(o, "out")
                if attached and all(_object_ok(o2, kept) for _, o2 in attached):
                    out.append(Triple(s, p, o))
                    out.extend(Triple(o, p2, o2) for p2, o2 in attached)
            elif _object_ok(o, kept):
                out.append(Triple(s, p, o))
    graph = Graph(out, onto.prefixes, role="ontology")
    return ReshapedOntology(graph, frozenset(kept_cls), frozenset(kept_pro), dict(provenance or {}))


def _provenance(matches, kept_cls, kept_pro, onto: Graph) -> dict:
    prov: dict = {}
    for m in sorted(matches, key=lambda c: (c.source.value, c.target.value)):
        for node in find_super_closure({m.target}, onto, m.kind):
            prov.setdefault(node, m)
    return {k: v for k, v in prov.items() if k in kept_cls or k in kept_pro}


def reshape_from_matches(matches, onto: Graph) -> ReshapedOntology:
    cls_targets = {m.target for m in matches if m.kind == "class"}
    pro_targets = {m.target for m in matches if m.kind == "property"}
    kept_cls = find_super_closure(cls_targets, onto, "class")
    kept_pro = find_super_closure(pro_targets, onto, "property")
    return restore(kept_cls, kept_pro, onto, _provenance(matches, kept_cls, kept_pro, onto))


def compliance_report(
    kg_term_count: int,
    matches,
    scored_entities: int,
    kept: int,
    scope: str,
    max_level: int,
    unmatched=(),
) -> ComplianceReport:
    matches = list(matches)
    used = len({m.target for m in matches})
    per_level = {str(lv): sum(1 for m in matches if m.level == lv) for lv in range(1, 5)}
    return ComplianceReport(
        scope=scope,
        max_level=max_level,
        used_entity_rate=used / scored_entities if scored_entities else 0.0,
        matching_rate=len(matches) / kg_term_count if kg_term_count else 1.0,
        confidence=total_confidence(matches),
        kg_terms=kg_term_count,
        onto_entities=scored_entities,
        matched=len(matches),
        used=used,
        kept=kept,
        vacuous=not matches,
        matched_per_level=per_level,
        unmatched=sorted(t.value for t in unmatched),
    )


def within_compliance(
    kg: Graph, onto: Graph, cfg: MatchConfig
) -> tuple[ReshapedOntology, ComplianceReport, list[MatchCandidate]]:
    """Extract, match, close and restore; the report scores the reshaped ontology."""
    inventory = find_concepts_and_relations(kg)
    schema = find_classes_and_properties(onto)
    matches, unmatched = cascade(inventory, schema, kg, onto, cfg)
    reshaped = reshape_from_matches(matches, onto)
    report = compliance_report(
        inventory.size, matches, len(reshaped.kept), len(reshaped.kept),
        "reshaped", cfg.max_level, unmatched,
    )
    return reshaped, report, matches


def original_report(kg: Graph, onto: Graph, matches, reshaped: ReshapedOntology, max_level: int) -> ComplianceReport:
    """Score the unreduced ontology against the same matches."""
    inventory = find_concepts_and_relations(kg)
    schema = find_classes_and_properties(onto)
    matched_sources = {m.source for m in matches}
    unmatched = [t for t in inventory.concepts | inventory.relations if t not in matched_sources]
    return compliance_report(
        inventory.size, matches, schema.size, len(reshaped.kept), "original", max_level, unmatched,
    )


TABLE_HEADER = ("Ontology & Matching Level", "Used Entity", "Matching Rate", "Confidence")


def render_table(reports) -> str:
    rows = [TABLE_HEADER]
    for r in reports:
        rows.append(
            (
                f"{r.scope.capitalize()} Ontology & Matching Lv. {r.max_level}",
                f"{100 * r.used_entity_rate:.2f}%",
                f"{100 * r.matching_rate:.2f}%",
                f"{100 * r.confidence:.2f}%",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = []
    for n, row in enumerate(rows):
        cells = [row[0].rjust(widths[0])] + [row[i].center(widths[i]) for i in range(1, 4)]
        lines.append("| " + " | ".join(cells) + " |")
        if n == 0:
            lines.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    return "\n".join(lines) + "\n"
