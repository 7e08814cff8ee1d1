"""Ontology fragments as alternative vocabularies for the same KG.

A fragment is a small ontology plus a term rewrite table from the KG's
original vocabulary.  Fragments are scored on several criteria and the
winner is the one whose weakest criterion is strongest (max-min).  The
joint evaluation classifies KG instances from their embeddings at several
depths of the fragment's class hierarchy.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .embeddings import SkipGramConfig, WalkConfig, embed
from .rdf import RDF_TYPE, RDFS_SUBCLASSOF, Graph, IRI, Term, Triple, is_vocabulary, load, namespace
from .terms import find_classes_and_properties

UNMAPPED = "-"
CRITERIA = (
    "namespaces",
    "abstraction_fit",
    "concept_coverage",
    "depth_fit",
    "completeness",
    "expressiveness",
)


@dataclass(frozen=True)
class Fragment:
    """``mapping`` sends original IRIs to fragment IRIs, or to None when the
    fragment deliberately has no counterpart for that term."""

    name: str
    mapping: dict
    graph: Graph

    def __post_init__(self):
        known = self.graph.nodes() | self.graph.predicates()
        for src, dst in self.mapping.items():
            if dst is not None and dst not in known:
                raise ValueError(f"fragment {self.name}: target {dst.value} (for {src.value}) not in fragment graph")

    @property
    def claimed_namespaces(self) -> frozenset:
        return frozenset(namespace(s.value) for s in self.mapping)

    @property
    def targets(self) -> frozenset:
        return frozenset(t for t in self.mapping.values() if t is not None)


def read_mapping(path) -> dict:
    mapping: dict = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValueError(f"{path}:{lineno}: expected 'original<TAB>replacement'")
        try:
            src = IRI(parts[0])
            dst = None if parts[1] == UNMAPPED else IRI(parts[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        if src in mapping:
            raise ValueError(f"{path}:{lineno}: duplicate entry for {parts[0]}")
        mapping[src] = dst
    return mapping


def load_fragment(mapping_path, graph_path=None, name: str | None = None) -> Fragment:
    """Mapping TSV plus its ontology; by default the ``.ttl`` next to the TSV."""
    mapping_path = Path(mapping_path)
    graph_path = Path(graph_path) if graph_path else mapping_path.with_suffix(".ttl")
    if not graph_path.exists():
        raise ValueError(f"{mapping_path}: fragment ontology {graph_path} not found")
    return Fragment(name or mapping_path.stem, read_mapping(mapping_path), load(graph_path, role="ontology"))


def kg_schema_terms(kg: Graph) -> frozenset:
    """Class IRIs used in type assertions and the non-vocabulary predicates."""
    out = set()
    for t in kg.triples:
        if t.predicate == RDF_TYPE:
            if t.object.is_iri and not is_vocabulary(t.object):
                out.add(t.object)
        elif not is_vocabulary(t.predicate):
            out.add(t.predicate)
    return frozenset(out)


def rewrite_kg(kg: Graph, frag: Fragment) -> Graph:
    """Substitute every mapped term; unmapped and instance terms stay as they are."""
    claimed = frag.claimed_namespaces
    missing = sorted(t.value for t in kg_schema_terms(kg) if namespace(t.value) in claimed and t not in frag.mapping)
    if missing:
        raise ValueError(f"fragment {frag.name} has no mapping entry for: {', '.join(missing)}")

    def sub(term: Term) -> Term:
        dst = frag.mapping.get(term)
        return term if dst is None else dst

    out = [Triple(sub(t.subject), sub(t.predicate), sub(t.object)) for t in kg.triples]
    rewritten = Graph(out, kg.prefixes, role=kg.role)
    if len(rewritten) != len(kg):
        raise ValueError(f"fragment {frag.name} merges distinct triples; rewrite is not one-to-one")
    return rewritten


# ------------------------------------------------------------- hierarchy

def class_depths(onto: Graph) -> dict:
    """Depth of each declared class: 1 for roots, else 1 + shallowest parent."""
    classes = find_classes_and_properties(onto).classes
    parents = {c: sorted(p for p in onto.objects(c, RDFS_SUBCLASSOF) if p in classes) for c in classes}
    depth: dict = {}
    frontier = sorted(c for c in classes if not parents[c])
    for c in frontier:
        depth[c] = 1
    level = 1
    while frontier:
        level += 1
        nxt = sorted(c for c in classes if c not in depth and any(p in depth for p in parents[c]))
        for c in nxt:
            depth[c] = level
        frontier = nxt
    for c in classes:  # cycles with no root
        depth.setdefault(c, 1)
    return depth


def ancestor_at(cls: Term, level: int, onto: Graph, depths: dict) -> Term:
    """Ancestor of ``cls`` at depth ``min(level, depth(cls))`` along shallowest parents."""
    node = cls
    while depths[node] > level:
        parents = [p for p in onto.objects(node, RDFS_SUBCLASSOF) if p in depths]
        node = min(parents, key=lambda p: (depths[p], p.value))
    return node


# ------------------------------------------------------------- criteria

@dataclass(frozen=True)
class CriteriaConfig:
    target_depth: int = 3
    target_abstraction: float = 2.0
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.target_depth < 1 or self.target_abstraction < 0:
            raise ValueError("targets must be positive")
        for name, w in self.weights.items():
            if name not in CRITERIA and name != "performance":
                raise ValueError(f"unknown criterion {name!r}")
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"weight for {name} must be in [0,1]")

    @classmethod
    def from_json(cls, path) -> "CriteriaConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        unknown = set(raw) - {"target_depth", "target_abstraction", "weights"}
        if unknown:
            raise ValueError(f"unknown criteria config keys: {sorted(unknown)}")
        return cls(**raw)


@dataclass(frozen=True)
class CriteriaVector:
    scores: dict

    def __post_init__(self):
        for name, s in self.scores.items():
            if not (0.0 <= s <= 1.0) or math.isnan(s):
                raise ValueError(f"criterion {name} = {s} outside [0,1]")

    @property
    def minimum(self) -> float:
        return min(self.scores.values())

    @property
    def mean(self) -> float:
        return statistics.fmean(self.scores.values())


def _raw_stats(kg: Graph, frag: Fragment) -> dict:
    schema = find_classes_and_properties(frag.graph)
    depths = class_depths(frag.graph)
    used_classes = [t for t in frag.targets if t in schema.classes]
    kg_terms = kg_schema_terms(kg)
    mapped = [t for t in kg_terms if frag.mapping.get(t) is not None]
    return {
        "namespaces": len({namespace(e.value) for e in schema.entities}),
        "mean_depth": statistics.fmean(depths[c] for c in used_classes) if used_classes else 0.0,
        "coverage": len(used_classes) / len(schema.classes) if schema.classes else 0.0,
        "max_depth": max(depths.values(), default=0),
        "completeness": len(mapped) / len(kg_terms) if kg_terms else 1.0,
        "predicates": len(schema.properties),
    }


def score_fragments(
    kg: Graph,
    frags,
    cfg: CriteriaConfig = CriteriaConfig(),
    performance: Callable[[Fragment], float] | None = None,
) -> list[tuple[Fragment, CriteriaVector]]:
    """Criteria vectors for each fragment, normalised across the candidate set.

    ``performance`` is an optional hook returning a [0,1] score per
    fragment (for instance a joint-evaluation accuracy); when given it is
    added as a seventh criterion.
    """
    frags = list(frags)
    if not frags:
        raise ValueError("no fragments to score")
    stats = {f.name: _raw_stats(kg, f) for f in frags}
    n_min = min(s["namespaces"] for s in stats.values())
    p_max = max(s["predicates"] for s in stats.values())
    out = []
    for f in frags:
        s = stats[f.name]
        raw = {
            "namespaces": 1.0 / (1.0 + s["namespaces"] - n_min),
            "abstraction_fit": 1.0 / (1.0 + abs(s["mean_depth"] - cfg.target_abstraction)),
            "concept_coverage": s["coverage"],
            "depth_fit": 1.0 / (1.0 + abs(s["max_depth"] - cfg.target_depth)),
            "completeness": s["completeness"],
            "expressiveness": s["predicates"] / p_max if p_max else 0.0,
        }
        if performance is not None:
            raw["performance"] = float(performance(f))
        scores = {k: 1.0 - cfg.weights.get(k, 1.0) * (1.0 - v) for k, v in raw.items()}
        out.append((f, CriteriaVector(scores)))
    return out


def liebig_select(frags) -> Fragment:
    """Fragment with the highest minimum criterion; ties by mean, then name."""
    frags = list(frags)
    if not frags:
        raise ValueError("liebig_select needs at least one fragment")
    keys = {tuple(sorted(v.scores)) for _, v in frags}
    if len(keys) != 1:
        raise ValueError("criteria vectors use different criteria sets")
    return min(frags, key=lambda fv: (-fv[1].minimum, -fv[1].mean, fv[0].name))[0]


# ------------------------------------------------------------- joint eval

def _typed_instances(kg: Graph, depths: dict) -> dict:
    out = {}
    for s, o in kg.pairs(RDF_TYPE):
        if o in depths and not is_vocabulary(s):
            prev = out.get(s)
            if prev is None or (depths[o], o.value) > (depths[prev], prev.value):
                out[s] = o
    return out


def _centroid_accuracy(vectors: np.ndarray, labels: list) -> float:
    """Leave-one-out nearest-centroid accuracy under cosine similarity."""
    names = sorted(set(labels))
    if len(names) == 1:
        return 1.0
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    unit = vectors / np.where(norms > 0, norms, 1.0)
    lab = np.array([names.index(x) for x in labels])
    sums = np.zeros((len(names), unit.shape[1]))
    np.add.at(sums, lab, unit)
    counts = np.bincount(lab, minlength=len(names)).astype(float)
    correct = 0
    for i in range(len(labels)):
        s = sums.copy()
        c = counts.copy()
        s[lab[i]] -= unit[i]
        c[lab[i]] -= 1
        ok = c > 0
        cent = s[ok] / c[ok][:, None]
        cn = np.linalg.norm(cent, axis=1)
        sims = (cent @ unit[i]) / np.where(cn > 0, cn, 1.0)
        best = np.flatnonzero(ok)[int(np.argmax(sims))]
        correct += best == lab[i]
    return correct / len(labels)


def joint_eval(
    kg: Graph,
    frag: Fragment,
    levels,
    walk_cfg: WalkConfig,
    sg_cfg: SkipGramConfig,
    seeds,
    model: str = "deepwalk",
) -> dict:
    """Mean and sample sd of classification accuracy per abstraction level.

    Type assertions are removed before training so labels cannot leak
    into the walks.
    """
    rewritten = rewrite_kg(kg, frag)
    depths = class_depths(frag.graph)
    max_depth = max(depths.values(), default=0)
    levels = sorted(set(levels))
    for lv in levels:
        if lv < 1 or lv > max_depth:
            raise ValueError(f"level {lv} outside fragment {frag.name} hierarchy depth {max_depth}")
    typed = _typed_instances(rewritten, depths)
    if not typed:
        raise ValueError(f"no typed instances resolve to classes of fragment {frag.name}")
    train = Graph([t for t in rewritten.triples if t.predicate != RDF_TYPE], rewritten.prefixes, role="kg")
    instances = sorted(typed)
    labels = {lv: [ancestor_at(typed[i], lv, frag.graph, depths) for i in instances] for lv in levels}
    runs = {lv: [] for lv in levels}
    for seed in sorted(seeds):
        table = embed(train, replace(walk_cfg, seed=seed), replace(sg_cfg, seed=seed), model)
        vecs = np.array([table[i] if i in table else np.zeros(table.dim) for i in instances])
        for lv in levels:
            runs[lv].append(_centroid_accuracy(vecs, labels[lv]))
    return {
        lv: {"mean": statistics.fmean(xs), "sd": statistics.stdev(xs) if len(xs) > 1 else 0.0}
        for lv, xs in runs.items()
    }
