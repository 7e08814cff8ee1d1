"""Compliance across two KG/ontology pairs.

Each pair is first reshaped on its own.  The two reshaped ontologies are
then matched with the same level cascade, and every confirmed pair becomes
a bridge edge in a joint graph holding both KGs and both reshaped
ontologies.  Walk embeddings over that graph rank cross-ontology
candidates for the terms the cascade left unmatched.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path

from .embeddings import (
    MODELS,
    EmbeddingTable,
    SkipGramConfig,
    StructuralLayers,
    WalkConfig,
    WalkGraph,
    embed,
)
from .matching import MatchConfig, cascade
from .rdf import Graph, IRI, Term, Triple, namespace
from .reshape import ReshapedOntology, within_compliance
from .terms import SchemaInventory, TermInventory, find_classes_and_properties

BRIDGE = IRI("urn:ontocomply:bridge")
ORIGINS = ("direct", "predicted")
VARIANTS = ("unbridged", "bridged")
K_LIST = (1, 3, 5)


@dataclass(frozen=True)
class AlignedPair:
    left: Term
    right: Term
    confidence: float
    origin: str = "direct"

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"origin must be one of {ORIGINS}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0,1]")


@dataclass
class AlignmentSet:
    pairs: list = field(default_factory=list)

    @property
    def direct(self) -> list:
        return [p for p in self.pairs if p.origin == "direct"]

    @property
    def predicted(self) -> list:
        return [p for p in self.pairs if p.origin == "predicted"]

    def __len__(self) -> int:
        return len(self.pairs)

    def to_tsv(self) -> str:
        rows = [f"{p.left.value}\t{p.right.value}\t=\t{p.confidence!r}\t{p.origin}\n" for p in self.pairs]
        return "".join(rows)

    def write(self, path) -> None:
        Path(path).write_text(self.to_tsv(), encoding="utf-8")

    @classmethod
    def read(cls, path) -> "AlignmentSet":
        pairs = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 5 or parts[2] != "=":
                raise ValueError(f"{path}:{lineno}: expected left, right, =, confidence, origin")
            pairs.append(AlignedPair(IRI(parts[0]), IRI(parts[1]), float(parts[3]), parts[4]))
        return cls(pairs)


@dataclass
class ConfidenceSet:
    mu_within: tuple
    mu_cmatch: list = field(default_factory=list)
    mu_overlap: list = field(default_factory=list)

    @property
    def mu_over(self) -> list:
        return list(self.mu_cmatch) + list(self.mu_overlap)

    def to_dict(self) -> dict:
        return {
            "mu_within": list(self.mu_within),
            "mu_cmatch": list(self.mu_cmatch),
            "mu_overlap": list(self.mu_overlap),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class JointGraph:
    graph: Graph
    bridges: int


@dataclass(frozen=True)
class OverlapPrediction:
    query: Term
    candidates: tuple
    cross_filtered: tuple


@dataclass
class OverComplianceResult:
    alignment: AlignmentSet
    confidence: ConfidenceSet
    reshaped: tuple
    reports: tuple
    joint: JointGraph
    embedding: EmbeddingTable
    predictions: list
    unbridged: bool


def ontology_namespaces(onto: Graph) -> frozenset:
    return frozenset(namespace(e.value) for e in find_classes_and_properties(onto).entities)


def cross_match(re1: ReshapedOntology, re2: ReshapedOntology, cfg: MatchConfig) -> AlignmentSet:
    """Cascade from the kept terms of ``re1`` onto those of ``re2``, made one-to-one."""
    source = TermInventory(re1.kept_classes, re1.kept_properties)
    target = SchemaInventory(re2.kept_classes, re2.kept_properties)
    matches, _ = cascade(source, target, re1.graph, re2.graph, cfg)
    best: dict[Term, object] = {}
    for m in sorted(matches, key=lambda m: (-m.confidence, m.level, m.source.value)):
        best.setdefault(m.target, m)
    chosen = sorted(best.values(), key=lambda m: (m.source.value, m.target.value))
    return AlignmentSet([AlignedPair(m.source, m.target, m.confidence, "direct") for m in chosen])


def raw_space(kg1: Graph, onto1: Graph, kg2: Graph, onto2: Graph) -> Graph:
    """The unbridged baseline: all four input graphs, nothing reshaped or linked."""
    return kg1.union(onto1).union(kg2).union(onto2)


def build_joint_space(kg1: Graph, re1: Graph, kg2: Graph, re2: Graph, direct: AlignmentSet) -> JointGraph:
    left_nodes = re1.nodes() | re1.predicates()
    right_nodes = re2.nodes() | re2.predicates()
    bridges = []
    for p in direct.direct:
        if p.left not in left_nodes or p.right not in right_nodes:
            raise ValueError(f"dangling alignment pair {p.left.value} = {p.right.value}")
        bridges.append(Triple(p.left, BRIDGE, p.right))
    union = kg1.union(re1).union(kg2).union(re2)
    return JointGraph(union.union(Graph(bridges)), len(bridges))


def schema_kinds(*ontologies: Graph) -> dict:
    """Term -> "class" | "property" over the declared entities of ``ontologies``."""
    kinds: dict = {}
    for onto in ontologies:
        schema = find_classes_and_properties(onto)
        kinds.update({t: "class" for t in schema.classes})
        kinds.update({t: "property" for t in schema.properties})
    return kinds


def cross_candidates(table: EmbeddingTable, query: Term, own_ns, other_ns, k: int, kinds=None) -> list:
    """Top-``k`` neighbours of ``query`` whose namespace belongs only to the other side.

    With ``kinds`` the pool is further limited to declared entities of the
    query's own kind, so properties are ranked against properties.
    """
    allowed = set(other_ns) - set(own_ns)
    pool = [t for t in table.terms if t.is_iri and namespace(t.value) in allowed]
    if kinds is not None:
        want = kinds.get(query)
        pool = [t for t in pool if want is not None and kinds.get(t) == want]
    return table.most_similar(query, k, candidates=pool)


def _space_config(walk_cfg: WalkConfig) -> WalkConfig:
    return walk_cfg if walk_cfg.reify_predicates else replace(walk_cfg, reify_predicates=True)


def run_over_compliance(
    kg1: Graph, onto1: Graph, kg2: Graph, onto2: Graph,
    match_cfg: MatchConfig, walk_cfg: WalkConfig, sg_cfg: SkipGramConfig,
    model: str = "struc2vec", top_n: int = 5,
) -> OverComplianceResult:
    re1, rep1, _ = within_compliance(kg1, onto1, match_cfg)
    re2, rep2, _ = within_compliance(kg2, onto2, match_cfg)

    direct = cross_match(re1, re2, match_cfg)
    joint = build_joint_space(kg1, re1.graph, kg2, re2.graph, direct)
    table = embed(joint.graph, _space_config(walk_cfg), sg_cfg, model, keep_flat=(BRIDGE,))

    ns1, ns2 = ontology_namespaces(onto1), ontology_namespaces(onto2)
    kinds = schema_kinds(onto1, onto2)
    left_done = {p.left for p in direct.direct}
    right_done = {p.right for p in direct.direct}
    queries = [(t, ns1, ns2, True) for t in sorted(re1.kept - left_done)]
    queries += [(t, ns2, ns1, False) for t in sorted(re2.kept - right_done)]

    predictions, predicted = [], []
    for term, own, other, is_left in queries:
        if term not in table:
            continue
        ranked = table.most_similar(term, top_n)
        filtered = cross_candidates(table, term, own, other, top_n, kinds)
        predictions.append(OverlapPrediction(term, tuple(ranked), tuple(filtered)))
        if filtered:
            cand, cos = filtered[0]
            mu = min(1.0, max(0.0, (cos + 1.0) / 2.0))
            left, right = (term, cand) if is_left else (cand, term)
            predicted.append(AlignedPair(left, right, mu, "predicted"))

    alignment = AlignmentSet(direct.direct + predicted)
    confidence = ConfidenceSet(
        (rep1.confidence, rep2.confidence),
        [p.confidence for p in direct.direct],
        [p.confidence for p in predicted],
    )
    return OverComplianceResult(
        alignment, confidence, (re1, re2), (rep1, rep2), joint, table, predictions,
        unbridged=joint.bridges == 0,
    )


def over_compliance(kg1, onto1, kg2, onto2, match_cfg, walk_cfg, sg_cfg, model="struc2vec"):
    res = run_over_compliance(kg1, onto1, kg2, onto2, match_cfg, walk_cfg, sg_cfg, model)
    return res.alignment, res.confidence


def read_ground_truth(path) -> list[tuple[Term, Term]]:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"{path}:{lineno}: expected two tab-separated IRIs")
        pairs.append((IRI(parts[0]), IRI(parts[1])))
    if not pairs:
        raise ValueError(f"{path}: no ground-truth pairs")
    return pairs


@dataclass
class EvalTable:
    """Hit rates per (model, variant, k): one value per seed."""

    runs: dict
    seeds: list

    def cell(self, model: str, variant: str, k: int) -> dict:
        xs = self.runs[model][variant][k]
        sd = statistics.stdev(xs) if len(xs) > 1 else 0.0
        return {"mean": statistics.fmean(xs), "sd": sd}

    def to_dict(self) -> dict:
        return {
            m: {v: {str(k): self.cell(m, v, k) for k in self.runs[m][v]} for v in self.runs[m]}
            for m in self.runs
        }

    def to_json(self) -> str:
        return json.dumps({"seeds": list(self.seeds), "table": self.to_dict()}, indent=2, sort_keys=True)

    def render(self) -> str:
        models = list(self.runs)
        ks = sorted({k for m in models for v in self.runs[m] for k in self.runs[m][v]})
        head = ["@k"] + [f"{m} {v}"
                         for m in models for v in VARIANTS if v in self.runs[m]]
        rows = [head]
        for k in ks:
            row = [str(k)]
            for m in models:
                for v in VARIANTS:
                    if v in self.runs[m]:
                        c = self.cell(m, v, k)
                        row.append(f"{100 * c['mean']:.2f}±{100 * c['sd']:.2f}%")
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        lines = ["| " + " | ".join(c.center(w) for c, w in zip(r, widths)) + " |" for r in rows]
        lines.insert(1, "|" + "|".join("-" * (w + 2) for w in widths) + "|")
        return "\n".join(lines) + "\n"


def hits_at_k(table: EmbeddingTable, ground_truth, namespaces: tuple, kinds=None, k_list=K_LIST) -> dict:
    """Fraction of ground-truth pairs whose right term is in the left term's cross-filtered top-k."""
    ns_left, ns_right = namespaces
    kmax = max(k_list)
    hits = {k: 0 for k in k_list}
    for left, right in ground_truth:
        if left not in table or right not in table:
            raise ValueError(f"ground-truth pair {left.value} / {right.value} missing from the embedding")
        ranked = [t for t, _ in cross_candidates(table, left, ns_left, ns_right, kmax, kinds)]
        for k in k_list:
            hits[k] += right in ranked[:k]
    return {k: hits[k] / len(ground_truth) for k in k_list}


def topk_eval(
    variants: dict,
    ground_truth,
    namespaces: tuple,
    kinds: dict | None,
    walk_cfg: WalkConfig,
    sg_cfg: SkipGramConfig,
    seeds,
    k_list=K_LIST,
    models=MODELS,
) -> EvalTable:
    """Seeded hit@k of each ground-truth partner in cross-filtered top-k.

    ``variants`` maps a variant name to its graph; ``namespaces`` is the
    pair (left ontology namespaces, right ontology namespaces) used for
    cross filtering and ``kinds`` the optional same-kind restriction.
    A seed's hit rate is the fraction of ground-truth
    pairs whose right-hand partner is found from the left-hand query.
    """
    wc = _space_config(walk_cfg)
    seeds = sorted(seeds)
    runs: dict = {m: {v: {k: [] for k in k_list} for v in variants} for m in models}
    for vname, graph in variants.items():
        wg = WalkGraph.from_graph(graph, True, (BRIDGE,))
        vocab = set(wg.nodes)
        for left, right in ground_truth:
            for t in (left, right):
                if t not in vocab:
                    raise ValueError(f"ground-truth term {t.value} missing from {vname} vocabulary")
        layers = None
        for model in models:
            if model == "struc2vec" and layers is None:
                layers = StructuralLayers(wg, wc.layers)
            for seed in seeds:
                table = embed(graph, replace(wc, seed=seed), replace(sg_cfg, seed=seed), model,
                              keep_flat=(BRIDGE,), layers=layers if model == "struc2vec" else None)
                hits = hits_at_k(table, ground_truth, namespaces, kinds, k_list)
                for k in k_list:
                    runs[model][vname][k].append(hits[k])
    return EvalTable(runs, seeds)


def eval_spaces(kg1, onto1, kg2, onto2, match_cfg: MatchConfig) -> dict:
    """The two spaces compared by :func:`topk_eval`: raw union vs bridged joint graph."""
    re1, _, _ = within_compliance(kg1, onto1, match_cfg)
    re2, _, _ = within_compliance(kg2, onto2, match_cfg)
    joint = build_joint_space(kg1, re1.graph, kg2, re2.graph, cross_match(re1, re2, match_cfg))
    return {"unbridged": raw_space(kg1, onto1, kg2, onto2), "bridged": joint.graph}
