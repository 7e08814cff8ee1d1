"""Ontology compliance for knowledge graphs: matching, reshaping, alignment and fragments."""

from .crossalign import build_joint_space, over_compliance, topk_eval
from .embeddings import EmbeddingTable, SkipGramConfig, WalkConfig, embed, generate_walks, train_skipgram
from .fragments import Fragment, joint_eval, liebig_select, load_fragment, rewrite_kg, score_fragments
from .matching import MatchCandidate, MatchConfig, VectorFile, cascade, levenshtein_similarity
from .rdf import Graph, IRI, BNode, Literal, Term, Triple, load, parse, serialize
from .reshape import ComplianceReport, ReshapedOntology, original_report, within_compliance

__version__ = "0.1.0"

__all__ = [
    "BNode", "ComplianceReport", "EmbeddingTable", "Fragment", "Graph", "IRI", "Literal",
    "MatchCandidate", "MatchConfig", "ReshapedOntology", "SkipGramConfig", "Term", "Triple",
    "VectorFile", "WalkConfig", "build_joint_space", "cascade", "embed", "generate_walks",
    "joint_eval", "levenshtein_similarity", "liebig_select", "load", "load_fragment",
    "original_report", "over_compliance", "parse", "rewrite_kg", "score_fragments",
    "serialize", "topk_eval", "train_skipgram", "within_compliance",
]
