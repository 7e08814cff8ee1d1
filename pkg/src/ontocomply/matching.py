"""Four-level matching cascade between KG terms and ontology entities.

Levels, tried in order for every KG term until one yields a candidate:

1. pure        -- identical keyword lists, confidence 1
2. heuristic   -- normalised Levenshtein similarity of the joined keywords
3. semantic    -- cosine of mean word vectors, rescaled to [0, 1]
4. topological -- Jaccard overlap of matched neighbourhoods
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol

import numpy as np

from .rdf import RDF_TYPE, Graph, Term, is_vocabulary
from .terms import (
    DECLARATION_PREDICATES,
    KeywordBag,
    SchemaInventory,
    TermInventory,
    tokenize,
)

log = logging.getLogger(__name__)

LEVEL_NAMES = {1: "pure", 2: "heuristic", 3: "semantic", 4: "topological"}


@dataclass(frozen=True)
class MatchCandidate:
    source: Term
    target: Term
    level: int
    confidence: float
    kind: str = "class"  # "class" | "property"

    def __post_init__(self):
        if self.level not in LEVEL_NAMES:
            raise ValueError(f"level must be 1..4, got {self.level}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0,1]: {self.confidence}")
        if self.level == 1 and self.confidence != 1.0:
            raise ValueError("level-1 matches carry confidence 1.0")


class SemanticProvider(Protocol):
    def lookup(self, token: str) -> np.ndarray | None: ...


class VectorFile:
    """Word vectors read from a ``N D`` header file, one ``token v1 .. vD`` per line."""

    def __init__(self, vectors: Mapping[str, np.ndarray]):
        self.vectors = {k: np.asarray(v, dtype=float) for k, v in vectors.items()}
        dims = {v.shape for v in self.vectors.values()}
        if len(dims) > 1:
            raise ValueError("vectors have mixed dimensions")
        self.dim = dims.pop()[0] if dims else 0

    @classmethod
    def load(cls, path) -> "VectorFile":
        return cls(read_vectors(path))

    def lookup(self, token: str) -> np.ndarray | None:
        return self.vectors.get(token)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


def read_vectors(path) -> dict[str, np.ndarray]:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise ValueError(f"{path}: empty vector file")
    try:
        n, d = (int(x) for x in text[0].split())
    except ValueError:
        raise ValueError(f"{path}:1: expected 'N D' header") from None
    out = {}
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != d + 1:
            raise ValueError(f"{path}:{lineno}: expected {d + 1} fields, got {len(parts)}")
        vec = np.array([float(x) for x in parts[1:]])
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"{path}:{lineno}: non-finite component")
        out[parts[0]] = vec
    if len(out) != n:
        raise ValueError(f"{path}: header announces {n} rows, found {len(out)}")
    return out


def write_vectors(path, vectors: Mapping[str, np.ndarray]) -> None:
    keys = sorted(vectors)
    dim = len(vectors[keys[0]]) if keys else 0
    lines = [f"{len(keys)} {dim}"]
    for k in keys:
        lines.append(k + " " + " ".join(repr(float(x)) for x in vectors[k]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class MatchConfig:
    max_level: int = 4
    heuristic_threshold: float = 0.75
    semantic_threshold: float = 0.8
    topological_threshold: float = 0.5
    semantic_provider: SemanticProvider | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.max_level not in (1, 2, 3, 4):
            raise ValueError(f"max_level must be in 1..4, got {self.max_level}")
        for name in ("heuristic_threshold", "semantic_threshold", "topological_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {value}")


# ---------------------------------------------------------------- metrics

def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit insert/delete/substitute costs (two-row DP)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def levenshtein_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def bag_vector(bag: KeywordBag, provider: SemanticProvider) -> np.ndarray | None:
    vecs = [v for v in (provider.lookup(t) for t in bag.tokens) if v is not None]
    if not vecs:
        return None
    return np.mean(vecs, axis=0)


def cosine_unit(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity rescaled from [-1, 1] to [0, 1]; 0.5 for zero vectors."""
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.5
    cos = float(np.dot(u, v) / (nu * nv))
    return min(1.0, max(0.0, (cos + 1.0) / 2.0))


def jaccard(a: set, b: set) -> float | None:
    union = a | b
    if not union:
        return None
    return len(a & b) / len(union)


# ---------------------------------------------------------------- neighbourhoods

def kg_context(kg: Graph, term: Term) -> frozenset:
    """Schema-level neighbourhood of a KG term.

    Direct IRI neighbours (type edges excluded), plus for a class the
    predicates used on its instances, plus for a predicate the classes of
    its subjects and objects.
    """
    out = set()
    for p, other in kg.neighbors(term, "both"):
        if p == RDF_TYPE:
            continue
        if other.is_iri and not is_vocabulary(other) and other != term:
            out.add(other)
        if p not in DECLARATION_PREDICATES and not is_vocabulary(p):
            out.add(p)
    for inst in kg.subjects(RDF_TYPE, term):
        for p, _ in kg.neighbors(inst, "both"):
            if p not in DECLARATION_PREDICATES and not is_vocabulary(p):
                out.add(p)
    for s, o in kg.pairs(term):
        for node in (s, o):
            if node.is_literal:
                continue
            for cls in kg.objects(node, RDF_TYPE):
                if cls.is_iri and not is_vocabulary(cls):
                    out.add(cls)
    out.discard(term)
    return frozenset(out)


def onto_context(onto: Graph, term: Term) -> frozenset:
    """IRI neighbours of an ontology entity via any non-type edge."""
    out = set()
    for p, other in onto.neighbors(term, "both"):
        if p == RDF_TYPE:
            continue
        if other.is_iri and not is_vocabulary(other) and other != term:
            out.add(other)
    return frozenset(out)


def topological_score(kg_neighbours, onto_neighbours, confirmed: Mapping[Term, Term]) -> float | None:
    image = {confirmed[n] if n in confirmed else ("unmatched", n) for n in kg_neighbours}
    return jaccard(image, set(onto_neighbours))


# ---------------------------------------------------------------- single matchers

def pure_match(a: KeywordBag, b: KeywordBag) -> MatchCandidate | None:
    if a.tokens == b.tokens:
        return MatchCandidate(a.source, b.source, 1, 1.0)
    return None


def heuristic_match(a: KeywordBag, b: KeywordBag, threshold: float) -> MatchCandidate | None:
    s = levenshtein_similarity(a.joined, b.joined)
    if s >= threshold:
        return MatchCandidate(a.source, b.source, 2, s)
    return None


def semantic_match(a: Term, b: Term, provider: SemanticProvider, threshold: float) -> MatchCandidate | None:
    va, vb = bag_vector(tokenize(a), provider), bag_vector(tokenize(b), provider)
    if va is None or vb is None:
        log.debug("semantic: out-of-vocabulary bag for %s / %s", a, b)
        return None
    s = cosine_unit(va, vb)
    if s >= threshold:
        return MatchCandidate(a, b, 3, s)
    return None


def topological_match(
    a: Term,
    b: Term,
    kg: Graph,
    onto: Graph,
    confirmed,
    threshold: float,
) -> MatchCandidate | None:
    mapping = _confirmed_map(confirmed)
    s = topological_score(kg_context(kg, a), onto_context(onto, b), mapping)
    if s is None:
        log.debug("topological: empty neighbourhoods for %s / %s", a, b)
        return None
    if s >= threshold:
        return MatchCandidate(a, b, 4, s)
    return None


def _confirmed_map(confirmed) -> dict:
    if isinstance(confirmed, Mapping):
        return dict(confirmed)
    return {c.source: c.target for c in confirmed}


# ---------------------------------------------------------------- cascade

def _best(scored: list[tuple[float, Term]]) -> tuple[float, Term] | None:
    if not scored:
        return None
    return min(scored, key=lambda st: (-st[0], st[1].value))


def cascade(
    kg_terms: TermInventory,
    schema: SchemaInventory,
    kg: Graph,
    onto: Graph,
    cfg: MatchConfig,
) -> tuple[list[MatchCandidate], list[Term]]:
    """Match every KG concept to a class and every relation to a property.

    Returns ``(matches, unmatched)``.  Each KG term gets at most one
    candidate: the best-scoring target at the first level that yields any,
    ties going to the lexicographically smallest target IRI.  Level 4 sees
    the matches of levels 1-3 of both concepts and relations.
    """
    groups = [
        ("class", sorted(t for t in kg_terms.concepts if t.is_iri), sorted(schema.classes)),
        ("property", sorted(t for t in kg_terms.relations if t.is_iri), sorted(schema.properties)),
    ]
    provider = cfg.semantic_provider
    if cfg.max_level >= 3 and provider is None:
        log.info("no semantic provider configured; level 3 disabled")

    bags: dict[Term, KeywordBag] = {}
    vecs: dict[Term, np.ndarray | None] = {}

    def bag(t: Term) -> KeywordBag:
        if t not in bags:
            bags[t] = tokenize(t)
        return bags[t]

    def vec(t: Term):
        if t not in vecs:
            vecs[t] = bag_vector(bag(t), provider)
        return vecs[t]

    found: dict[Term, MatchCandidate] = {}
    pending: list[tuple[str, Term, list[Term]]] = []
    for kind, sources, targets in groups:
        for src in sources:
            cand = None
            for level in range(1, min(cfg.max_level, 3) + 1):
                cand = _level_best(level, src, targets, bag, vec, cfg, kind)
                if cand is not None:
                    break
            if cand is not None:
                found[src] = cand
            else:
                pending.append((kind, src, targets))

    if cfg.max_level >= 4 and pending:
        confirmed = {c.source: c.target for c in found.values()}
        onto_ctx: dict[Term, frozenset] = {}
        for kind, src, targets in pending:
            kctx = kg_context(kg, src)
            scored = []
            for tgt in targets:
                if tgt not in onto_ctx:
                    onto_ctx[tgt] = onto_context(onto, tgt)
                s = topological_score(kctx, onto_ctx[tgt], confirmed)
                if s is not None and s >= cfg.topological_threshold:
                    scored.append((s, tgt))
            best = _best(scored)
            if best is not None:
                found[src] = MatchCandidate(src, best[1], 4, best[0], kind)

    matches, unmatched = [], []
    for kind, sources, _ in groups:
        for src in sources:
            if src in found:
                matches.append(found[src])
            else:
                unmatched.append(src)
    return matches, unmatched


def _level_best(level, src, targets, bag, vec, cfg: MatchConfig, kind: str) -> MatchCandidate | None:
    a = bag(src)
    scored = []
    if level == 1:
        for tgt in targets:
            if bag(tgt).tokens == a.tokens:
                scored.append((1.0, tgt))
    elif level == 2:
        for tgt in targets:
            s = levenshtein_similarity(a.joined, bag(tgt).joined)
            if s >= cfg.heuristic_threshold:
                scored.append((s, tgt))
    elif level == 3:
        if cfg.semantic_provider is None:
            return None
        va = vec(src)
        if va is None:
            return None
        for tgt in targets:
            vb = vec(tgt)
            if vb is None:
                continue
            s = cosine_unit(va, vb)
            if s >= cfg.semantic_threshold:
                scored.append((s, tgt))
    best = _best(scored)
    if best is None:
        return None
    return MatchCandidate(src, best[1], level, best[0], kind)


def total_confidence(cands) -> float:
    """Mean confidence over all matches, concepts and relations pooled.

    An empty list scores 1.0 (vacuous compliance); callers flag that case.
    """
    values = [c.confidence for c in cands]
    if not values:
        return 1.0
    return float(sum(values) / len(values))
