"""Seeded generator of KGs whose terms are planted distortions of an ontology.

Four categories, one per cascade level: ``exact`` copies a name, ``typo``
introduces one edit, ``synonym`` swaps keywords for listed synonyms, and
``structural`` replaces the name with an opaque token so only the
neighbourhood can recover it.  Every planted term is checked against the
cascade's own scoring rules, so the answer key is exact: a plant is only
accepted if the level it was planted for recovers its origin.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass
from pathlib import Path

from .matching import (
    MatchConfig,
    bag_vector,
    cosine_unit,
    kg_context,
    levenshtein_similarity,
    onto_context,
    topological_score,
)
from .rdf import (
    RDF,
    RDF_TYPE,
    RDFS,
    RDFS_DOMAIN,
    RDFS_RANGE,
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    BNode,
    Graph,
    IRI,
    Literal,
    Term,
    Triple,
    is_vocabulary,
    local_name,
)
from .terms import find_classes_and_properties, split_name, tokenize

KG_NS = "http://example.org/kg#"
CATEGORIES = ("exact", "typo", "synonym", "structural")
CATEGORY_LEVEL = {c: i for i, c in enumerate(CATEGORIES, start=1)}


@dataclass(frozen=True)
class MismatchSpec:
    n_exact: int = 0
    n_typo: int = 0
    n_synonym: int = 0
    n_structural: int = 0
    seed: int = 0

    def __post_init__(self):
        for name in ("n_exact", "n_typo", "n_synonym", "n_structural"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.n_exact + self.n_typo + self.n_synonym + self.n_structural


@dataclass(frozen=True)
class Plant:
    planted: Term
    origin: Term
    category: str


def read_synonyms(path) -> dict[str, str]:
    """First listed synonym per token from a ``token<TAB>synonym[<TAB>cos]`` file."""
    out: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        out.setdefault(parts[0], parts[1])
    return out


def write_answer_key(path, plants) -> None:
    lines = [f"{p.planted.value}\t{p.origin.value}\t{p.category}" for p in plants]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_answer_key(path) -> list[Plant]:
    plants = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[2] not in CATEGORIES:
            raise ValueError(f"{path}:{lineno}: expected planted, origin, category")
        plants.append(Plant(IRI(parts[0]), IRI(parts[1]), parts[2]))
    return plants


def _render(tokens, kind: str) -> str:
    if kind == "class":
        return "_".join(t.capitalize() for t in tokens)
    return tokens[0] + "".join(t.capitalize() for t in tokens[1:])


def _typo(tokens, rng: random.Random):
    idx = max(range(len(tokens)), key=lambda i: (len(tokens[i]), -i))
    word = tokens[idx]
    if len(word) < 4 or not word.isalpha():
        return None
    pos = rng.randrange(1, len(word) - 1)
    op = rng.choice(("delete", "substitute", "swap"))
    if op == "delete":
        new = word[:pos] + word[pos + 1:]
    elif op == "substitute":
        letter = rng.choice([c for c in string.ascii_lowercase if c != word[pos]])
        new = word[:pos] + letter + word[pos + 1:]
    else:
        if word[pos] == word[pos + 1]:
            return None
        new = word[:pos] + word[pos + 1] + word[pos] + word[pos + 2:]
    return tokens[:idx] + [new] + tokens[idx + 1:]


def _opaque(rng: random.Random) -> list[str]:
    consonants = "bcdfghjklmnpqrstvwxz"
    return ["".join(rng.choice(consonants) for _ in range(7))]


class _Checker:
    """Replays the cascade's per-level scoring for one candidate name."""

    def __init__(self, schema, cfg: MatchConfig):
        self.cfg = cfg
        self.targets = {
            "class": sorted(schema.classes),
            "property": sorted(schema.properties),
        }
        self.tokens = {t: tokenize(t).tokens for ts in self.targets.values() for t in ts}
        self.vecs = {}
        if cfg.semantic_provider is not None:
            for t in self.tokens:
                self.vecs[t] = bag_vector(tokenize(t), cfg.semantic_provider)

    def _best(self, scored):
        scored = [(s, t) for s, t in scored if s is not None]
        if not scored:
            return None
        return min(scored, key=lambda st: (-st[0], st[1].value))

    def pure_hits(self, tokens, kind):
        return [t for t in self.targets[kind] if self.tokens[t] == tuple(tokens)]

    def heuristic_best(self, tokens, kind):
        joined = " ".join(tokens)
        th = self.cfg.heuristic_threshold
        scored = []
        for t in self.targets[kind]:
            s = levenshtein_similarity(joined, " ".join(self.tokens[t]))
            if s >= th:
                scored.append((s, t))
        return self._best(scored)

    def semantic_best(self, planted: Term, kind):
        provider = self.cfg.semantic_provider
        if provider is None:
            return None
        va = bag_vector(tokenize(planted), provider)
        if va is None:
            return None
        scored = []
        for t in self.targets[kind]:
            vb = self.vecs.get(t)
            if vb is None:
                continue
            s = cosine_unit(va, vb)
            if s >= self.cfg.semantic_threshold:
                scored.append((s, t))
        return self._best(scored)

    def accepts(self, category, planted: Term, origin: Term, kind) -> bool:
        tokens = list(tokenize(planted).tokens)
        pure = self.pure_hits(tokens, kind)
        if category == "exact":
            return pure == [origin]
        if pure:
            return False
        heur = self.heuristic_best(tokens, kind)
        if category == "typo":
            return heur is not None and heur[1] == origin
        if heur is not None:
            return False
        sem = self.semantic_best(planted, kind)
        if category == "synonym":
            return sem is not None and sem[1] == origin
        return sem is None


def _build_kg(onto: Graph, plants: dict, kinds: dict) -> Graph:
    triples: list[Triple] = []
    instance: dict[Term, Term] = {}
    fresh = iter(BNode(f"x{i}") for i in range(10**9))
    classes = sorted(o for o in plants if kinds[o] == "class")
    props = sorted(o for o in plants if kinds[o] == "property")
    for i, origin in enumerate(classes):
        node = BNode(f"c{i}")
        instance[origin] = node
        triples.append(Triple(node, RDF_TYPE, plants[origin].planted))
    for origin in classes:
        for parent in onto.objects(origin, RDFS_SUBCLASSOF):
            if parent in plants:
                triples.append(Triple(plants[origin].planted, RDFS_SUBCLASSOF, plants[parent].planted))
    for origin in props:
        domains = sorted(d for d in onto.objects(origin, RDFS_DOMAIN) if d.is_iri)
        ranges = sorted(r for r in onto.objects(origin, RDFS_RANGE) if r.is_iri)
        subj = instance.get(domains[0]) if domains else None
        obj = None
        if ranges and is_vocabulary(ranges[0]):
            obj = Literal("0", datatype=ranges[0].value)
        elif ranges:
            obj = instance.get(ranges[0])
        triples.append(Triple(subj or next(fresh), plants[origin].planted, obj or next(fresh)))
        for parent in onto.objects(origin, RDFS_SUBPROPERTYOF):
            if parent in plants:
                triples.append(Triple(plants[origin].planted, RDFS_SUBPROPERTYOF, plants[parent].planted))
    prefixes = {"kg": KG_NS, "rdf": RDF, "rdfs": RDFS}
    return Graph(triples, prefixes, role="kg")


def generate_mismatch_fixture(
    onto: Graph,
    spec: MismatchSpec,
    cfg: MatchConfig | None = None,
    synonyms: dict[str, str] | None = None,
) -> tuple[Graph, list[Plant]]:
    """Plant ``spec`` terms of each category; return the KG and its answer key.

    ``cfg`` supplies the thresholds and semantic provider the plants are
    validated against (defaults to ``MatchConfig()``, which disables the
    synonym category).  Raises ``ValueError`` if the ontology cannot host
    the requested counts.
    """
    cfg = cfg or MatchConfig()
    synonyms = synonyms or {}
    schema = find_classes_and_properties(onto)
    kinds = {t: "class" for t in schema.classes} | {t: "property" for t in schema.properties}
    if spec.total > len(kinds):
        raise ValueError(f"spec asks for {spec.total} plants but the ontology has {len(kinds)} entities")
    if spec.n_synonym and cfg.semantic_provider is None:
        raise ValueError("synonym plants need a semantic provider")
    rng = random.Random(spec.seed)
    checker = _Checker(schema, cfg)
    pool = sorted(kinds)
    rng.shuffle(pool)
    plants: dict[Term, Plant] = {}
    used_names: set[str] = set()

    def try_plant(origin, category, tokens) -> bool:
        if tokens is None:
            return False
        name = _render(tokens, kinds[origin])
        if name in used_names or split_name(name) != list(tokens):
            return False
        planted = IRI(KG_NS + name)
        if not checker.accepts(category, planted, origin, kinds[origin]):
            return False
        plants[origin] = Plant(planted, origin, category)
        used_names.add(name)
        return True

    def fill(category, count, make):
        for origin in list(pool):
            if sum(p.category == category for p in plants.values()) >= count:
                return
            if origin in plants:
                continue
            base = list(tokenize(origin).tokens)
            for _ in range(5):
                if try_plant(origin, category, make(base)):
                    break

    def synonymise(tokens):
        swapped = [synonyms.get(t, t) for t in tokens]
        return swapped if swapped != tokens else None

    fill("synonym", spec.n_synonym, synonymise)
    fill("typo", spec.n_typo, lambda toks: _typo(toks, rng))
    fill("exact", spec.n_exact, lambda toks: toks)

    confirmed = {p.planted: p.origin for p in plants.values()}
    structural: list[Term] = []
    for origin in pool:
        if len(structural) >= spec.n_structural:
            break
        if origin in plants:
            continue
        for _ in range(5):
            tokens = _opaque(rng)
            if try_plant(origin, "structural", tokens):
                break
        else:
            continue
        structural.append(origin)
        kg = _build_kg(onto, plants, kinds)
        if not all(_topologically_recovered(kg, onto, plants[o], kinds, confirmed, cfg.topological_threshold) for o in structural):
            used_names.discard(local_name(plants[origin].planted.value))
            del plants[origin]
            structural.pop()

    counts = {c: sum(p.category == c for p in plants.values()) for c in CATEGORIES}
    wanted = {"exact": spec.n_exact, "typo": spec.n_typo, "synonym": spec.n_synonym, "structural": spec.n_structural}
    short = {c: (counts[c], wanted[c]) for c in CATEGORIES if counts[c] < wanted[c]}
    if short:
        detail = ", ".join(f"{c} {got}/{want}" for c, (got, want) in short.items())
        raise ValueError(f"ontology cannot host the requested plants: {detail}")
    kg = _build_kg(onto, plants, kinds) if plants else Graph(role="kg")
    key = sorted(plants.values(), key=lambda p: (CATEGORY_LEVEL[p.category], p.planted.value))
    return kg, key


def _topologically_recovered(kg, onto, plant: Plant, kinds, confirmed, threshold: float) -> bool:
    kctx = kg_context(kg, plant.planted)
    scored = []
    for target in sorted(t for t, k in kinds.items() if k == kinds[plant.origin]):
        s = topological_score(kctx, onto_context(onto, target), confirmed)
        if s is not None:
            scored.append((s, target))
    if not scored:
        return False
    best = min(scored, key=lambda st: (-st[0], st[1].value))
    return best[1] == plant.origin and best[0] >= threshold and best[0] > 0
