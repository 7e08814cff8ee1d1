"""Regenerate the bundled word-vector fixture (data/vectors.txt).

Synonym pairs from data/synonyms.tsv get an exact cosine by construction:
both words share a base direction and receive mutually orthogonal noise.
Every other token gets an independent random direction.
"""

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "ontocomply" / "data"
sys.path.insert(0, str(ROOT / "src"))

from ontocomply import rdf  # noqa: E402
from ontocomply.matching import write_vectors  # noqa: E402
from ontocomply.terms import split_name  # noqa: E402

DIM = 64
SEED = 20230501
SOURCES = ["brick.ttl", "rec.ttl", "brick_building.ttl", "rec_building.ttl"]
EXTRA = "has is of by in to unit handling air supply return".split()


def vocabulary() -> set:
    words = set(EXTRA)
    for name in SOURCES:
        g = rdf.load(DATA / name)
        for t in g.triples:
            for term in t:
                if term.is_iri and not rdf.is_vocabulary(term):
                    words.update(split_name(rdf.local_name(term.value)))
    return {w for w in words if not w.isdigit()}


def main():
    rng = np.random.default_rng(SEED)
    pairs = []
    for line in (DATA / "synonyms.tsv").read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        a, b, c = line.split("\t")
        pairs.append((a, b, float(c)))
    vectors = {}

    def fresh(k):
        q, _ = np.linalg.qr(rng.standard_normal((DIM, k)))
        return q.T

    for a, b, c in pairs:
        if a in vectors:
            # second synonym of an existing word: share its direction
            base = vectors[a]
            noise = fresh(1)[0]
            noise -= noise.dot(base) * base
            noise /= np.linalg.norm(noise)
            vectors[b] = np.sqrt(c) * base + np.sqrt(1 - c) * noise
            continue
        basis = fresh(3)
        vectors[a] = np.sqrt(c) * basis[0] + np.sqrt(1 - c) * basis[1]
        vectors[b] = np.sqrt(c) * basis[0] + np.sqrt(1 - c) * basis[2]
    for word in sorted(vocabulary()):
        if word not in vectors:
            vectors[word] = fresh(1)[0]
    rounded = {k: np.round(v, 6) for k, v in vectors.items()}
    write_vectors(DATA / "vectors.txt", rounded)
    print(f"wrote {len(rounded)} vectors of dimension {DIM}")


if __name__ == "__main__":
    main()
