"""Random-walk node embeddings: DeepWalk, Node2Vec, Struc2Vec + skip-gram.

The RDF graph is walked as an undirected simple graph over its IRI and
blank nodes (literals and rdf/rdfs/owl/xsd terms are left out).  With
``reify_predicates`` every non-vocabulary predicate also becomes a node
linked to the subjects and objects it connects.

Skip-gram with negative sampling is trained by plain SGD with a linearly
decaying learning rate; the inner loop is compiled with numba.
"""

from __future__ import annotations

import bisect
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from .rdf import BNode, Graph, IRI, Term, is_vocabulary

MODELS = ("deepwalk", "node2vec", "struc2vec")


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 20
    p: float = 1.0
    q: float = 1.0
    layers: int = 3
    seed: int = 0
    reify_predicates: bool = False
    stay_probability: float = 0.3
    workers: int = 1

    def __post_init__(self):
        for name in ("walks_per_node", "walk_length", "layers", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if not 0.0 <= self.stay_probability <= 1.0:
            raise ValueError("stay_probability must be in [0,1]")


@dataclass(frozen=True)
class SkipGramConfig:
    dimension: int = 64
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0
    workers: int = 1
    probe_size: int = 1000

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")
        for name in ("window", "negatives", "epochs", "workers", "probe_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


# ---------------------------------------------------------------- walk graph

class WalkGraph:
    """Undirected simple graph with integer node ids in sorted term order."""

    def __init__(self, nodes, edges):
        self.nodes: list[Term] = sorted(set(nodes))
        self.index = {t: i for i, t in enumerate(self.nodes)}
        nbrs: list[set] = [set() for _ in self.nodes]
        for a, b in edges:
            if a == b:
                continue
            ia, ib = self.index[a], self.index[b]
            nbrs[ia].add(ib)
            nbrs[ib].add(ia)
        self.adj: list[list[int]] = [sorted(s) for s in nbrs]
        self.adj_set: list[frozenset] = [frozenset(s) for s in nbrs]

    def __len__(self) -> int:
        return len(self.nodes)

    def degree(self, i: int) -> int:
        return len(self.adj[i])

    @classmethod
    def from_graph(cls, g: Graph, reify_predicates: bool = False, keep_flat=()) -> "WalkGraph":
        keep_flat = set(keep_flat)

        def is_node(t: Term) -> bool:
            return not t.is_literal and not is_vocabulary(t)

        nodes, edges = set(), []
        for t in g.triples:
            s, p, o = t.subject, t.predicate, t.object
            if is_node(s):
                nodes.add(s)
            if is_node(o):
                nodes.add(o)
                if is_node(s):
                    edges.append((s, o))
            if reify_predicates and not is_vocabulary(p) and p not in keep_flat:
                nodes.add(p)
                if is_node(s):
                    edges.append((s, p))
                if is_node(o):
                    edges.append((p, o))
        return cls(nodes, edges)


def _node_rng(seed: int, idx: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(idx,)))


def _deepwalk_from(wg: WalkGraph, start: int, cfg: WalkConfig) -> list[list[int]]:
    rng = _node_rng(cfg.seed, start)
    if not wg.adj[start]:
        return [[start] for _ in range(cfg.walks_per_node)]
    draws = rng.random((cfg.walks_per_node, cfg.walk_length))
    walks = []
    for r in range(cfg.walks_per_node):
        walk = [start]
        for step in range(1, cfg.walk_length):
            nb = wg.adj[walk[-1]]
            walk.append(nb[int(draws[r, step] * len(nb))])
        walks.append(walk)
    return walks


class Node2VecSampler:
    """Second-order transition sampler with return parameter p and in-out q."""

    def __init__(self, wg: WalkGraph, p: float, q: float):
        self.wg, self.p, self.q = wg, p, q
        self._cum: dict[tuple[int, int], list[float]] = {}

    def weights(self, prev: int, cur: int) -> list[float]:
        out = []
        prev_nbrs = self.wg.adj_set[prev]
        for x in self.wg.adj[cur]:
            if x == prev:
                out.append(1.0 / self.p)
            elif x in prev_nbrs:
                out.append(1.0)
            else:
                out.append(1.0 / self.q)
        return out

    def probabilities(self, prev: int, cur: int) -> np.ndarray:
        w = np.array(self.weights(prev, cur))
        return w / w.sum()

    def next_hop(self, u: float, prev: int | None, cur: int) -> int:
        """Next node for uniform draw ``u`` in [0, 1)."""
        nb = self.wg.adj[cur]
        if prev is None:
            return nb[int(u * len(nb))]
        key = (prev, cur)
        cum = self._cum.get(key)
        if cum is None:
            w = self.weights(prev, cur)
            total = sum(w)
            acc, cum = 0.0, []
            for x in w:
                acc += x / total
                cum.append(acc)
            cum[-1] = 1.0
            self._cum[key] = cum
        return nb[bisect.bisect_right(cum, u)]


def _node2vec_from(wg: WalkGraph, start: int, cfg: WalkConfig, sampler: Node2VecSampler) -> list[list[int]]:
    rng = _node_rng(cfg.seed, start)
    if not wg.adj[start]:
        return [[start] for _ in range(cfg.walks_per_node)]
    draws = rng.random((cfg.walks_per_node, cfg.walk_length))
    walks = []
    for r in range(cfg.walks_per_node):
        walk = [start]
        for step in range(1, cfg.walk_length):
            prev = walk[-2] if len(walk) > 1 else None
            walk.append(sampler.next_hop(draws[r, step], prev, walk[-1]))
        walks.append(walk)
    return walks


# ---------------------------------------------------------------- struc2vec

def _compressed_dtw(a: tuple, b: tuple) -> float:
    """DTW over run-length compressed degree sequences ((degree, count), ...)."""
    n, m = len(a), len(b)
    inf = float("inf")
    prev = [inf] * (m + 1)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur = [inf] * (m + 1)
        da, ca = a[i - 1]
        for j in range(1, m + 1):
            db, cb = b[j - 1]
            cost = (max(da, db) / min(da, db) - 1.0) * max(ca, cb)
            cur[j] = cost + min(prev[j], cur[j - 1], prev[j - 1])
        prev = cur
    return prev[m]


class StructuralLayers:
    """Multilayer structural-similarity graph over the non-isolated nodes.

    Layer k compares the ordered degree sequences of the rings at hop
    distance 0..k; layer weights are exp(-distance).  Moving up from layer
    k has weight log(Gamma_k(u) + e), where Gamma counts the above-average
    edges of u in layer k; moving down has weight 1.
    """

    def __init__(self, wg: WalkGraph, layers: int):
        self.wg = wg
        self.members = [i for i in range(len(wg)) if wg.adj[i]]
        self.pos = {u: k for k, u in enumerate(self.members)}
        n = len(self.members)
        rings = [self._rings(u, layers) for u in self.members]
        self.n_layers = layers
        dist = np.zeros((n, n))
        self.cum: list[np.ndarray] = []
        self.up_prob = np.zeros((layers, n))
        self.has_edges = np.zeros((layers, n), dtype=bool)
        for k in range(layers):
            seqs = [r[k] for r in rings]
            uniq = sorted(set(seqs))
            lookup = {s: i for i, s in enumerate(uniq)}
            uid = np.array([lookup[s] for s in seqs], dtype=int)
            gmat = np.empty((len(uniq), len(uniq)))
            for i, si in enumerate(uniq):
                for j in range(i, len(uniq)):
                    sj = uniq[j]
                    if not si or not sj:
                        v = np.inf
                    else:
                        v = _compressed_dtw(si, sj)
                    gmat[i, j] = gmat[j, i] = v
            dist = dist + gmat[np.ix_(uid, uid)]
            with np.errstate(over="ignore"):
                w = np.exp(-dist)
            np.fill_diagonal(w, 0.0)
            w[~np.isfinite(dist)] = 0.0
            rows = w.sum(axis=1)
            self.has_edges[k] = rows > 0
            cum = np.cumsum(w, axis=1)
            safe = np.where(rows > 0, rows, 1.0)
            cum = cum / safe[:, None]
            cum[:, -1] = np.where(rows > 0, 1.0, 0.0)
            self.cum.append(cum)
            valid = w > 0
            mean_w = w[valid].mean() if valid.any() else 0.0
            gamma = (w > mean_w).sum(axis=1)
            self.up_prob[k] = np.log(gamma + np.e) / (np.log(gamma + np.e) + 1.0)

    def _rings(self, start: int, layers: int) -> list[tuple]:
        adj = self.wg.adj
        seen = {start}
        frontier = [start]
        out = []
        for _ in range(layers):
            degrees = sorted(len(adj[x]) for x in frontier)
            comp = []
            for d in degrees:
                if comp and comp[-1][0] == d:
                    comp[-1] = (d, comp[-1][1] + 1)
                else:
                    comp.append((d, 1))
            out.append(tuple(comp))
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return out

    def walk(self, start: int, length: int, stay: float, rng: np.random.Generator) -> list[int]:
        u = self.pos[start]
        k = 0
        walk = [start]
        top = self.n_layers - 1
        while len(walk) < length:
            move_in_layer = rng.random() < stay or top == 0
            if move_in_layer and self.has_edges[k, u]:
                v = int(np.searchsorted(self.cum[k][u], rng.random(), side="right"))
                v = min(v, len(self.members) - 1)
                u = v
                walk.append(self.members[u])
                continue
            if k == 0:
                k = 1 if top > 0 else 0
            elif k == top or not self.has_edges[k, u]:
                k -= 1
            else:
                k = k + 1 if rng.random() < self.up_prob[k, u] else k - 1
        return walk


def _struc2vec_from(wg: WalkGraph, start: int, cfg: WalkConfig, layers: StructuralLayers) -> list[list[int]]:
    if not wg.adj[start]:
        return [[start] for _ in range(cfg.walks_per_node)]
    rng = _node_rng(cfg.seed, start)
    return [layers.walk(start, cfg.walk_length, cfg.stay_probability, rng) for _ in range(cfg.walks_per_node)]


def generate_walk_indices(wg: WalkGraph, cfg: WalkConfig, kind: str, layers: StructuralLayers | None = None):
    if kind not in MODELS:
        raise ValueError(f"unknown walk model {kind!r}; expected one of {MODELS}")
    if len(wg) == 0:
        raise ValueError("cannot walk an empty graph")
    if kind == "deepwalk":
        def job(i):
            return _deepwalk_from(wg, i, cfg)
    elif kind == "node2vec":
        sampler = Node2VecSampler(wg, cfg.p, cfg.q)

        def job(i):
            return _node2vec_from(wg, i, cfg, sampler)
    else:
        layers = layers or StructuralLayers(wg, cfg.layers)

        def job(i):
            return _struc2vec_from(wg, i, cfg, layers)

    starts = range(len(wg))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            per_node = list(pool.map(job, starts))
    else:
        per_node = [job(i) for i in starts]
    # round-major order; independent of scheduling
    return [per_node[i][r] for r in range(cfg.walks_per_node) for i in starts]


def generate_walks(g: Graph, cfg: WalkConfig, kind: str = "deepwalk") -> list[list[Term]]:
    wg = WalkGraph.from_graph(g, cfg.reify_predicates)
    return [[wg.nodes[i] for i in w] for w in generate_walk_indices(wg, cfg, kind)]


def walks_to_text(walks) -> str:
    return "".join(" ".join(_term_token(t) for t in walk) + "\n" for walk in walks)


def write_walks(path, walks) -> None:
    Path(path).write_text(walks_to_text(walks), encoding="utf-8")


# ---------------------------------------------------------------- skip-gram

def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sgns_loss(u: np.ndarray, v_pos: np.ndarray, v_negs: np.ndarray) -> float:
    """Negative-sampling loss -log s(u.v+) - sum log s(-u.v-)."""
    pos = np.log(_sigmoid(u @ v_pos))
    neg = np.log(_sigmoid(-(v_negs @ u))).sum()
    return float(-(pos + neg))


def sgns_grads(u: np.ndarray, v_pos: np.ndarray, v_negs: np.ndarray):
    """Analytic gradients of :func:`sgns_loss` w.r.t. (u, v_pos, v_negs)."""
    g_pos = _sigmoid(u @ v_pos) - 1.0
    g_neg = _sigmoid(v_negs @ u)
    grad_u = g_pos * v_pos + g_neg @ v_negs
    grad_pos = g_pos * u
    grad_negs = g_neg[:, None] * u[None, :]
    return grad_u, grad_pos, grad_negs


@numba.njit(cache=True, inline="always")
def _sig(x):
    if x >= 0:
        z = math.exp(-x)
        return 1.0 / (1.0 + z)
    z = math.exp(x)
    return z / (1.0 + z)


@numba.njit(cache=True)
def _sgd_range(W, C, centers, contexts, negs, lr0, lr_min, step0, total, lo, hi):
    dim = W.shape[1]
    grad = np.empty(dim)
    for i in range(lo, hi):
        lr = lr0 * (1.0 - (step0 + i) / total)
        if lr < lr_min:
            lr = lr_min
        c = centers[i]
        for d in range(dim):
            grad[d] = 0.0
        for n in range(negs.shape[1] + 1):
            if n == 0:
                o = contexts[i]
                label = 1.0
            else:
                o = negs[i, n - 1]
                if o == contexts[i]:
                    continue
                label = 0.0
            s = 0.0
            for d in range(dim):
                s += W[c, d] * C[o, d]
            g = _sig(s) - label
            for d in range(dim):
                grad[d] += g * C[o, d]
                C[o, d] -= lr * g * W[c, d]
        for d in range(dim):
            W[c, d] -= lr * grad[d]


@numba.njit(cache=True, parallel=True)
def _sgd_hogwild(W, C, centers, contexts, negs, lr0, lr_min, step0, total, workers):
    n = centers.shape[0]
    chunk = (n + workers - 1) // workers
    for w in numba.prange(workers):
        lo = w * chunk
        hi = min(n, lo + chunk)
        if lo < hi:
            _sgd_range(W, C, centers, contexts, negs, lr0, lr_min, step0, total, lo, hi)


def sgd_epoch(W, C, centers, contexts, negs, lr0, lr_min, step0, total, workers=1):
    """One pass of SGD over the given (center, context, negatives) rows, in place."""
    if workers > 1:
        _sgd_hogwild(W, C, centers, contexts, negs, lr0, lr_min, step0, total, workers)
    else:
        _sgd_range(W, C, centers, contexts, negs, lr0, lr_min, step0, total, 0, len(centers))


def _skipgram_pairs(walks: list[np.ndarray], window: int):
    by_len: dict[int, list] = {}
    for w in walks:
        by_len.setdefault(len(w), []).append(w)
    centers, contexts = [], []
    for length in sorted(by_len):
        arr = np.asarray(by_len[length], dtype=np.int64)
        for d in range(1, min(window, length - 1) + 1):
            centers += [arr[:, :-d].ravel(), arr[:, d:].ravel()]
            contexts += [arr[:, d:].ravel(), arr[:, :-d].ravel()]
    if not centers:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def probe_loss(W, C, centers, contexts, negs) -> float:
    u = W[centers]
    pos = np.einsum("ij,ij->i", u, C[contexts])
    neg = np.einsum("ij,ikj->ik", u, C[negs])
    live = negs != contexts[:, None]
    loss = -np.log(_sigmoid(pos)) - (np.log(_sigmoid(-neg)) * live).sum(axis=1)
    return float(loss.mean())


@dataclass
class EmbeddingTable:
    """Node -> vector map with cosine queries."""

    terms: list
    vectors: np.ndarray
    loss_history: list = field(default_factory=list)
    context_vectors: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.terms):
            raise ValueError("vectors must be a (len(terms), dim) matrix")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding contains non-finite values")
        self.index = {t: i for i, t in enumerate(self.terms)}
        norms = np.linalg.norm(self.vectors, axis=1, keepdims=True)
        self._unit = self.vectors / np.where(norms > 0, norms, 1.0)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term) -> bool:
        return term in self.index

    def __getitem__(self, term) -> np.ndarray:
        return self.vectors[self.index[term]]

    def cosine(self, a: Term, b: Term) -> float:
        return float(self._unit[self.index[a]] @ self._unit[self.index[b]])

    def most_similar(self, node: Term, k: int, candidates=None) -> list[tuple[Term, float]]:
        """Top-``k`` terms by cosine, excluding ``node``; ties by term value."""
        if node not in self.index:
            raise KeyError(f"unknown node {node}")
        if k <= 0:
            return []
        sims = self._unit @ self._unit[self.index[node]]
        pool = self.terms if candidates is None else [t for t in candidates if t in self.index]
        scored = [(t, float(sims[self.index[t]])) for t in pool if t != node]
        scored.sort(key=lambda ts: (-ts[1], ts[0].value))
        return scored[:k]

    def to_text(self) -> str:
        lines = [f"{len(self.terms)} {self.dim}"]
        for t, row in zip(self.terms, self.vectors):
            lines.append(_term_token(t) + " " + " ".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def read(cls, path) -> "EmbeddingTable":
        from .matching import read_vectors

        raw = read_vectors(path)
        terms = [_token_term(k) for k in raw]
        return cls(terms, np.array([raw[k] for k in raw]))


def _term_token(t: Term) -> str:
    return f"_:{t.value}" if t.is_blank else t.value


def _token_term(s: str) -> Term:
    return BNode(s[2:]) if s.startswith("_:") else IRI(s)


def train_skipgram(walks, cfg: SkipGramConfig) -> EmbeddingTable:
    """Skip-gram with negative sampling over node sequences.

    Noise distribution is unigram^0.75 and a noise draw equal to the
    positive context is skipped; the learning rate decays linearly to 1e-4
    of its initial value.  Loss on a fixed probe batch is recorded
    after every epoch in ``loss_history``.
    """
    if not walks:
        raise ValueError("no walks to train on")
    vocab = sorted({t for w in walks for t in w})
    index = {t: i for i, t in enumerate(vocab)}
    idx_walks = [np.array([index[t] for t in w], dtype=np.int64) for w in walks]
    rng = np.random.default_rng(cfg.seed)
    n, dim = len(vocab), cfg.dimension
    W = (rng.random((n, dim)) - 0.5) / dim
    C = np.zeros((n, dim))
    centers, contexts = _skipgram_pairs(idx_walks, cfg.window)
    history: list[float] = []
    if len(centers) == 0:
        return EmbeddingTable(vocab, W, history, C)

    counts = np.bincount(np.concatenate(idx_walks), minlength=n).astype(float)
    noise = counts ** 0.75
    noise_cum = np.cumsum(noise / noise.sum())
    noise_cum[-1] = 1.0

    def draw_negs(size):
        return np.searchsorted(noise_cum, rng.random((size, cfg.negatives)), side="right").astype(np.int64)

    probe_n = min(cfg.probe_size, len(centers))
    probe_sel = rng.choice(len(centers), probe_n, replace=False)
    probe = (centers[probe_sel], contexts[probe_sel], draw_negs(probe_n))

    total = float(cfg.epochs * len(centers))
    lr_min = cfg.learning_rate * 1e-4
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(centers))
        c_ep, o_ep = centers[order], contexts[order]
        negs = draw_negs(len(c_ep))
        sgd_epoch(W, C, c_ep, o_ep, negs, cfg.learning_rate, lr_min,
                  float(epoch * len(centers)), total, cfg.workers)
        history.append(probe_loss(W, C, *probe))
    return EmbeddingTable(vocab, W, history, C)


def embed(g: Graph, walk_cfg: WalkConfig, sg_cfg: SkipGramConfig, kind: str = "deepwalk",
          keep_flat=(), layers: StructuralLayers | None = None) -> EmbeddingTable:
    wg = WalkGraph.from_graph(g, walk_cfg.reify_predicates, keep_flat)
    walks = generate_walk_indices(wg, walk_cfg, kind, layers)
    return train_skipgram([[wg.nodes[i] for i in w] for w in walks], sg_cfg)
