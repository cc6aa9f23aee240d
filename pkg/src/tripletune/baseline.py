"""Line-graph random-walk baseline (Triple2vec-style).

Triples become nodes of a line graph whose edges connect triples sharing an
entity endpoint. Edge weights come from predicate co-occurrence statistics
(TF/ITF), walks over the weighted line graph form a corpus, and skip-gram
with negative sampling turns the corpus into triple embeddings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import KnowledgeGraph


# ---------------------------------------------------------------------------
# predicate co-occurrence weighting
# ---------------------------------------------------------------------------

def cooccurrence_counts(g: KnowledgeGraph) -> np.ndarray:
    """C[i][j] = number of (h, t) pairs linked by both predicate i and j (i != j).

    The diagonal holds each predicate's own (h, t)-pair count so that the
    inverse-frequency denominator is never zero for a used predicate.
    """
    pair_preds: dict[tuple[int, int], set[int]] = {}
    for t in g.triples:
        pair_preds.setdefault((t.head, t.tail), set()).add(t.predicate)
    c = np.zeros((g.num_predicates, g.num_predicates), dtype=np.int64)
    for preds in pair_preds.values():
        ps = sorted(preds)
        for i in ps:
            c[i, i] += 1
        for a in range(len(ps)):
            for b in range(a + 1, len(ps)):
                c[ps[a], ps[b]] += 1
                c[ps[b], ps[a]] += 1
    return c


def tf_weight(i: int, j: int, c: np.ndarray) -> float:
    return math.log1p(float(c[i, j]))


def itf_weight(j: int, n_edges: int, c: np.ndarray) -> float:
    if n_edges < 1:
        raise ValueError("need at least one edge")
    cooc = int(np.count_nonzero(c[:, j]))
    if cooc == 0:
        raise ValueError(f"predicate {j} has no co-occurrences")
    return math.log(n_edges / cooc)


def build_cm(c: np.ndarray, n_edges: int, symmetrize: bool = True) -> np.ndarray:
    """Frequency-weighted co-occurrence matrix TF(i,j) * ITF(j).

    The raw product is asymmetric because ITF depends only on the column;
    by default the two ITF values are averaged, keeping the matrix symmetric
    (the raw form is available with symmetrize=False).
    """
    p = c.shape[0]
    itf = np.array([itf_weight(j, n_edges, c) for j in range(p)])
    tf = np.log1p(c.astype(np.float64))
    if symmetrize:
        return tf * (itf[None, :] + itf[:, None]) / 2.0
    return tf * itf[None, :]


def predicate_similarity(cm: np.ndarray) -> np.ndarray:
    """Cosine similarity between rows of the weighted matrix; unit diagonal."""
    norms = np.linalg.norm(cm, axis=1)
    safe = np.where(norms == 0, 1.0, norms)
    unit = cm / safe[:, None]
    m = unit @ unit.T
    np.clip(m, -1.0, 1.0, out=m)
    np.fill_diagonal(m, 1.0)
    return m


# ---------------------------------------------------------------------------
# line graph
# ---------------------------------------------------------------------------

@dataclass
class LineGraph:
    n_nodes: int
    neighbors: list[np.ndarray]   # per node, adjacent triple ids
    weights: list[np.ndarray]     # matching non-negative edge weights

    def edges(self):
        """Each undirected edge once, as (i, j, weight) with i < j."""
        for i in range(self.n_nodes):
            for j, w in zip(self.neighbors[i], self.weights[i]):
                if i < j:
                    yield i, int(j), float(w)

    @property
    def n_edges(self) -> int:
        return sum(1 for _ in self.edges())


def build_line_graph(g: KnowledgeGraph, cm: np.ndarray | None = None) -> LineGraph:
    """Connect triples sharing an entity endpoint, weighted by predicate similarity."""
    if cm is None:
        cm = build_cm(cooccurrence_counts(g), g.num_triples)
    m_r = predicate_similarity(cm)
    adjacency: list[dict[int, float]] = [dict() for _ in range(g.num_triples)]
    incident: dict[int, list[int]] = {}
    for idx, t in enumerate(g.triples):
        for e in {t.head, t.tail}:
            incident.setdefault(e, []).append(idx)
    for ids in incident.values():
        for a in range(len(ids)):
            ia = ids[a]
            pa = g.triples[ia].predicate
            for b in range(a + 1, len(ids)):
                ib = ids[b]
                w = max(0.0, float(m_r[pa, g.triples[ib].predicate]))
                adjacency[ia][ib] = w
                adjacency[ib][ia] = w
    neighbors = []
    weights = []
    for d in adjacency:
        ks = np.array(sorted(d.keys()), dtype=np.int64)
        neighbors.append(ks)
        weights.append(np.array([d[k] for k in ks]))
    return LineGraph(g.num_triples, neighbors, weights)


# ---------------------------------------------------------------------------
# walks
# ---------------------------------------------------------------------------

def random_walks(lg: LineGraph, walks_per_node: int = 10, walk_length: int = 20,
                 rng_seed: int = 0) -> list[list[int]]:
    """Weight-proportional walks from every node; dead ends truncate the walk."""
    if walk_length < 1:
        raise ValueError("walk_length must be >= 1")
    cumw = []
    for w in lg.weights:
        tot = w.sum()
        cumw.append(np.cumsum(w) / tot if tot > 0 else None)
    corpus: list[list[int]] = []
    for start in range(lg.n_nodes):
        rng = np.random.default_rng([rng_seed, start])
        for _ in range(walks_per_node):
            walk = [start]
            node = start
            while len(walk) < walk_length:
                cw = cumw[node]
                if cw is None:
                    break
                node = int(lg.neighbors[node][np.searchsorted(cw, rng.random(), side="right")])
                walk.append(node)
            corpus.append(walk)
    return corpus


def save_corpus(corpus: list[list[int]], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for walk in corpus:
            fh.write(" ".join(str(n) for n in walk) + "\n")


def load_corpus(path: str | Path) -> list[list[int]]:
    corpus = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                corpus.append([int(x) for x in line.split()])
    return corpus


# ---------------------------------------------------------------------------
# skip-gram with negative sampling
# ---------------------------------------------------------------------------

@dataclass
class SkipgramResult:
    vectors: np.ndarray          # |T| x dim input vectors
    seen: np.ndarray             # bool mask; False rows kept their init values
    loss_per_epoch: list[float] = field(default_factory=list)


def train_skipgram(corpus: list[list[int]], n_tokens: int, dim: int,
                   epochs: int = 30, rng_seed: int = 0, window: int = 5,
                   negatives: int = 5, learning_rate: float = 0.025) -> SkipgramResult:
    """Skip-gram with negative sampling over triple-id sequences.

    Noise distribution is unigram^0.75; the learning rate decays linearly.
    Sequential and deterministic under rng_seed.
    """
    if not corpus or all(len(s) == 0 for s in corpus):
        raise ValueError("empty corpus")
    rng = np.random.default_rng(rng_seed)
    counts = np.zeros(n_tokens)
    for sent in corpus:
        for tok in sent:
            counts[tok] += 1
    seen = counts > 0
    noise = counts ** 0.75
    noise /= noise.sum()
    noise_cdf = np.cumsum(noise)

    w_in = (rng.random((n_tokens, dim)) - 0.5) / dim
    w_out = np.zeros((n_tokens, dim))

    total_sentences = epochs * len(corpus)
    processed = 0
    min_lr = learning_rate * 1e-4
    history = []
    for _epoch in range(epochs):
        epoch_loss = 0.0
        n_pairs = 0
        for sent in corpus:
            lr = learning_rate - (learning_rate - min_lr) * (processed / total_sentences)
            processed += 1
            length = len(sent)
            for pos, center in enumerate(sent):
                lo = max(0, pos - window)
                hi = min(length, pos + window + 1)
                ctx = [sent[i] for i in range(lo, hi) if i != pos]
                if not ctx:
                    continue
                ctx = np.array(ctx, dtype=np.int64)
                m = len(ctx)
                negs = np.searchsorted(noise_cdf, rng.random((m, negatives)), side="right")
                targets = np.concatenate([ctx[:, None], negs], axis=1)     # (m, 1+k)
                labels = np.zeros((m, 1 + negatives))
                labels[:, 0] = 1.0
                v = w_in[center]                                           # (d,)
                u = w_out[targets]                                         # (m, 1+k, d)
                s = u @ v                                                  # (m, 1+k)
                sig = 1.0 / (1.0 + np.exp(-np.clip(s, -60, 60)))
                epoch_loss += float(-np.sum(np.log(np.where(labels > 0, sig, 1 - sig) + 1e-12)))
                n_pairs += m
                coeff = (sig - labels) * lr                                # (m, 1+k)
                dv = np.einsum("mk,mkd->d", coeff, u)
                np.add.at(w_out, targets, -coeff[:, :, None] * v[None, None, :])
                w_in[center] -= dv
        history.append(epoch_loss / max(1, n_pairs))
    return SkipgramResult(w_in, seen, history)


def train_baseline(g: KnowledgeGraph, dim: int, walks_per_node: int = 10,
                   walk_length: int = 20, epochs: int = 30,
                   rng_seed: int = 0, window: int = 5, negatives: int = 5) -> SkipgramResult:
    """End-to-end baseline: line graph -> walks -> skip-gram triple vectors."""
    lg = build_line_graph(g)
    corpus = random_walks(lg, walks_per_node=walks_per_node, walk_length=walk_length,
                          rng_seed=rng_seed)
    return train_skipgram(corpus, g.num_triples, dim, epochs=epochs, rng_seed=rng_seed,
                          window=window, negatives=negatives)
