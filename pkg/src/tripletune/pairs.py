"""Weak-supervision pair sampling and pairwise triple similarity scoring.

For each anchor triple we draw up to N candidates sharing its head, N sharing
its tail, N sharing its predicate and N with no slot in common, then score
each (anchor, candidate) pair by the mean of the three slot-wise cosine
similarities of the seed embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import KnowledgeGraph, Triple
from .seeds import EmbeddingSet

PROVENANCES = ("shared-head", "shared-tail", "shared-predicate", "negative")

# Rejection-sampling budget for negatives, per anchor, as a multiple of N.
NEGATIVE_RETRY_FACTOR = 100


@dataclass(frozen=True)
class PtssPair:
    triple_a: int
    triple_b: int
    score: float
    provenance: str


@dataclass
class PtssDataset:
    pairs: list[PtssPair]
    n_param: int
    seed_tag: str
    rng_seed: int
    # anchors for which rejection sampling could not find N negatives
    negative_deficit_anchors: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pairs)


def cosine_sim(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity clamped to [-1, 1]; all-zero vectors compare as 0.0."""
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    c = float(np.dot(u, v) / (nu * nv))
    return max(-1.0, min(1.0, c))


def compute_ptss(a: Triple, b: Triple, emb: EmbeddingSet) -> float:
    """Arithmetic mean of head/predicate/tail cosine similarities."""
    ent = emb.entity_vectors
    pred = emb.predicate_vectors
    return (cosine_sim(ent[a.head], ent[b.head])
            + cosine_sim(pred[a.predicate], pred[b.predicate])
            + cosine_sim(ent[a.tail], ent[b.tail])) / 3.0


def shares_slot(a: Triple, b: Triple) -> bool:
    return a.head == b.head or a.tail == b.tail or a.predicate == b.predicate


def anchor_rng(rng_seed: int, triple_id: int) -> np.random.Generator:
    """Independent per-anchor stream so parallel and serial sampling agree."""
    return np.random.default_rng([rng_seed, triple_id])


def sample_candidates(g: KnowledgeGraph, triple_id: int, n: int,
                      rng: np.random.Generator) -> tuple[list[tuple[int, str]], bool]:
    """Draw up to 4N labeled candidates for one anchor.

    Per shared slot: N distinct triples uniformly without replacement from the
    slot's posting list minus the anchor, or the entire set when it is smaller
    than N. Negatives are drawn by rejection over all triples; if the retry
    budget runs out the anchor gets fewer negatives and the deficit flag is set.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    anchor = g.triples[triple_id]
    out: list[tuple[int, str]] = []

    for posting, provenance in (
        (g.by_head[anchor.head], "shared-head"),
        (g.by_tail[anchor.tail], "shared-tail"),
        (g.by_predicate[anchor.predicate], "shared-predicate"),
    ):
        eligible = [i for i in posting if i != triple_id]
        if len(eligible) <= n:
            chosen = eligible
        else:
            chosen = [eligible[j] for j in rng.choice(len(eligible), size=n, replace=False)]
        out.extend((c, provenance) for c in chosen)

    negatives: set[int] = set()
    budget = NEGATIVE_RETRY_FACTOR * n
    n_triples = g.num_triples
    while len(negatives) < n and budget > 0:
        budget -= 1
        cand = int(rng.integers(n_triples))
        if cand == triple_id or cand in negatives:
            continue
        if not shares_slot(anchor, g.triples[cand]):
            negatives.add(cand)
    out.extend((c, "negative") for c in sorted(negatives))
    deficit = len(negatives) < n
    return out, deficit


def build_dataset(g: KnowledgeGraph, emb: EmbeddingSet, n: int,
                  rng_seed: int = 0) -> PtssDataset:
    """Sample and score pairs for every triple, in anchor order."""
    emb.validate(g)
    pairs: list[PtssPair] = []
    deficits: list[int] = []
    for anchor_id in range(g.num_triples):
        rng = anchor_rng(rng_seed, anchor_id)
        candidates, deficit = sample_candidates(g, anchor_id, n, rng)
        if deficit:
            deficits.append(anchor_id)
        a = g.triples[anchor_id]
        for cand_id, provenance in candidates:
            score = compute_ptss(a, g.triples[cand_id], emb)
            pairs.append(PtssPair(anchor_id, cand_id, score, provenance))
    return PtssDataset(pairs, n_param=n, seed_tag=emb.model_tag, rng_seed=rng_seed,
                       negative_deficit_anchors=deficits)


def save_dataset(ds: PtssDataset, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in ds.pairs:
            fh.write(f"{p.triple_a}\t{p.triple_b}\t{p.score:.17g}\t{p.provenance}\n")


def load_dataset(path: str | Path, n_param: int = 0, seed_tag: str = "unknown",
                 rng_seed: int = 0) -> PtssDataset:
    pairs = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            a, b, score, provenance = line.rstrip("\n").split("\t")
            pairs.append(PtssPair(int(a), int(b), float(score), provenance))
    return PtssDataset(pairs, n_param=n_param, seed_tag=seed_tag, rng_seed=rng_seed)
