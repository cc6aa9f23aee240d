#!/usr/bin/env python3
"""From seed embeddings to a weak-supervision pair dataset.

Trains TransE seed embeddings in-process, then samples, for each triple, up to
N candidates sharing its head, tail, or predicate plus N slot-disjoint
negatives, and scores every pair with the mean of the three slot-wise cosine
similarities. Shows the score distribution per provenance label.
"""

import numpy as np

from tripletune.pairs import build_dataset
from tripletune.seeds import SeedTrainConfig, train_seed
from tripletune.synthetic import cross_linked_clustered_graph


def main():
    g = cross_linked_clustered_graph(n_triples=400, rng_seed=2)
    emb = train_seed(g, "transe", SeedTrainConfig(dim=16, epochs=200, rng_seed=0))
    print(f"seed embeddings: {emb.entity_vectors.shape[0]} entities, "
          f"{emb.predicate_vectors.shape[0]} predicates, d={emb.dim}")

    ds = build_dataset(g, emb, n=5, rng_seed=0)
    print(f"sampled {len(ds)} scored pairs "
          f"(bound 4N|T| = {4 * 5 * g.num_triples})")
    if ds.negative_deficit_anchors:
        print(f"{len(ds.negative_deficit_anchors)} anchors could not fill "
              "their negative quota")

    by_prov = {}
    for p in ds.pairs:
        by_prov.setdefault(p.provenance, []).append(p.score)
    for prov in ("shared-head", "shared-tail", "shared-predicate", "negative"):
        scores = np.array(by_prov.get(prov, [0.0]))
        print(f"  {prov:17s} n={len(scores):5d} mean={scores.mean():+.3f} "
              f"min={scores.min():+.3f} max={scores.max():+.3f}")
    print("\nshared-slot pairs score higher than slot-disjoint negatives, which "
          "is exactly the weak supervision signal the Siamese network regresses on")


if __name__ == "__main__":
    main()
