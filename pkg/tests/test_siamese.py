import numpy as np
import pytest

from tripletune.graph import KnowledgeGraph
from tripletune.pairs import PtssDataset, PtssPair, build_dataset
from tripletune.seeds import EmbeddingSet
from tripletune.siamese import (AGG_OPS, FineTuneConfig, SiameseModel, TrainingDiverged,
                                aggregate, aggregated_dim, batch_loss_and_grads,
                                export_triple_embeddings, init_embedding_layer,
                                load_checkpoint, pair_loss, read_triple_embedding_tsv,
                                save_checkpoint, train, write_triple_embedding_tsv)
from conftest import random_named_triples


def make_embeddings(g, dim, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingSet(rng.normal(size=(g.num_entities, dim)),
                        rng.normal(size=(g.num_predicates, dim)))


# -- aggregation -------------------------------------------------------------

def test_aggregate_examples():
    h = np.array([1.0, 2.0])
    t = np.array([3.0, -2.0])
    assert np.allclose(aggregate(h, t, "avg"), [2.0, 0.0])
    assert np.allclose(aggregate(h, t, "had"), [3.0, -4.0])
    assert np.allclose(aggregate(h, t, "l1"), [2.0, 4.0])
    assert np.allclose(aggregate(h, t, "l2"), [4.0, 16.0])
    assert np.allclose(aggregate(h, t, "ht"), [1.0, 2.0, 3.0, -2.0])
    p = np.array([0.5, 0.5])
    assert np.allclose(aggregate(h, t, "sum", p_vec=p), [4.5, 0.5])


def test_aggregate_errors():
    with pytest.raises(ValueError):
        aggregate(np.ones(2), np.ones(3), "avg")
    with pytest.raises(ValueError):
        aggregate(np.ones(2), np.ones(2), "nope")
    with pytest.raises(ValueError):
        aggregate(np.ones(2), np.ones(2), "sum")


def test_aggregated_dim():
    for op in AGG_OPS:
        assert aggregated_dim(8, op) == (16 if op == "ht" else 8)


def test_sum_init_collapses_for_exact_translation():
    # when h + p = t exactly, the sum aggregation is 2t for every triple
    g = KnowledgeGraph.from_named_triples([("a", "r", "b"), ("c", "r", "d")])
    rng = np.random.default_rng(0)
    ent = rng.normal(size=(4, 6))
    pred = np.zeros((1, 6))
    # force t = h + p per triple
    pred[0] = rng.normal(size=6)
    for t in g.triples:
        ent[t.tail] = ent[t.head] + pred[t.predicate]
    emb = EmbeddingSet(ent, pred)
    layer = init_embedding_layer(g, emb, "sum")
    for i, t in enumerate(g.triples):
        assert np.allclose(layer[i], 2.0 * ent[t.tail], atol=1e-12)


def test_init_layer_rows_align(tiny_graph):
    g = tiny_graph
    emb = make_embeddings(g, 4)
    layer = init_embedding_layer(g, emb, "avg")
    assert layer.shape == (g.num_triples, 4)
    t = g.triples[2]
    expect = (emb.entity_vectors[t.head] + emb.entity_vectors[t.tail]) / 2.0
    assert np.allclose(layer[2], expect)


# -- model forward -----------------------------------------------------------

def small_model(n=6, d=4, seed=0):
    rng = np.random.default_rng(seed)
    return SiameseModel(rng.normal(size=(n, d)), rng.normal(size=(d, d)) * 0.3,
                        np.zeros(d))


def test_forward_identical_ids_score_exactly_one():
    m = small_model()
    _, _, s = m.forward_pair(3, 3)
    assert s == 1.0


def test_forward_zero_rows_score_zero():
    m = small_model()
    m.triple_embeddings[1] = 0.0
    m.b1[:] = 0.0
    _, _, s = m.forward_pair(1, 2)
    assert s == 0.0


def test_forward_score_in_range():
    m = small_model(seed=3)
    for a in range(6):
        for b in range(6):
            _, _, s = m.forward_pair(a, b)
            assert -1.0 <= s <= 1.0


def test_forward_symmetric():
    m = small_model(seed=5)
    for a, b in [(0, 1), (2, 5), (4, 3)]:
        _, _, s_ab = m.forward_pair(a, b)
        _, _, s_ba = m.forward_pair(b, a)
        assert s_ab == pytest.approx(s_ba, abs=1e-12)


def test_encode_outputs_bounded_by_tanh():
    m = small_model(seed=7)
    out = m.encode(np.arange(6))
    assert np.all(np.abs(out) < 1.0)


def test_initialize_deterministic(tiny_graph):
    g = tiny_graph
    emb = make_embeddings(g, 4)
    m1 = SiameseModel.initialize(g, emb, "avg", rng_seed=9)
    m2 = SiameseModel.initialize(g, emb, "avg", rng_seed=9)
    assert np.array_equal(m1.w1, m2.w1)
    assert np.all(m1.b1 == 0.0)
    d = m1.dim
    bound = np.sqrt(6.0 / (2 * d))
    assert np.all(np.abs(m1.w1) <= bound)


def test_config_validation():
    with pytest.raises(ValueError):
        FineTuneConfig(warmup_fraction=1.0)
    with pytest.raises(ValueError):
        FineTuneConfig(n_layers=2)


# -- loss and gradients ------------------------------------------------------

def test_pair_loss_examples():
    assert pair_loss(0.5, 0.5) == 0.0
    assert pair_loss(1.0, 0.0) == 1.0
    assert pair_loss(-0.5, 0.5) == 1.0


def test_batch_loss_matches_pairwise():
    m = small_model(seed=11)
    a_ids = np.array([0, 1, 2])
    b_ids = np.array([3, 4, 5])
    targets = np.array([0.2, -0.3, 0.8])
    loss, *_ = batch_loss_and_grads(m, a_ids, b_ids, targets)
    expect = np.mean([pair_loss(m.forward_pair(a, b)[2], t)
                      for a, b, t in zip(a_ids, b_ids, targets)])
    assert loss == pytest.approx(expect, abs=1e-12)


def central_diff(f, x, eps=1e-6):
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        i = it.multi_index
        orig = x[i]
        x[i] = orig + eps
        hi = f()
        x[i] = orig - eps
        lo = f()
        x[i] = orig
        g[i] = (hi - lo) / (2 * eps)
        it.iternext()
    return g


def test_batch_gradients_match_finite_differences():
    m = small_model(n=5, d=3, seed=13)
    a_ids = np.array([0, 1, 2, 0])
    b_ids = np.array([3, 4, 1, 2])
    targets = np.array([0.1, -0.4, 0.7, 0.0])

    def loss_only():
        return batch_loss_and_grads(m, a_ids, b_ids, targets)[0]

    _, gw, gb, rows, grows = batch_loss_and_grads(m, a_ids, b_ids, targets)
    fd_w = central_diff(loss_only, m.w1)
    fd_b = central_diff(loss_only, m.b1)
    fd_e = central_diff(loss_only, m.triple_embeddings)
    assert np.allclose(gw, fd_w, atol=1e-7)
    assert np.allclose(gb, fd_b, atol=1e-7)
    dense = np.zeros_like(m.triple_embeddings)
    dense[rows] = grows
    assert np.allclose(dense, fd_e, atol=1e-7)


def test_batch_gradient_zero_at_perfect_fit():
    m = small_model(seed=17)
    a_ids = np.array([0, 1])
    b_ids = np.array([2, 3])
    targets = np.array([m.forward_pair(0, 2)[2], m.forward_pair(1, 3)[2]])
    loss, gw, gb, rows, grows = batch_loss_and_grads(m, a_ids, b_ids, targets)
    assert loss == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(gw, 0.0, atol=1e-12)
    assert np.allclose(gb, 0.0, atol=1e-12)
    assert np.allclose(grows, 0.0, atol=1e-12)


# -- training ----------------------------------------------------------------

def toy_training_setup(seed=0, n_triples=40):
    rng = np.random.default_rng(seed)
    rows = random_named_triples(rng, 15, 3, n_triples)
    g = KnowledgeGraph.from_named_triples(rows)
    emb = make_embeddings(g, 8, seed=seed)
    ds = build_dataset(g, emb, n=3, rng_seed=seed)
    model = SiameseModel.initialize(g, emb, "avg", rng_seed=seed)
    return g, emb, ds, model


def test_training_reduces_loss():
    _, _, ds, model = toy_training_setup()
    history = []
    cfg = FineTuneConfig(batch_size=32, epochs=100, rng_seed=0)
    train(model, ds, cfg, loss_history=history)
    assert len(history) == 100
    assert history[-1] < 0.1 * history[0]


def test_training_deterministic():
    _, _, ds, m1 = toy_training_setup(seed=2)
    _, _, ds2, m2 = toy_training_setup(seed=2)
    cfg = FineTuneConfig(batch_size=32, epochs=5, rng_seed=4)
    train(m1, ds, cfg)
    train(m2, ds2, cfg)
    assert np.array_equal(m1.triple_embeddings, m2.triple_embeddings)
    assert np.array_equal(m1.w1, m2.w1)
    assert np.array_equal(m1.b1, m2.b1)


def test_training_leaves_untouched_rows_alone():
    _, _, ds, model = toy_training_setup(seed=3)
    # append pristine rows beyond any pair id
    extra = np.full((2, model.dim), 7.5)
    model.triple_embeddings = np.vstack([model.triple_embeddings, extra])
    cfg = FineTuneConfig(batch_size=32, epochs=3, rng_seed=0)
    train(model, ds, cfg)
    assert np.all(model.triple_embeddings[-2:] == 7.5)


def test_training_empty_dataset_rejected():
    model = small_model()
    ds = PtssDataset([], n_param=1, seed_tag="x", rng_seed=0)
    with pytest.raises(ValueError):
        train(model, ds, FineTuneConfig(epochs=1))


def test_training_divergence_detected():
    model = small_model()
    model.w1[0, 0] = np.inf
    ds = PtssDataset([PtssPair(0, 1, 0.5, "shared-head")], n_param=1, seed_tag="x",
                     rng_seed=0)
    with pytest.raises(TrainingDiverged, match="epoch"):
        train(model, ds, FineTuneConfig(epochs=1, warmup_fraction=0.0))


def test_warmup_shrinks_early_updates():
    # one epoch with a near-total warm-up moves the dense layer less than
    # the same epoch at full learning rate
    _, _, ds, m_warm = toy_training_setup(seed=6)
    _, _, _, m_cold = toy_training_setup(seed=6)
    before = m_warm.w1.copy()
    train(m_warm, ds, FineTuneConfig(batch_size=8, epochs=1, warmup_fraction=0.9,
                                     rng_seed=1))
    delta_warm = np.abs(m_warm.w1 - before).max()
    train(m_cold, ds, FineTuneConfig(batch_size=8, epochs=1, warmup_fraction=0.0,
                                     rng_seed=1))
    delta_cold = np.abs(m_cold.w1 - before).max()
    assert delta_warm < delta_cold


# -- persistence -------------------------------------------------------------

def test_export_is_layer_copy():
    m = small_model()
    out = export_triple_embeddings(m)
    assert np.array_equal(out, m.triple_embeddings)
    out[0, 0] = 99.0
    assert m.triple_embeddings[0, 0] != 99.0


def test_checkpoint_round_trip(tmp_path):
    m = small_model(seed=21)
    f = tmp_path / "model.npz"
    save_checkpoint(m, f, config=FineTuneConfig())
    back = load_checkpoint(f)
    assert np.array_equal(back.triple_embeddings, m.triple_embeddings)
    assert np.array_equal(back.w1, m.w1)
    assert np.array_equal(back.b1, m.b1)


def test_tsv_round_trip(tmp_path):
    mat = np.random.default_rng(1).normal(size=(7, 3))
    f = tmp_path / "emb.tsv"
    write_triple_embedding_tsv(mat, f)
    back = read_triple_embedding_tsv(f)
    assert np.array_equal(back, mat)
