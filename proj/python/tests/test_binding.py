import numpy as np
import pytest

embcmp = pytest.importorskip("embcmp")


def test_graph_round_trip():
    g = embcmp.Graph(["a", "b", "c", "d"], [(0, 1), (1, 2), (2, 0), (2, 3), (3, 2)])
    assert g.node_count == 4
    assert g.edge_count == 4
    assert g.labels == ["a", "b", "c", "d"]
    assert g.edges() == [(0, 1), (0, 2), (1, 2), (2, 3)]
    assert g.degree(2) == 3
    assert g.index_of("d") == 3
    assert g.index_of("zz") is None
    assert g.is_connected()


def test_generate_is_seeded():
    a = embcmp.generate(kind="barabasi_albert", n=60, ba_m=2, seed=5)
    b = embcmp.generate(kind="barabasi_albert", n=60, ba_m=2, seed=5)
    c = embcmp.generate(kind="barabasi_albert", n=60, ba_m=2, seed=6)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != c.fingerprint()
    assert a.edge_count == 1 + 2 * 58


def test_star_metrics():
    g = embcmp.Graph([str(i) for i in range(6)], [(0, i) for i in range(1, 6)])
    m = embcmp.node_metrics(g)
    keys = embcmp.metric_keys()
    assert m.shape == (6, 11)
    assert m[0, keys.index("degree")] == 5
    assert m[1, keys.index("degree")] == 1
    # unnormalised: every one of the C(5,2) leaf pairs routes through the hub
    assert m[0, keys.index("betweenness")] == pytest.approx(10.0)
    assert m[0, keys.index("closeness")] == pytest.approx(1.0)
    normalized = embcmp.node_metrics(g, normalized=True)
    assert normalized.min() >= 0.0 and normalized.max() <= 1.0


def test_embedding_shape_and_determinism():
    g = embcmp.generate(kind="barabasi_albert", n=40, ba_m=2, seed=1)
    params = dict(walks_per_node=2, walk_length=10, dimension=8, epochs=1, seed=3)
    a = embcmp.embed(g, "deepwalk", **params)
    b = embcmp.embed(g, "deepwalk", **params)
    assert a.shape == (40, 8)
    assert a.dtype == np.float32
    assert np.array_equal(a, b)
    assert embcmp.space_id("node2vec", p=256, q=0.004) == "node2vec_p256_q0.004"


def test_errors_are_typed():
    g = embcmp.generate(kind="barabasi_albert", n=20, ba_m=1, seed=1)
    with pytest.raises(ValueError, match="requires p and q"):
        embcmp.embed(g, "node2vec")
    with pytest.raises(ValueError):
        embcmp.embed(g, "deepwalk", walkz=3)
    with pytest.raises(embcmp.DataError):
        embcmp.load_edge_list("/nonexistent/graph.edges")


def test_tsne_separates_blobs():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(10.0 * i, 1.0, size=(20, 5)) for i in range(3)])
    out = embcmp.tsne(x, iterations=500, seed=2)
    assert out["coords"].shape == (60, 2)
    assert out["iteration"] == 500
    assert embcmp.trustworthiness(x, out["coords"], 10) >= 0.95


def test_ndcg_bounds():
    assert embcmp.ndcg([1, 2, 3], [1, 2, 3], 3) == pytest.approx(1.0)
    assert embcmp.ndcg([4, 5, 6], [1, 2, 3], 3) == pytest.approx(0.0)
    assert 0.0 < embcmp.ndcg([2, 1, 3], [1, 2, 3], 3) < 1.0
