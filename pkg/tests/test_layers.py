import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molpool.autodiff import Tensor, sum_all
from molpool.autodiff.gradcheck import gradient_errors
from molpool.graph import GraphBatch, MolGraph, batch, keep_count
from molpool.layers import (
    COARSE_GRAIN,
    SIMPLE,
    DualMessageConv,
    GatherHead,
    Model,
    ModelConfig,
    TopKPool,
)
from helpers import permute_graph, random_molgraph, randomise_batchnorm, small_model, tensor_batch
from oracles import simple_pool_oracle

TOL = 1e-4


# ---------------------------------------------------------------- conv


def test_conv_zero_weights_zero_output():
    rng = np.random.default_rng(0)
    conv = DualMessageConv(12, 4, 6, 5, rng)
    for p in conv.parameters():
        p.data[...] = 0.0
    b = tensor_batch(batch([random_molgraph(rng, 6)]))
    out = conv(b)
    assert not out.node_feats.data.any()
    assert not out.edge_feats.data.any()


def test_conv_isolated_node_gets_self_message_only():
    rng = np.random.default_rng(1)
    conv = DualMessageConv(3, 2, 4, 2, rng).eval()
    g = MolGraph(rng.normal(size=(3, 3)), np.array([[0, 1]]), rng.normal(size=(1, 2)))
    out = conv(tensor_batch(batch([g])))
    bn = conv.node_bn
    s = g.node_feats[2] @ conv.node_self.weight.data + conv.node_self.bias.data
    expected = np.maximum((s - bn.running_mean) / np.sqrt(bn.running_var + bn.eps) * bn.gamma.data + bn.beta.data, 0)
    np.testing.assert_allclose(out.node_feats.data[2], expected)


def test_conv_edge_update_symmetric_in_endpoints():
    rng = np.random.default_rng(2)
    conv = DualMessageConv(12, 4, 6, 5, rng)
    g = random_molgraph(rng, 7, 0.5)
    b = batch([g])
    swapped = GraphBatch(b.node_feats, b.edges[:, ::-1].copy(), b.edge_feats, b.node_graph_id, b.edge_graph_id, 1)
    out_a = conv(tensor_batch(b))
    out_b = conv(tensor_batch(swapped))
    np.testing.assert_allclose(out_a.edge_feats.data, out_b.edge_feats.data, atol=1e-12)
    np.testing.assert_allclose(out_a.node_feats.data, out_b.node_feats.data, atol=1e-12)


def test_conv_width_mismatch():
    rng = np.random.default_rng(3)
    conv = DualMessageConv(5, 4, 6, 5, rng)
    with pytest.raises(ValueError, match="widths"):
        conv(tensor_batch(batch([random_molgraph(rng, 4)])))


def test_conv_handles_edgeless_batch():
    rng = np.random.default_rng(4)
    conv = DualMessageConv(3, 2, 4, 2, rng)
    g = MolGraph(rng.normal(size=(3, 3)), np.zeros((0, 2)), np.zeros((0, 2)))
    out = conv(tensor_batch(batch([g])))
    assert out.node_feats.shape == (3, 4) and out.edge_feats.shape == (0, 2)


@pytest.mark.parametrize("mode", ["training", "inference"])
def test_conv_gradients(mode):
    rng = np.random.default_rng(5)
    conv = DualMessageConv(12, 4, 5, 3, rng)
    randomise_batchnorm(conv, rng)
    if mode == "inference":
        conv.eval()
    b = tensor_batch(batch([random_molgraph(rng, 6, 0.5), random_molgraph(rng, 5, 0.5)]))

    wn = rng.normal(size=(b.num_nodes, 5))
    we = rng.normal(size=(b.num_edges, 3))

    def loss():
        out = conv(b)
        return sum_all(out.node_feats * Tensor(wn)) + sum_all(out.edge_feats * Tensor(we))

    names, params = zip(*conv.named_parameters())
    errs = gradient_errors(loss, list(params) + [b.node_feats, b.edge_feats], names=list(names) + ["a", "e"])
    assert max(errs.values()) < TOL, errs


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 10))
def test_conv_permutation_equivariance(seed, n):
    rng = np.random.default_rng(seed)
    conv = DualMessageConv(12, 4, 5, 3, rng)
    g = random_molgraph(rng, n, 0.4)
    perm = rng.permutation(n)
    out_a = conv(tensor_batch(batch([g]))).node_feats.data
    out_b = conv(tensor_batch(batch([permute_graph(g, perm)]))).node_feats.data
    np.testing.assert_allclose(out_b[perm], out_a, atol=1e-10)


# ---------------------------------------------------------------- pool scores


def test_pool_scores_zero_projection():
    rng = np.random.default_rng(6)
    pool = TopKPool(4, 2, 0.5, SIMPLE, rng)
    pool.p.data[:] = 0
    b = tensor_batch(batch([random_molgraph(rng, 5, cn=4, ce=2)]))
    y, gated = pool.scores(b)
    assert not y.data.any() and not gated.data.any()


def test_pool_scores_single_channel():
    pool = TopKPool(1, 1, 1.0, SIMPLE, np.random.default_rng(0))
    pool.p.data[:] = 1.0
    b = GraphBatch(Tensor([[2.0]]), np.zeros((0, 2), np.int64), Tensor(np.zeros((0, 1))), np.zeros(1, np.int64), np.zeros(0, np.int64), 1)
    y, gated = pool.scores(b)
    assert y.data[0, 0] == 2.0
    assert gated.data[0, 0] == pytest.approx(2 * np.tanh(2))


def test_gate_gradient_in_projection_nonzero():
    rng = np.random.default_rng(7)
    pool = TopKPool(3, 2, 0.5, SIMPLE, rng)
    pool.p.data[:] = np.array([[1.5], [-0.7], [2.0]])
    a = Tensor(rng.normal(size=(4, 3)) * 2)
    b = GraphBatch(a, np.zeros((0, 2), np.int64), Tensor(np.zeros((0, 2))), np.zeros(4, np.int64), np.zeros(0, np.int64), 1)
    w = rng.normal(size=(4, 3))
    loss = lambda: sum_all(pool.scores(b)[1] * Tensor(w))
    errs = gradient_errors(loss, [pool.p])
    assert errs["param0"] < TOL
    assert np.abs(pool.p.grad).max() > 1e-3


# ---------------------------------------------------------------- pool forward


def path_batch(node_scores, pairs, edge_feats):
    n = len(node_scores)
    g = MolGraph(np.asarray(node_scores, float).reshape(n, 1), np.array(pairs), np.asarray(edge_feats, float))
    b = batch([g])
    return b.with_features(Tensor(b.node_feats), Tensor(b.edge_feats))


def unit_pool(rho, variant=SIMPLE, edge_dim=2):
    pool = TopKPool(1, edge_dim, rho, variant, np.random.default_rng(0))
    pool.p.data[:] = 1.0
    return pool


def test_simple_pool_path():
    e = [[1.0, 2.0], [10.0, 20.0]]
    b = path_batch([3.0, 1.0, 2.0], [(0, 1), (1, 2)], e)
    out = unit_pool(0.5)(b)
    assert out.edges.tolist() == [[0, 1]]
    np.testing.assert_array_equal(out.edge_feats.data, [[11.0, 22.0]])
    np.testing.assert_allclose(out.node_feats.data.ravel(), [3 * np.tanh(3), 2 * np.tanh(2)])


def test_simple_pool_square_matches_oracle():
    # 0-1, 1-2, 2-3, 0-3 ; nodes 0 and 3 score highest
    pairs = [(0, 1), (1, 2), (2, 3), (0, 3)]
    e = np.array([[1.0, 0.0], [2.0, 0.0], [4.0, 0.0], [0.0, 8.0]])
    b = path_batch([5.0, 1.0, 2.0, 6.0], pairs, e)
    out = unit_pool(0.5)(b)
    expected = e[3] + (e[0] + e[1] + e[2])
    np.testing.assert_array_equal(out.edge_feats.data, [expected])
    oracle = simple_pool_oracle(np.array(pairs), e, 4, [0, 3])
    np.testing.assert_array_equal(oracle[(0, 3)], expected)


def test_coarse_grain_zero_nets_give_zero_edges():
    rng = np.random.default_rng(8)
    pool = TopKPool(12, 4, 0.5, COARSE_GRAIN, rng)
    for net in (pool.path_net, pool.kept_net):
        for p in net.parameters():
            p.data[...] = 0.0
    g = random_molgraph(rng, 9, 0.5)
    out = pool(tensor_batch(batch([g])))
    assert out.num_edges > 0
    assert not out.edge_feats.data.any()


def test_coarse_grain_path_feature():
    pool = unit_pool(0.5, COARSE_GRAIN, edge_dim=1)
    b = path_batch([3.0, 1.0, 2.0], [(0, 1), (1, 2)], [[1.0], [10.0]])
    out = pool(b)
    # one OneHop provenance: path_net([a_1, e_01 + e_12])
    expected = pool.path_net(Tensor([[1.0, 11.0]])).data
    np.testing.assert_allclose(out.edge_feats.data, expected)


def test_coarse_grain_kept_edge_feature():
    pool = unit_pool(1.0, COARSE_GRAIN, edge_dim=1)
    b = path_batch([3.0, 2.0], [(0, 1)], [[4.0]])
    out = pool(b)
    ends = 3 * np.tanh(3) + 2 * np.tanh(2)
    expected = pool.kept_net(Tensor([[ends, 4.0]])).data
    np.testing.assert_allclose(out.edge_feats.data, expected)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), rho=st.sampled_from([0.3, 0.5, 0.7, 0.9, 1.0]))
def test_pool_node_counts_and_membership(seed, rho):
    rng = np.random.default_rng(seed)
    sizes = rng.integers(1, 12, size=4)
    b = batch([random_molgraph(rng, int(n), 0.4) for n in sizes])
    pool = TopKPool(12, 4, rho, SIMPLE, rng)
    out = pool(tensor_batch(b))
    assert out.nodes_per_graph().tolist() == [keep_count(int(n), rho) for n in sizes]
    if out.num_edges:
        assert (out.node_graph_id[out.edges[:, 0]] == out.node_graph_id[out.edges[:, 1]]).all()
        assert (out.edges[:, 0] < out.edges[:, 1]).all()
    assert (np.diff(out.node_graph_id) >= 0).all()


def test_rho_one_is_structural_identity():
    rng = np.random.default_rng(9)
    g = random_molgraph(rng, 8, 0.4)
    b = tensor_batch(batch([g]))
    pool = TopKPool(12, 4, 1.0, SIMPLE, rng)
    out = pool(b)
    np.testing.assert_array_equal(out.edges, b.edges)
    np.testing.assert_array_equal(out.edge_feats.data, b.edge_feats.data)
    y = b.node_feats.data @ pool.p.data
    np.testing.assert_allclose(out.node_feats.data, b.node_feats.data * np.tanh(y))


@pytest.mark.parametrize("variant", [SIMPLE, COARSE_GRAIN])
def test_pool_gradients(variant):
    rng = np.random.default_rng(10)
    pool = TopKPool(5, 3, 0.5, variant, rng)
    b = tensor_batch(batch([random_molgraph(rng, 8, 0.5, cn=5, ce=3), random_molgraph(rng, 6, 0.6, cn=5, ce=3)]))
    first = pool(b)
    wn = rng.normal(size=first.node_feats.shape)
    we = rng.normal(size=first.edge_feats.shape)

    def loss():
        out = pool(b)
        return sum_all(out.node_feats * Tensor(wn)) + sum_all(out.edge_feats * Tensor(we))

    names, params = zip(*pool.named_parameters())
    errs = gradient_errors(loss, list(params) + [b.node_feats, b.edge_feats], names=list(names) + ["a", "e"])
    assert max(errs.values()) < TOL, errs


# ---------------------------------------------------------------- gather


def gather_batch(h, gid, count):
    return GraphBatch(Tensor(h), np.zeros((0, 2), np.int64), None, np.asarray(gid), np.zeros(0, np.int64), count)


def identity_head(width):
    head = GatherHead(width, width, np.random.default_rng(0))
    head.pre_linear.weight.data[...] = np.eye(width)
    head.pre_linear.bias.data[...] = 0
    return head


def test_gather_max_and_sum():
    out = identity_head(2)(gather_batch([[1.0, 2.0], [3.0, 4.0]], [0, 0], 1))
    np.testing.assert_allclose(out.data, np.tanh([[3, 4, 4, 6]]))


def test_gather_one_node():
    out = identity_head(2)(gather_batch([[0.5, -1.0]], [0], 1))
    np.testing.assert_allclose(out.data, np.tanh([[0.5, -1.0, 0.5, -1.0]]))


def test_gather_order_invariant():
    rng = np.random.default_rng(11)
    head = GatherHead(4, 3, rng)
    h = rng.normal(size=(6, 4))
    perm = rng.permutation(6)
    a = head(gather_batch(h, np.zeros(6, int), 1)).data
    b = head(gather_batch(h[perm], np.zeros(6, int), 1)).data
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_gather_empty_graph_row_is_zero():
    out = identity_head(2)(gather_batch([[1.0, 2.0]], [1], 2))
    np.testing.assert_array_equal(out.data[0], [0, 0, 0, 0])


# ---------------------------------------------------------------- model


def test_model_layer_layout():
    m = small_model("simple", layers=3)
    assert len(m.convs) == 3 and len(m.pools) == 2
    assert len(small_model("none", layers=3).pools) == 0


def test_model_node_reduction():
    rng = np.random.default_rng(12)
    cfg = ModelConfig(node_channels=[6, 6, 6], edge_channels=[4, 4, 4], keep_ratio=0.5, pooling=SIMPLE, gather_width=4)
    model = Model(cfg, seed=1)
    _, trace = model.forward_with_trace(batch([random_molgraph(rng, 16, 0.3)]))
    counts = [trace[0].before.num_nodes] + [t.after.num_nodes for t in trace]
    assert counts == [16, 8, 4]


def test_model_nopool_finite():
    rng = np.random.default_rng(13)
    model = small_model("none")
    out = model(batch([random_molgraph(rng, n) for n in (3, 7, 1)]))
    assert out.shape == (3, 1) and np.isfinite(out.data).all()


def test_model_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(keep_ratio=1.3, pooling="simple").validate()
    with pytest.raises(ValueError):
        ModelConfig(node_channels=[4, 4], edge_channels=[4]).validate()
    with pytest.raises(ValueError):
        ModelConfig(pooling="diffpool").validate()


def test_state_dict_round_trip_and_width_error():
    a, b = small_model(seed=1), small_model(seed=2)
    b.load_state_dict(a.state_dict())
    for (na, pa), (nb, pb) in zip(a.named_parameters(), b.named_parameters()):
        assert na == nb
        np.testing.assert_array_equal(pa.data, pb.data)
    wide = Model(ModelConfig(node_channels=[7, 4, 3], edge_channels=[3, 4, 2], pooling="simple", keep_ratio=0.5, gather_width=3))
    with pytest.raises(ValueError, match="layer 'convs.0"):
        wide.load_state_dict(a.state_dict())


def test_model_accepts_edgeless_graphs():
    rng = np.random.default_rng(14)
    for pooling in ("none", "simple", "coarse_grain"):
        out = small_model(pooling)(batch([random_molgraph(rng, 3, 0.0), random_molgraph(rng, 1)]))
        assert np.isfinite(out.data).all()
