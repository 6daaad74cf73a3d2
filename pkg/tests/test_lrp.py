import numpy as np
import pytest

from voxelxai.errors import DomainError
from voxelxai.layers import (
    Conv3d,
    Dense,
    Flatten,
    GlobalAvgPool,
    LayerWeights,
    MaxPool3d,
    Relu,
)
from voxelxai.lrp import LrpConfig, lrp, lrp_step, relevance_stack
from voxelxai.network import NetworkSpec, forward, forward_traced
from voxelxai.training import init_network


def dense_layer(w, b=None):
    w = np.atleast_2d(np.asarray(w, dtype=np.float64))
    b = np.zeros(w.shape[0]) if b is None else np.asarray(b, dtype=np.float64)
    return Dense("d", w.shape[1], w.shape[0]), LayerWeights(w, b)


def single_dense_net(w, b=None):
    layer, weights = dense_layer(w, b)
    k = weights.weight.shape[1]
    return NetworkSpec([Flatten("flat"), layer], {"d": weights}, (1, 1, 1, k))


def bias_free_relu_net(seed=0):
    """Every layer kind, all biases zero, so epsilon = 0 conserves relevance."""
    layers = [
        Conv3d("conv1", 1, 2, (3, 3, 3), padding="same"),
        Relu("relu1"),
        MaxPool3d("pool1", (2, 2, 2)),
        Conv3d("conv2", 2, 3, (2, 2, 2), padding="valid"),
        GlobalAvgPool("gap"),
        Flatten("flat"),
        Dense("fc", 3, 4),
    ]
    rng = np.random.default_rng(seed)
    weights = {
        "conv1": LayerWeights(rng.normal(size=(2, 1, 3, 3, 3)), np.zeros(2)),
        "conv2": LayerWeights(rng.normal(size=(3, 2, 2, 2, 2)), np.zeros(3)),
        "fc": LayerWeights(rng.normal(size=(4, 3)), np.zeros(4)),
    }
    return NetworkSpec(layers, weights, (1, 4, 4, 4))


def biased_net(seed=0):
    layers = [
        Conv3d("conv1", 1, 2, (3, 3, 3), padding="same"),
        Relu("relu1"),
        MaxPool3d("pool1", (2, 2, 2)),
        Flatten("flat"),
        Dense("fc", 16, 3),
    ]
    return init_network(layers, (1, 4, 4, 4), seed)


def with_biases(net, seed):
    rng = np.random.default_rng(seed)
    weights = {
        name: LayerWeights(lw.weight, rng.normal(size=lw.bias.shape))
        for name, lw in net.weights.items()
    }
    return NetworkSpec(net.layers, weights, net.input_dims)


class TestLrpStep:
    def test_unit_weights_split_by_activation(self):
        layer, w = dense_layer([[1.0, 1.0]])
        r = lrp_step(layer, np.array([1.0, 2.0]), np.array([3.0]), LrpConfig(epsilon=0.0), w)
        np.testing.assert_allclose(r, [1.0, 2.0], rtol=1e-12)

    def test_signed_epsilon_leaks_relevance(self):
        layer, w = dense_layer([[1.0, 1.0]])
        cfg = LrpConfig(epsilon=0.3, epsilon_signing="signed")
        r = lrp_step(layer, np.array([1.0, 2.0]), np.array([3.0]), cfg, w)
        np.testing.assert_allclose(r, [10.0 / 11.0, 20.0 / 11.0], rtol=1e-12)
        assert r.sum() < 3.0

    def test_signed_epsilon_with_negative_denominator(self):
        # z = 1 - 4 = -3; signed stabilizer pushes away from zero: z -> -3.3
        layer, w = dense_layer([[1.0, -2.0]])
        cfg = LrpConfig(epsilon=0.3, epsilon_signing="signed")
        r = lrp_step(layer, np.array([1.0, 2.0]), np.array([3.0]), cfg, w)
        s = 3.0 / -3.3
        np.testing.assert_allclose(r, [1.0 * 1.0 * s, 2.0 * -2.0 * s], rtol=1e-12)

    def test_unsigned_epsilon_moves_toward_zero_for_negative_z(self):
        layer, w = dense_layer([[1.0, -2.0]])
        cfg = LrpConfig(epsilon=0.3, epsilon_signing="unsigned")
        r = lrp_step(layer, np.array([1.0, 2.0]), np.array([3.0]), cfg, w)
        s = 3.0 / -2.7
        np.testing.assert_allclose(r, [1.0 * 1.0 * s, 2.0 * -2.0 * s], rtol=1e-12)

    def test_zero_activation_gets_zero_relevance(self):
        layer, w = dense_layer([[1.0, 1.0]])
        r = lrp_step(layer, np.array([0.0, 2.0]), np.array([3.0]), LrpConfig(epsilon=0.0), w)
        assert r[0] == 0.0
        np.testing.assert_allclose(r[1], 3.0, rtol=1e-12)

    def test_zero_denominator_is_floored_not_inf(self):
        # z = 1 - 1 = 0 exactly; the floor keeps s finite
        layer, w = dense_layer([[1.0, -0.5]])
        r = lrp_step(layer, np.array([1.0, 2.0]), np.array([5.0]), LrpConfig(epsilon=0.0), w)
        assert np.isfinite(r).all()

    def test_relu_step_passes_relevance_through(self):
        layer = Relu("r")
        a = np.array([0.5, -1.0, 2.0])
        r_next = np.array([1.0, 0.0, 4.0])
        r = lrp_step(layer, a, r_next, LrpConfig(epsilon=0.0))
        np.testing.assert_allclose(r, [1.0, 0.0, 4.0], rtol=1e-12)

    def test_maxpool_step_routes_to_the_winner(self):
        layer = MaxPool3d("p", (2, 2, 2))
        a = np.zeros((1, 2, 2, 2))
        a[0, 1, 0, 1] = 3.0
        r = lrp_step(layer, a, np.array([[[[5.0]]]]), LrpConfig(epsilon=0.0))
        expect = np.zeros((1, 2, 2, 2))
        expect[0, 1, 0, 1] = 5.0
        np.testing.assert_allclose(r, expect, rtol=1e-12)

    def test_gap_step_splits_by_activation(self):
        layer = GlobalAvgPool("g")
        a = np.array([1.0, 3.0]).reshape(1, 1, 1, 2)
        r = lrp_step(layer, a, np.array([8.0]), LrpConfig(epsilon=0.0))
        np.testing.assert_allclose(r.ravel(), [2.0, 6.0], rtol=1e-12)


class TestConservation:
    def test_every_boundary_totals_the_output_score(self):
        net = bias_free_relu_net(2)
        x = np.random.default_rng(3).uniform(0.1, 1.0, size=(4, 4, 4))
        vec = forward(net, x)
        target = int(np.argmax(np.abs(vec)))
        f = vec[target]
        assert abs(f) > 1e-3
        stack = relevance_stack(net, x, target, LrpConfig(epsilon=0.0))
        for boundary in range(len(stack.relevances)):
            np.testing.assert_allclose(stack.total(boundary), f, rtol=1e-6)

    def test_conservation_across_seeds_and_targets(self):
        for seed in (5, 6):
            net = bias_free_relu_net(seed)
            x = np.random.default_rng(seed + 50).uniform(0.1, 1.0, size=(4, 4, 4))
            vec = forward(net, x)
            for target in range(vec.size):
                if abs(vec[target]) < 1e-3:
                    continue
                stack = relevance_stack(net, x, target, LrpConfig(epsilon=0.0))
                np.testing.assert_allclose(stack.total(0), vec[target], rtol=1e-6)

    def test_epsilon_shrinks_total_relevance(self):
        # all-positive weights and input keep every z and R positive, so each
        # stabilized step scales relevance by |z| / (|z| + eps) < 1
        layers = [
            Conv3d("conv1", 1, 2, (2, 2, 2), padding="valid"),
            Relu("relu1"),
            Flatten("flat"),
            Dense("fc", 16, 1),
        ]
        rng = np.random.default_rng(8)
        weights = {
            "conv1": LayerWeights(np.abs(rng.normal(size=(2, 1, 2, 2, 2))), np.zeros(2)),
            "fc": LayerWeights(np.abs(rng.normal(size=(1, 16))), np.zeros(1)),
        }
        net = NetworkSpec(layers, weights, (1, 3, 3, 3))
        x = np.random.default_rng(9).uniform(0.1, 1.0, size=(3, 3, 3))
        f = forward(net, x)[0]
        totals = [
            relevance_stack(net, x, 0, LrpConfig(epsilon=eps)).total(0)
            for eps in (0.0, 0.01, 0.1, 1.0)
        ]
        np.testing.assert_allclose(totals[0], f, rtol=1e-9)
        for smaller_eps, larger_eps in zip(totals, totals[1:]):
            assert larger_eps < smaller_eps
        assert all(t > 0.0 for t in totals)

    def test_zeroed_bias_policy_restores_conservation(self):
        net = with_biases(biased_net(4), 14)
        x = np.random.default_rng(15).uniform(0.1, 1.0, size=(4, 4, 4))
        vec = forward(net, x)
        target = int(np.argmax(np.abs(vec)))
        f = vec[target]
        assert abs(f) > 1e-3
        zeroed = relevance_stack(
            net, x, target, LrpConfig(epsilon=0.0, bias_policy="biases_zeroed")
        )
        np.testing.assert_allclose(zeroed.total(0), f, rtol=1e-6)
        absorbed = relevance_stack(net, x, target, LrpConfig(epsilon=0.0))
        assert abs(absorbed.total(0) - f) > 1e-3 * abs(f)


class TestRelevanceStack:
    def test_shapes_track_the_trace(self):
        net = bias_free_relu_net()
        x = np.random.default_rng(20).uniform(0.1, 1.0, size=(4, 4, 4))
        _, trace = forward_traced(net, x)
        stack = relevance_stack(net, x, 0)
        assert len(stack.relevances) == len(net.layers) + 1
        assert stack.layer_names == [ly.name for ly in net.layers]
        for i in range(len(net.layers)):
            assert stack.relevances[i].shape == trace.inputs[i].shape
        assert stack.input_relevance is stack.relevances[0]

    def test_output_init_modes(self):
        net = bias_free_relu_net()
        x = np.random.default_rng(21).uniform(0.1, 1.0, size=(4, 4, 4))
        f = forward(net, x)
        by_value = relevance_stack(net, x, 1).relevances[-1]
        np.testing.assert_array_equal(by_value, [0.0, f[1], 0.0, 0.0])
        unit = relevance_stack(net, x, 1, LrpConfig(output_init="unit")).relevances[-1]
        np.testing.assert_array_equal(unit, [0.0, 1.0, 0.0, 0.0])

    def test_bad_target(self):
        net = bias_free_relu_net()
        with pytest.raises(IndexError):
            relevance_stack(net, np.zeros((4, 4, 4)), 4)
        with pytest.raises(IndexError):
            relevance_stack(net, np.zeros((4, 4, 4)), -1)


class TestLrpHeatmap:
    def test_single_linear_layer_attributes_x_times_w(self):
        w = np.array([2.0, -0.7, 0.3])
        net = single_dense_net(w)
        x = np.array([0.5, -1.2, 2.0]).reshape(1, 1, 1, 3)
        h = lrp(net, x, 0, LrpConfig(epsilon=0.0))
        np.testing.assert_allclose(h.values.ravel(), x.ravel() * w, rtol=1e-12)
        np.testing.assert_allclose(h.values.sum(), forward(net, x)[0], rtol=1e-12)

    def test_small_perturbations_move_the_map_proportionally(self):
        # single linear layer: heatmap_i = x_i * w_i, so the map is Lipschitz
        # with constant max|w|
        w = np.array([1.5, -0.8, 0.4])
        net = single_dense_net(w)
        x = np.array([0.9, 0.4, -0.6]).reshape(1, 1, 1, 3)
        base = lrp(net, x, 0, LrpConfig(epsilon=0.0)).values
        rng = np.random.default_rng(30)
        for _ in range(20):
            delta = rng.normal(size=x.shape) * 0.05
            moved = lrp(net, x + delta, 0, LrpConfig(epsilon=0.0)).values
            assert np.linalg.norm(moved - base) <= 1.5 * np.linalg.norm(delta) * (1 + 1e-12)

    def test_zero_input_yields_zero_map(self):
        net = bias_free_relu_net()
        h = lrp(net, np.zeros((4, 4, 4)), 0)
        np.testing.assert_array_equal(h.values, np.zeros((4, 4, 4)))

    def test_heatmap_metadata_and_dims(self):
        net = bias_free_relu_net()
        x = np.random.default_rng(22).uniform(size=(4, 4, 4))
        h = lrp(net, x, 2)
        assert h.method == "lrp" and h.target == 2 and h.dims == (4, 4, 4)

    def test_heatmap_is_the_input_boundary_of_the_stack(self):
        net = bias_free_relu_net()
        x = np.random.default_rng(23).uniform(size=(4, 4, 4))
        cfg = LrpConfig(epsilon=0.01)
        h = lrp(net, x, 1, cfg)
        stack = relevance_stack(net, x, 1, cfg)
        np.testing.assert_array_equal(h.values, stack.input_relevance[0])

    def test_repeat_runs_identical(self):
        net = bias_free_relu_net()
        x = np.random.default_rng(24).uniform(size=(4, 4, 4))
        a = lrp(net, x, 0)
        b = lrp(net, x, 0)
        np.testing.assert_array_equal(a.values, b.values)


class TestConfig:
    def test_rejections(self):
        with pytest.raises(DomainError):
            LrpConfig(epsilon=-1e-9)
        with pytest.raises(DomainError):
            LrpConfig(epsilon=np.nan)
        with pytest.raises(DomainError):
            LrpConfig(epsilon_signing="absolute")
        with pytest.raises(DomainError):
            LrpConfig(output_init="one")
        with pytest.raises(DomainError):
            LrpConfig(bias_policy="drop")

    def test_defaults(self):
        cfg = LrpConfig()
        assert cfg.epsilon == 1e-6
        assert cfg.epsilon_signing == "signed"
        assert cfg.output_init == "activation_value"
        assert cfg.bias_policy == "biases_absorb"
