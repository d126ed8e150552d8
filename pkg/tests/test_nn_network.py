import numpy as np
import pytest

from ballotbeat.errors import ParameterError, ShapeError
from ballotbeat.nn import network
from ballotbeat.nn.network import ConvLayerSpec, DenseLayerSpec

from fdcheck import max_rel_error, numerical_gradient


class TestSpecs:
    def test_conv_spec_validation(self):
        with pytest.raises(ParameterError):
            ConvLayerSpec(0, 4, 3)
        with pytest.raises(ParameterError):
            ConvLayerSpec(3, 4, 3, pool=1)

    def test_dense_spec_validation(self):
        with pytest.raises(ParameterError):
            DenseLayerSpec(4, 2, "tanh")
        with pytest.raises(ParameterError):
            DenseLayerSpec(4, 2, "relu", dropout_rate=1.0)

    def test_conv_after_dense_rejected(self):
        with pytest.raises(ParameterError):
            network.split_specs([DenseLayerSpec(4, 2), ConvLayerSpec(3, 4, 3)])


class TestInitParams:
    def test_shapes_and_determinism(self):
        specs = [ConvLayerSpec(3, 4, 5, pool=2), DenseLayerSpec(8, 2, "relu"),
                 DenseLayerSpec(2, 1, "sigmoid")]
        a = network.init_params(specs, np.random.default_rng(3))
        b = network.init_params(specs, np.random.default_rng(3))
        assert a["conv0.w"].shape == (4, 15)
        assert a["dense0.w"].shape == (2, 8)
        assert all(np.array_equal(a[k], b[k]) for k in a)

    def test_glorot_limit(self):
        specs = [ConvLayerSpec(3, 4, 5), DenseLayerSpec(4, 1, "sigmoid")]
        params = network.init_params(specs, np.random.default_rng(0))
        limit = np.sqrt(6.0 / (15 + 4))
        assert np.abs(params["conv0.w"]).max() <= limit
        assert not params["conv0.b"].any()


def _bce_stack():
    return [ConvLayerSpec(5, 4, 7, pool=2), ConvLayerSpec(3, 4, 4),
            DenseLayerSpec(24, 6, "relu", dropout_rate=0.5),
            DenseLayerSpec(6, 1, "sigmoid")]


class TestBackprop:
    def test_hand_example_zero_weight_dense_sigmoid(self):
        # sigmoid(0)=0.5, BCE with t=1: d_z = o - t = -0.5, so dW = -0.5 x
        specs = [DenseLayerSpec(3, 1, "sigmoid")]
        params = {"dense0.w": np.zeros((1, 3)), "dense0.b": np.zeros(1)}
        x = np.array([[0.2, -1.5, 3.0]])
        loss, grads = network.backprop(params, specs, x[:, :, None].transpose(0, 2, 1),
                                       np.array([1.0]), loss="bce")
        # conv-free stacks still take (B, rows, channels); flatten handles it
        np.testing.assert_allclose(grads["dense0.w"], -0.5 * x, atol=1e-12)
        assert abs(loss - np.log(2)) < 1e-12

    def test_gradients_match_finite_differences_bce(self, rng):
        specs = _bce_stack()
        params = network.init_params(specs, rng)
        xb = rng.standard_normal((3, 20, 7))
        targets = np.array([1.0, 0.0, 1.0])

        def loss_fn():
            return network.backprop(params, specs, xb, targets, loss="bce",
                                    rng=np.random.default_rng(99))[0]

        _, analytic = network.backprop(params, specs, xb, targets, loss="bce",
                                       rng=np.random.default_rng(99))
        fd = numerical_gradient(loss_fn, params)
        assert max_rel_error(analytic, fd) < 1e-4

    def test_gradients_match_finite_differences_cross_entropy(self, rng):
        specs = [ConvLayerSpec(3, 3, 5, pool=2), DenseLayerSpec(12, 4, "relu"),
                 DenseLayerSpec(4, 3, "softmax")]
        params = network.init_params(specs, rng)
        xb = rng.standard_normal((4, 11, 5))
        targets = np.eye(3)[[0, 2, 1, 1]]

        def loss_fn():
            return network.backprop(params, specs, xb, targets,
                                    loss="cross_entropy")[0]

        _, analytic = network.backprop(params, specs, xb, targets,
                                       loss="cross_entropy")
        fd = numerical_gradient(loss_fn, params)
        assert max_rel_error(analytic, fd) < 1e-4

    def test_duplicated_example_matches_single(self, rng):
        # mean-over-batch: the same example twice gives the single-example
        # gradients (dropout off so the two copies see identical masks)
        specs = [s if isinstance(s, ConvLayerSpec)
                 else DenseLayerSpec(s.in_size, s.out_size, s.activation, 0.0)
                 for s in _bce_stack()]
        params = network.init_params(specs, rng)
        x = rng.standard_normal((1, 20, 7))
        both = np.concatenate([x, x])
        loss1, g1 = network.backprop(params, specs, x, np.array([1.0]), loss="bce")
        loss2, g2 = network.backprop(params, specs, both,
                                     np.array([1.0, 1.0]), loss="bce")
        assert abs(loss1 - loss2) < 1e-12
        for k in g1:
            np.testing.assert_allclose(g1[k], g2[k], atol=1e-12)

    def test_shape_error_names_layer(self, rng):
        specs = _bce_stack()
        params = network.init_params(specs, rng)
        with pytest.raises(ShapeError, match="conv0"):
            network.backprop(params, specs, rng.standard_normal((2, 20, 6)),
                             np.array([1.0, 0.0]), loss="bce")
        with pytest.raises(ShapeError, match="dense0"):
            network.forward(params, [specs[0], DenseLayerSpec(99, 1, "sigmoid")],
                            rng.standard_normal((1, 20, 7)))

    def test_unknown_loss(self, rng):
        specs = _bce_stack()
        params = network.init_params(specs, rng)
        with pytest.raises(ParameterError):
            network.backprop(params, specs, rng.standard_normal((1, 20, 7)),
                             np.array([1.0]), loss="mse")

    def test_grads_mirror_param_shapes(self, rng):
        specs = _bce_stack()
        params = network.init_params(specs, rng)
        _, grads = network.backprop(params, specs, rng.standard_normal((2, 20, 7)),
                                    np.array([1.0, 0.0]), loss="bce",
                                    rng=np.random.default_rng(0))
        assert set(grads) == set(params)
        assert all(grads[k].shape == params[k].shape for k in params)

    def test_dropout_mask_reuse_determinism(self, rng):
        specs = _bce_stack()
        params = network.init_params(specs, rng)
        xb = rng.standard_normal((2, 20, 7))
        t = np.array([1.0, 0.0])
        l1, g1 = network.backprop(params, specs, xb, t, loss="bce",
                                  rng=np.random.default_rng(7))
        l2, g2 = network.backprop(params, specs, xb, t, loss="bce",
                                  rng=np.random.default_rng(7))
        assert l1 == l2
        assert all(np.array_equal(g1[k], g2[k]) for k in g1)


class TestForward:
    def test_inference_has_no_dropout(self, rng):
        specs = _bce_stack()
        params = network.init_params(specs, rng)
        xb = rng.standard_normal((2, 20, 7))
        a, _ = network.forward(params, specs, xb)
        b, _ = network.forward(params, specs, xb)
        assert np.array_equal(a, b)

    def test_conv_chain_shapes_recorded(self, rng):
        specs = _bce_stack()
        params = network.init_params(specs, rng)
        _, caches = network.forward(params, specs, rng.standard_normal((2, 20, 7)))
        shapes = [s[1] for s in caches["shapes"]]
        assert shapes == [20, 8, 6]  # input -> conv5+pool2 -> conv3

    def test_output_rows_helper(self):
        rows = network.conv_output_rows([ConvLayerSpec(7, 2, 3, pool=3),
                                         ConvLayerSpec(7, 2, 2, pool=3)], 150)
        assert rows == [150, 144, 48, 42, 14]
