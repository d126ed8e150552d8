import numpy as np
import pytest

from ballotbeat import chars, election
from ballotbeat.errors import ConfigError, DatasetError, ParameterError
from ballotbeat.nn import network
from ballotbeat.nn.network import ConvLayerSpec, DenseLayerSpec

from fdcheck import max_rel_error, numerical_gradient


@pytest.fixture(scope="module")
def net():
    return election.build_election_net(seed=0)


class TestConfig:
    def test_default_shape_chain(self):
        assert election.shape_chain() == (150, 144, 48, 42, 14, 12, 10, 8)

    def test_flatten_is_2048(self, net):
        last = net.config.conv_layers[-1]
        assert election.shape_chain()[-1] * last.filters == 2048

    def test_same_seed_identical_params(self):
        a = election.build_election_net(seed=5)
        b = election.build_election_net(seed=5)
        assert all(np.array_equal(a.params[k], b.params[k]) for k in a.params)

    def test_pool_removed_is_config_error(self):
        specs = election._default_conv_specs()
        broken = (ConvLayerSpec(7, 256, 70, pool=None),) + specs[1:]
        with pytest.raises(ConfigError):
            election.ElectionNetConfig(conv_layers=broken)

    def test_wrong_dense_stack_rejected(self):
        dense = (DenseLayerSpec(2048, 1024, "relu", 0.5),
                 DenseLayerSpec(1024, 512, "relu"),
                 DenseLayerSpec(512, 2, "softmax"))
        with pytest.raises(ConfigError):
            election.ElectionNetConfig(dense_layers=dense)


class TestForward:
    def test_output_in_unit_interval(self, net, rng):
        x = chars.encode_tweet("who is winning the debate tonight?")
        assert 0.0 < election.forward_election(net, x) < 1.0

    def test_all_zero_input_zero_biases_gives_half(self, net):
        # biases start at zero, so zero input propagates to sigmoid(0)
        assert election.forward_election(net, np.zeros((150, 70))) == 0.5

    def test_deterministic(self, net):
        x = chars.encode_tweet("some tweet #election2016")
        assert election.forward_election(net, x) == election.forward_election(net, x)

    def test_batch_matches_single(self, net):
        xs = np.stack([chars.encode_tweet("first tweet"),
                       chars.encode_tweet("second tweet !")])
        batch = election.forward_election_batch(net, xs)
        singles = [election.forward_election(net, x) for x in xs]
        np.testing.assert_allclose(batch, singles, atol=1e-12)

    def test_intermediate_shapes_match_table(self, net):
        x = chars.encode_tweet("check the shape chain")[None]
        _, caches = network.forward(net.params, net.specs, x)
        rows = [shape[1] for shape in caches["shapes"]]
        assert rows == [150, 48, 14, 12, 10, 8]  # after input and each conv block
        assert caches["conv"][0]["pre"].shape == (1, 144, 256)
        assert caches["conv"][1]["pre"].shape == (1, 42, 256)
        assert caches["flat_shape"] == (1, 8, 256)


class TestMiniatureGradient:
    def test_end_to_end_gradcheck(self, rng):
        # scaled-down twin of the architecture: 20x70 input, two conv
        # layers with 4 filters, dense 4 -> 1 sigmoid
        specs = [ConvLayerSpec(7, 4, 70, pool=3),
                 ConvLayerSpec(3, 4, 4, pool=2),
                 DenseLayerSpec(4, 1, "sigmoid")]
        assert network.conv_output_rows([s for s in specs if isinstance(s, ConvLayerSpec)],
                                        20) == [20, 14, 4, 2, 1]
        params = network.init_params(specs, rng)
        # continuous inputs keep the check away from ReLU kinks and
        # max-pool ties, where finite differences are legitimately wrong
        xb = rng.standard_normal((2, 20, 70))
        targets = np.array([1.0, 0.0])

        def loss_fn():
            return network.backprop(params, specs, xb, targets, loss="bce")[0]

        _, analytic = network.backprop(params, specs, xb, targets, loss="bce")
        fd = numerical_gradient(loss_fn, params)
        assert max_rel_error(analytic, fd) < 1e-4


def _toy_texts(rng, n=20):
    texts, labels = [], []
    for i in range(n):
        junk = "".join("abcdefghij"[j] for j in rng.integers(0, 10, 30))
        if i % 2 == 0:
            texts.append(junk[:12] + " vote2016 " + junk[12:])
            labels.append(1)
        else:
            texts.append(junk)
            labels.append(0)
    return texts, np.array(labels, dtype=np.float64)


class TestTraining:
    def test_zero_learning_rate_changes_nothing(self, rng):
        net = election.build_election_net(seed=1)
        before = {k: v.copy() for k, v in net.params.items()}
        texts, labels = _toy_texts(rng, 8)
        trace = election.train_election(net, election.encode_texts(texts), labels,
                                        epochs=2, batch_size=4, learning_rate=0.0,
                                        seed=2)
        assert all(np.array_equal(before[k], net.params[k]) for k in before)
        # dropout keeps the train-mode loss stochastic, so "flat" means
        # equal up to mask sampling noise around the frozen parameters
        assert abs(trace[0] - trace[1]) < 0.01

    def test_empty_dataset_rejected(self):
        net = election.build_election_net(seed=1)
        with pytest.raises(DatasetError):
            election.train_election(net, np.empty((0, 150, 70)), [], epochs=1)

    def test_single_class_warns(self, rng):
        net = election.build_election_net(seed=1)
        texts, _ = _toy_texts(rng, 4)
        with pytest.warns(UserWarning, match="single class"):
            election.train_election(net, election.encode_texts(texts),
                                    np.ones(4), epochs=1, batch_size=4,
                                    learning_rate=0.0, seed=0)

    def test_overfits_toy_marker_set(self, rng):
        # 20 examples, marker substring decides the label; the net must
        # reach 100% training accuracy well before the epoch cap
        texts, labels = _toy_texts(rng, 20)
        matrices = election.encode_texts(texts)
        dense = matrices.astype(np.float64)
        net = election.build_election_net(seed=3)

        def hit_all(epoch, loss, model):
            scores = election.forward_election_batch(model, dense)
            return ((scores >= 0.5) == labels).all()

        election.train_election(net, matrices, labels, epochs=200, batch_size=8,
                                learning_rate=2e-4, seed=4, callback=hit_all)
        scores = election.forward_election_batch(net, dense)
        assert ((scores >= 0.5) == labels).all()

    def test_loss_decreases_on_learnable_data(self, rng):
        texts, labels = _toy_texts(rng, 16)
        net = election.build_election_net(seed=5)
        first = []

        def early_stop(epoch, loss, model):
            first.append(loss)
            return loss < first[0] * 0.5  # separable toy: well within 50 epochs

        trace = election.train_election(net, election.encode_texts(texts), labels,
                                        epochs=50, batch_size=8,
                                        learning_rate=2e-4, seed=6,
                                        callback=early_stop)
        assert len(trace) <= 50
        assert trace[-1] < trace[0]

    def test_deterministic_training(self, rng):
        texts, labels = _toy_texts(rng, 8)
        matrices = election.encode_texts(texts)
        nets = []
        for _ in range(2):
            net = election.build_election_net(seed=9)
            election.train_election(net, matrices, labels, epochs=2, batch_size=4,
                                    learning_rate=1e-4, seed=10)
            nets.append(net)
        assert all(np.array_equal(nets[0].params[k], nets[1].params[k])
                   for k in nets[0].params)


class TestClassify:
    def test_threshold_decision(self, net):
        label, score = election.classify_election(net, "any text", threshold=0.5)
        expected = election.ELECTION if score >= 0.5 else election.NON_ELECTION
        assert label == expected

    def test_threshold_bounds(self, net):
        for bad in (0.0, 1.0, 1.5, -0.2):
            with pytest.raises(ParameterError):
                election.classify_election(net, "text", threshold=bad)

    def test_score_vs_thresholds(self, net):
        _, score = election.classify_election(net, "vote vote vote")
        slightly_below = max(score - 1e-9, 1e-9)
        label_low, _ = election.classify_election(net, "vote vote vote",
                                                  threshold=slightly_below)
        assert label_low == election.ELECTION
        if score < 0.999:
            label_high, _ = election.classify_election(net, "vote vote vote",
                                                       threshold=min(0.999, score + 1e-9))
            assert label_high == election.NON_ELECTION
