"""Character-level deep convolutional election classifier.

Five 1-d conv layers (the first two followed by non-overlapping max
pooling) and three dense layers ending in a single sigmoid unit. The
input is the 150x70 one-hot tweet matrix; the row-count chain

    150 -> 144 -> 48 -> 42 -> 14 -> 12 -> 10 -> 8   (256 channels)

flattens to 2048 before the dense stack 2048 -> 1024 -> 512 -> 1, with
dropout 0.5 after the first dense layer during training.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ballotbeat import chars
from ballotbeat.errors import ConfigError, DatasetError, ParameterError
from ballotbeat.nn import adam as adam_opt
from ballotbeat.nn import functional as F
from ballotbeat.nn import network

#: (window, filters, pool) per conv layer; pool None means no pooling.
CONV_GEOMETRY = ((7, 256, 3), (7, 256, 3), (3, 256, None), (3, 256, None), (3, 256, None))
DENSE_SIZES = (2048, 1024, 512, 1)
DROPOUT_RATE = 0.5
#: Expected row counts after the input and every conv/pool step.
SHAPE_CHAIN = (150, 144, 48, 42, 14, 12, 10, 8)
FLATTEN_SIZE = 2048

ELECTION = "election"
NON_ELECTION = "non_election"


def _default_conv_specs() -> tuple[network.ConvLayerSpec, ...]:
    specs = []
    channels = len(chars.DEFAULT_ALPHABET)
    for window, filters, pool in CONV_GEOMETRY:
        specs.append(network.ConvLayerSpec(window=window, filters=filters,
                                           in_channels=channels, pool=pool))
        channels = filters
    return tuple(specs)


def _default_dense_specs() -> tuple[network.DenseLayerSpec, ...]:
    return (
        network.DenseLayerSpec(DENSE_SIZES[0], DENSE_SIZES[1], "relu", DROPOUT_RATE),
        network.DenseLayerSpec(DENSE_SIZES[1], DENSE_SIZES[2], "relu"),
        network.DenseLayerSpec(DENSE_SIZES[2], DENSE_SIZES[3], "sigmoid"),
    )


@dataclass(frozen=True)
class ElectionNetConfig:
    """Fixed geometry of the election classifier.

    The fields exist for introspection and serialization echo; any value
    other than the canonical geometry is rejected, because the shape chain
    (and the 2048 flatten it produces) is part of the model contract.
    """

    conv_layers: tuple[network.ConvLayerSpec, ...] = field(default_factory=_default_conv_specs)
    dense_layers: tuple[network.DenseLayerSpec, ...] = field(default_factory=_default_dense_specs)

    def __post_init__(self):
        if self.conv_layers != _default_conv_specs():
            raise ConfigError(
                "election conv geometry must be exactly "
                f"{CONV_GEOMETRY} over {len(chars.DEFAULT_ALPHABET)} channels")
        if self.dense_layers != _default_dense_specs():
            raise ConfigError(
                f"election dense stack must be {DENSE_SIZES} with relu/relu/sigmoid "
                f"and dropout {DROPOUT_RATE} after the first layer")

    @property
    def specs(self) -> list:
        return list(self.conv_layers) + list(self.dense_layers)


@dataclass
class ElectionNet:
    config: ElectionNetConfig
    params: dict[str, np.ndarray]

    @property
    def specs(self) -> list:
        return self.config.specs


def shape_chain(config: ElectionNetConfig | None = None,
                rows: int = chars.MAX_CHARS) -> tuple[int, ...]:
    """Row counts through the conv stack, starting at the input."""
    config = config or ElectionNetConfig()
    return tuple(network.conv_output_rows(config.conv_layers, rows))


def build_election_net(config: ElectionNetConfig | None = None, seed: int = 0) -> ElectionNet:
    """Randomly initialized net; verifies the conv chain flattens to 2048."""
    config = config or ElectionNetConfig()
    chain = shape_chain(config)
    if chain != SHAPE_CHAIN:
        raise ConfigError(f"conv shape chain {chain} != expected {SHAPE_CHAIN}")
    flatten = chain[-1] * config.conv_layers[-1].filters
    if flatten != FLATTEN_SIZE:
        raise ConfigError(f"flatten size {flatten} != expected {FLATTEN_SIZE}")
    params = network.init_params(config.specs, np.random.default_rng(seed))
    return ElectionNet(config=config, params=params)


def forward_election_batch(net: ElectionNet, xb: np.ndarray) -> np.ndarray:
    """Inference scores for a batch of tweet matrices (B, 150, 70)."""
    out, _ = network.forward(net.params, net.specs,
                             np.asarray(xb, dtype=np.float64))
    return out[:, 0]


def forward_election(net: ElectionNet, char_matrix: np.ndarray) -> float:
    """Probability that one encoded tweet is election-related. Inference
    mode: dropout is inactive and the output is deterministic."""
    return float(forward_election_batch(net, np.asarray(char_matrix)[None]))


def encode_texts(texts) -> np.ndarray:
    """Encode many tweets at once; uint8 keeps 2k matrices around 20 MB."""
    out = np.zeros((len(texts), chars.MAX_CHARS, len(chars.DEFAULT_ALPHABET)),
                   dtype=np.uint8)
    for i, text in enumerate(texts):
        out[i] = chars.encode_tweet(text)
    return out


def train_election(net: ElectionNet, matrices: np.ndarray, labels,
                   epochs: int = 5, batch_size: int = 32,
                   learning_rate: float = 0.001, beta1: float = 0.9,
                   beta2: float = 0.999, epsilon: float = 1e-8,
                   seed: int = 0, callback=None) -> list[float]:
    """Train in place with Adam on binary cross-entropy; returns the
    per-epoch mean loss trace.

    ``matrices`` is (N, 150, 70) (any dtype castable to float), ``labels``
    is (N,) of 0/1. Examples are reshuffled every epoch and dropout is
    active only here. ``callback(epoch, mean_loss, net)`` may return truthy
    to stop early. Deterministic for a fixed seed.
    """
    matrices = np.asarray(matrices)
    labels = np.asarray(labels, dtype=np.float64)
    if matrices.shape[0] == 0:
        raise DatasetError("training dataset is empty")
    if matrices.shape[0] != labels.shape[0]:
        raise DatasetError(
            f"{matrices.shape[0]} matrices but {labels.shape[0]} labels")
    if epochs < 1 or batch_size < 1:
        raise ParameterError("epochs and batch size must be >= 1")
    classes = np.unique(labels)
    if not np.isin(classes, (0.0, 1.0)).all():
        raise DatasetError(f"labels must be 0/1, got {classes}")
    if len(classes) < 2:
        warnings.warn("training labels contain a single class; the classifier "
                      "cannot learn a decision boundary")

    rng = np.random.default_rng(seed)
    state = adam_opt.init_adam(net.params, learning_rate=learning_rate,
                               beta1=beta1, beta2=beta2, epsilon=epsilon)
    n = matrices.shape[0]
    trace: list[float] = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            xb = matrices[idx].astype(np.float64)
            loss, grads = network.backprop(net.params, net.specs, xb,
                                           labels[idx], loss="bce", rng=rng)
            adam_opt.adam_step(net.params, grads, state)
            total += loss * len(idx)
        mean_loss = total / n
        trace.append(mean_loss)
        if callback is not None and callback(epoch, mean_loss, net):
            break
    return trace


def classify_election(net: ElectionNet, text: str, threshold: float = 0.5):
    """Label one raw tweet text: ('election'|'non_election', score)."""
    if not 0.0 < threshold < 1.0:
        raise ParameterError(f"threshold must be inside (0, 1), got {threshold}")
    score = forward_election(net, chars.encode_tweet(text))
    return (ELECTION if score >= threshold else NON_ELECTION), score
