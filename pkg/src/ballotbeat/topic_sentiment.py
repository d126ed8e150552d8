"""Word-level convolutional classifier for topics and sentiment.

One architecture, instantiated twice: each tweet (at most 50 words)
becomes an n x d matrix of learned word embeddings; parallel convolutions
with window sizes 2, 3 and 4 (200 filters each) are max-pooled over time
and concatenated into a 600-vector, compressed to a penultimate layer of
size k, then softmaxed over the label set. Topics use d=300, k=256 over
22 classes; sentiment uses d=200, k=128 over 3 classes. Dropout (0.5)
applies at the concatenation and penultimate layers during training.

Padding is minimal by design: convolutions run over the actual token
count, extended with a reserved PAD embedding row only up to the largest
window so every branch has at least one window position.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ballotbeat import embeddings, tokenizer
from ballotbeat.errors import (
    ConfigError,
    DatasetError,
    EmptyInputError,
    ParameterError,
)
from ballotbeat.nn import adam as adam_opt
from ballotbeat.nn import functional as F
from ballotbeat.nn import kernels

MAX_WORDS = 50

TOPIC_LABELS = (
    "Income Inequality", "Environment/Energy", "Jobs/Employment", "Guns",
    "Racial Issues", "Foreign Policy/National Security", "LGBT Issues",
    "Ethics", "Education", "Financial Regulation", "Budget/Taxation",
    "Veterans", "Campaign Finance", "Surveillance/Privacy", "Drugs",
    "Justice", "Abortion", "Immigration", "Trade", "Health Care",
    "Economy", "Other",
)
SENTIMENT_LABELS = ("positive", "negative", "neutral")

TOPIC_TASK = "topic"
SENTIMENT_TASK = "sentiment"


def topic_slug(label: str) -> str:
    """File-name form of a topic label ('Health Care' -> 'health_care')."""
    return label.lower().replace("/", "_").replace(" ", "_").replace("-", "_")


def tokenize_words(text: str) -> list[str]:
    """Tweet tokens, truncated to the 50-word input limit."""
    return tokenizer.tokenize(text)[:MAX_WORDS]


@dataclass(frozen=True)
class TSNetConfig:
    embedding_dim: int
    penultimate_size: int
    num_classes: int
    max_words: int = MAX_WORDS
    window_sizes: tuple[int, ...] = (2, 3, 4)
    filters_per_window: int = 200
    dropout_rate: float = 0.5

    def __post_init__(self):
        if self.embedding_dim < 1 or self.penultimate_size < 1:
            raise ConfigError("embedding and penultimate sizes must be >= 1")
        if self.num_classes < 2:
            raise ConfigError(f"need at least 2 classes, got {self.num_classes}")
        if not self.window_sizes or len(set(self.window_sizes)) != len(self.window_sizes):
            raise ConfigError(f"window sizes must be distinct, got {self.window_sizes}")
        if min(self.window_sizes) < 1 or max(self.window_sizes) > self.max_words:
            raise ConfigError(f"window sizes {self.window_sizes} do not fit "
                              f"{self.max_words} words")
        if self.filters_per_window < 1:
            raise ConfigError("filter count must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0, 1), got {self.dropout_rate}")

    @property
    def concat_size(self) -> int:
        return self.filters_per_window * len(self.window_sizes)


def topic_config() -> TSNetConfig:
    return TSNetConfig(embedding_dim=300, penultimate_size=256,
                       num_classes=len(TOPIC_LABELS))


def sentiment_config() -> TSNetConfig:
    return TSNetConfig(embedding_dim=200, penultimate_size=128,
                       num_classes=len(SENTIMENT_LABELS))


class TSVocab:
    """Word vocabulary with reserved out-of-vocabulary and PAD rows."""

    def __init__(self, terms):
        self.terms = tuple(terms)
        if not self.terms:
            raise DatasetError("word vocabulary is empty")
        self.index = {t: i for i, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise DatasetError("word vocabulary contains duplicates")
        self.oov_index = len(self.terms)
        self.pad_index = len(self.terms) + 1

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def num_rows(self) -> int:
        return len(self.terms) + 2

    def lookup(self, token: str) -> int:
        return self.index.get(token, self.oov_index)

    @classmethod
    def from_token_lists(cls, token_lists) -> "TSVocab":
        vocab = embeddings.build_vocab(token_lists, min_count=1)
        return cls(vocab.terms)

    @classmethod
    def from_texts(cls, texts) -> "TSVocab":
        return cls.from_token_lists(tokenize_words(t) for t in texts)


@dataclass
class TSNet:
    config: TSNetConfig
    task: str
    labels: tuple[str, ...]
    fallback_class: int
    vocab: TSVocab
    params: dict[str, np.ndarray]


def build_ts_net(config: TSNetConfig, labels, vocab: TSVocab, task: str,
                 seed: int = 0, fallback_class: int | None = None) -> TSNet:
    """Randomly initialized net. ``fallback_class`` is the class assigned
    to empty inputs; it defaults to the last label (Other / neutral)."""
    labels = tuple(labels)
    if len(labels) != config.num_classes:
        raise ConfigError(
            f"{len(labels)} labels for a {config.num_classes}-class config")
    if len(set(labels)) != len(labels):
        raise ConfigError("labels must be unique")
    if fallback_class is None:
        fallback_class = len(labels) - 1
    if not 0 <= fallback_class < len(labels):
        raise ConfigError(f"fallback class {fallback_class} out of range")

    rng = np.random.default_rng(seed)
    d = config.embedding_dim
    f = config.filters_per_window
    params: dict[str, np.ndarray] = {
        "embed": rng.uniform(-0.25, 0.25, size=(vocab.num_rows, d)),
    }
    for l in config.window_sizes:
        width = l * d
        limit = np.sqrt(6.0 / (width + f))
        params[f"conv{l}.w"] = rng.uniform(-limit, limit, size=(f, width))
        params[f"conv{l}.b"] = np.zeros(f)
    limit = np.sqrt(6.0 / (config.concat_size + config.penultimate_size))
    params["compress.w"] = rng.uniform(
        -limit, limit, size=(config.penultimate_size, config.concat_size))
    params["compress.b"] = np.zeros(config.penultimate_size)
    limit = np.sqrt(6.0 / (config.penultimate_size + config.num_classes))
    params["out.w"] = rng.uniform(
        -limit, limit, size=(config.num_classes, config.penultimate_size))
    params["out.b"] = np.zeros(config.num_classes)
    return TSNet(config=config, task=task, labels=labels,
                 fallback_class=fallback_class, vocab=vocab, params=params)


def _token_indices(net: TSNet, tokens) -> np.ndarray:
    """Embedding row indices, PAD-extended to at least the widest window."""
    idx = [net.vocab.lookup(t) for t in tokens[:net.config.max_words]]
    shortfall = max(net.config.window_sizes) - len(idx)
    if shortfall > 0:
        idx.extend([net.vocab.pad_index] * shortfall)
    return np.asarray(idx, dtype=np.int64)


def _forward_example(net: TSNet, idx: np.ndarray, train: bool = False,
                     rng: np.random.Generator | None = None):
    """Forward one example; the cache carries what backward needs."""
    cfg = net.config
    rate = cfg.dropout_rate
    emb = net.params["embed"][idx]
    cache = {"idx": idx, "emb": emb, "branches": {}}
    pooled = []
    for l in cfg.window_sizes:
        pre = kernels.conv1d_batch_forward(
            emb[None], net.params[f"conv{l}.w"], net.params[f"conv{l}.b"], l)[0]
        act = F.relu(pre)
        top = act.argmax(axis=0)
        pooled.append(act[top, np.arange(act.shape[1])])
        cache["branches"][l] = {"pre": pre, "top": top, "rows": act.shape[0]}
    concat = np.concatenate(pooled)
    cache["concat"] = concat
    h_in = concat
    if train and rate > 0.0:
        cache["mask1"] = F.sample_dropout_mask(concat.shape, rate, rng)
        h_in = F.apply_dropout_mask(concat, cache["mask1"], rate)
    cache["h_in"] = h_in
    z_k = net.params["compress.w"] @ h_in + net.params["compress.b"]
    h = F.relu(z_k)
    cache["z_k"] = z_k
    h_out = h
    if train and rate > 0.0:
        cache["mask2"] = F.sample_dropout_mask(h.shape, rate, rng)
        h_out = F.apply_dropout_mask(h, cache["mask2"], rate)
    cache["h_out"] = h_out
    z_out = net.params["out.w"] @ h_out + net.params["out.b"]
    cache["z_out"] = z_out
    return z_out, cache


def _backward_example(net: TSNet, cache, d_z: np.ndarray, grads) -> None:
    """Accumulate one example's gradients (d_z already batch-scaled)."""
    cfg = net.config
    rate = cfg.dropout_rate
    grads["out.w"] += np.outer(d_z, cache["h_out"])
    grads["out.b"] += d_z
    d_h = net.params["out.w"].T @ d_z
    if "mask2" in cache:
        d_h = F.apply_dropout_mask(d_h, cache["mask2"], rate)
    d_zk = d_h * (cache["z_k"] > 0.0)
    grads["compress.w"] += np.outer(d_zk, cache["h_in"])
    grads["compress.b"] += d_zk
    d_concat = net.params["compress.w"].T @ d_zk
    if "mask1" in cache:
        d_concat = F.apply_dropout_mask(d_concat, cache["mask1"], rate)

    d_emb = np.zeros_like(cache["emb"])
    f = cfg.filters_per_window
    for bi, l in enumerate(cfg.window_sizes):
        branch = cache["branches"][l]
        d_pool = d_concat[bi * f:(bi + 1) * f]
        d_act = np.zeros((branch["rows"], f))
        d_act[branch["top"], np.arange(f)] = d_pool
        d_pre = d_act * (branch["pre"] > 0.0)
        d_e, d_w, d_b = kernels.conv1d_batch_backward(
            cache["emb"][None], net.params[f"conv{l}.w"], l, d_pre[None])
        grads[f"conv{l}.w"] += d_w
        grads[f"conv{l}.b"] += d_b
        d_emb += d_e[0]
    np.add.at(grads["embed"], cache["idx"], d_emb)


def forward_ts(net: TSNet, tokens) -> np.ndarray:
    """Class probability vector for a tokenized tweet (inference mode)."""
    tokens = list(tokens)
    if not tokens:
        raise EmptyInputError("cannot classify an empty token list")
    z_out, _ = _forward_example(net, _token_indices(net, tokens))
    return F.softmax(z_out)


def batch_backprop(net: TSNet, index_lists, targets: np.ndarray,
                   rng: np.random.Generator):
    """Mean cross-entropy over a batch plus gradients for every parameter.

    ``targets`` holds one distribution per example (one-hot for training).
    Dropout masks are sampled here, once per example per site, and reused
    in the backward pass.
    """
    batch = len(index_lists)
    if batch == 0:
        raise DatasetError("empty batch")
    grads = {k: np.zeros_like(v) for k, v in net.params.items()}
    total = 0.0
    for idx, p in zip(index_lists, targets):
        z_out, cache = _forward_example(net, idx, train=True, rng=rng)
        q = F.softmax(z_out)
        total += -(p * np.log(np.maximum(q, F.LOG_EPS))).sum()
        _backward_example(net, cache, (q - p) / batch, grads)
    return total / batch, grads


def _resolve_label(net: TSNet, label) -> int:
    if isinstance(label, (int, np.integer)):
        if not 0 <= label < len(net.labels):
            raise DatasetError(f"label index {label} out of range")
        return int(label)
    try:
        return net.labels.index(label)
    except ValueError:
        raise DatasetError(f"unknown label {label!r}") from None


def train_ts(net: TSNet, dataset, epochs: int = 10, batch_size: int = 32,
             learning_rate: float = 0.001, beta1: float = 0.9,
             beta2: float = 0.999, epsilon: float = 1e-8, seed: int = 0,
             oov_rate: float = 0.01, callback=None) -> list[float]:
    """Train in place on (text_or_tokens, label) pairs; returns the
    per-epoch mean loss trace.

    Embeddings are updated jointly with the filters. A small fraction of
    training tokens (``oov_rate``) is replaced by the OOV row each epoch so
    unseen words at inference land on a trained embedding. Examples whose
    text tokenizes to nothing are dropped with a warning.
    """
    if epochs < 1 or batch_size < 1:
        raise ParameterError("epochs and batch size must be >= 1")
    examples = []
    dropped = 0
    for text, label in dataset:
        tokens = tokenize_words(text) if isinstance(text, str) else list(text)
        if not tokens:
            dropped += 1
            continue
        examples.append((_token_indices(net, tokens), _resolve_label(net, label)))
    if dropped:
        warnings.warn(f"dropped {dropped} empty-token training examples")
    if not examples:
        raise DatasetError("no usable training examples")
    present = {label for _, label in examples}
    if len(present) < 2:
        raise DatasetError("training data must contain at least 2 classes")

    rng = np.random.default_rng(seed)
    state = adam_opt.init_adam(net.params, learning_rate=learning_rate,
                               beta1=beta1, beta2=beta2, epsilon=epsilon)
    eye = np.eye(net.config.num_classes)
    n = len(examples)
    trace: list[float] = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            chunk = order[start:start + batch_size]
            index_lists = []
            targets = np.empty((len(chunk), net.config.num_classes))
            for row, ex in enumerate(chunk):
                idx, label = examples[ex]
                if oov_rate > 0.0:
                    drop = (rng.random(idx.shape) < oov_rate) & (idx < len(net.vocab))
                    if drop.any():
                        idx = np.where(drop, net.vocab.oov_index, idx)
                index_lists.append(idx)
                targets[row] = eye[label]
            loss, grads = batch_backprop(net, index_lists, targets, rng)
            adam_opt.adam_step(net.params, grads, state)
            total += loss * len(chunk)
        mean_loss = total / n
        trace.append(mean_loss)
        if callback is not None and callback(epoch, mean_loss, net):
            break
    return trace


def predict(net: TSNet, text: str):
    """(label, probability vector) for one raw text. Empty inputs fall
    back to the designated class with a uniform distribution; exact ties
    resolve to the lowest class index."""
    tokens = tokenize_words(text)
    if not tokens:
        uniform = np.full(net.config.num_classes, 1.0 / net.config.num_classes)
        return net.labels[net.fallback_class], uniform
    probs = forward_ts(net, tokens)
    return net.labels[int(np.argmax(probs))], probs


def top_terms_per_class(net: TSNet, label, k: int = 10) -> list[tuple[str, float]]:
    """Vocabulary terms ranked by the class probability they receive when
    fed alone; the class's most characteristic words after training."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    cls = _resolve_label(net, label)
    scores = np.empty(len(net.vocab.terms))
    for i, term in enumerate(net.vocab.terms):
        scores[i] = forward_ts(net, [term])[cls]
    order = np.lexsort((np.arange(len(scores)), -scores))
    return [(net.vocab.terms[i], float(scores[i])) for i in order[:k]]
