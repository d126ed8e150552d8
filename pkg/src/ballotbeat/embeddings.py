"""Continuous skip-gram word embeddings with hierarchical softmax.

The model maximizes the average log-probability of context words within a
±window of each center word, with the context-word probability factored
over a Huffman-coded binary tree: one sigmoid decision per internal node,
so a full softmax over the vocabulary is never materialized.

The per-pair training update has a compiled kernel
(:mod:`ballotbeat._native`) and a NumPy fallback below; whichever imported
is used. Both are deterministic for a fixed seed, but they are not
bit-identical to each other (floating-point summation order differs).
"""

import heapq
import warnings
from dataclasses import dataclass, field

import numpy as np

from ballotbeat import backend
from ballotbeat.errors import (
    DatasetError,
    ParameterError,
    UndefinedSimilarityError,
    VocabLookupError,
)

_native = backend.native_module()


@dataclass(frozen=True)
class Vocab:
    """Terms ordered by descending frequency, ties broken lexicographically."""

    terms: tuple[str, ...]
    freqs: tuple[int, ...]
    min_count: int
    index: dict[str, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def index_of(self, term: str) -> int:
        try:
            return self.index[term]
        except KeyError:
            raise VocabLookupError(f"term {term!r} is not in the vocabulary") from None


def build_vocab(corpus, min_count: int = 1) -> Vocab:
    """Count tokens across a corpus of token sequences and keep those with
    frequency >= min_count."""
    counts: dict[str, int] = {}
    for sentence in corpus:
        for token in sentence:
            counts[token] = counts.get(token, 0) + 1
    if not counts:
        raise DatasetError("corpus contains no tokens")
    kept = sorted((t for t, c in counts.items() if c >= min_count),
                  key=lambda t: (-counts[t], t))
    if len(kept) < 2:
        raise DatasetError(
            f"vocabulary needs at least 2 terms, got {len(kept)} after "
            f"min_count={min_count}")
    return Vocab(terms=tuple(kept), freqs=tuple(counts[t] for t in kept),
                 min_count=min_count, index={t: i for i, t in enumerate(kept)})


@dataclass
class HuffmanTree:
    """Root-to-leaf paths for every vocab word over a Huffman coding.

    ``points[w]`` lists the internal-node ids on the path (root first) and
    ``codes[w]`` the branch taken at each of them (0/1). Flattened copies
    feed the compiled kernel.
    """

    points: list[np.ndarray]
    codes: list[np.ndarray]
    num_internal: int
    points_flat: np.ndarray = field(repr=False, default=None)
    codes_flat: np.ndarray = field(repr=False, default=None)
    path_offsets: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.points_flat is None:
            self.points_flat = np.concatenate(self.points).astype(np.int32)
            self.codes_flat = np.concatenate(self.codes).astype(np.uint8)
            lengths = [0] + [len(p) for p in self.points]
            self.path_offsets = np.cumsum(lengths).astype(np.int64)


def build_huffman(vocab: Vocab) -> HuffmanTree:
    """Huffman coding over term frequencies; ties break on node id, so the
    tree is identical across runs for the same vocabulary."""
    size = len(vocab)
    if size < 2:
        raise ParameterError(f"a Huffman tree needs at least 2 leaves, got {size}")
    # heap entries: (frequency, node id); leaves use their vocab index and
    # internal nodes use size+k in creation order
    heap = [(f, i) for i, f in enumerate(vocab.freqs)]
    heapq.heapify(heap)
    children: dict[int, tuple[int, int]] = {}
    for k in range(size - 1):
        f1, n1 = heapq.heappop(heap)
        f2, n2 = heapq.heappop(heap)
        node = size + k
        children[node] = (n1, n2)  # branch 0 to the first-popped child
        heapq.heappush(heap, (f1 + f2, node))
    root = heap[0][1]

    points = [None] * size
    codes = [None] * size
    stack = [(root, [], [])]
    while stack:
        node, path, bits = stack.pop()
        if node < size:
            points[node] = np.array(path, dtype=np.int32)
            codes[node] = np.array(bits, dtype=np.uint8)
        else:
            internal = node - size
            left, right = children[node]
            stack.append((left, path + [internal], bits + [0]))
            stack.append((right, path + [internal], bits + [1]))
    return HuffmanTree(points=points, codes=codes, num_internal=size - 1)


@dataclass
class SkipGramModel:
    vocab: Vocab
    input_vectors: np.ndarray   # (|V|, dim) float64
    node_vectors: np.ndarray    # (|V|-1, dim) float64, one per internal node
    tree: HuffmanTree
    window: int
    dim: int

    def vector(self, term: str) -> np.ndarray:
        return self.input_vectors[self.vocab.index_of(term)]


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


def hs_probability(model: SkipGramModel, center: str, target: str) -> float:
    """p(target | center) under the hierarchical softmax: the product of
    one sigmoid per internal node on the target's path, with the sign of
    the activation set by the branch code. Sums to 1 over all targets."""
    ci = model.vocab.index_of(center)
    ti = model.vocab.index_of(target)
    x = model.node_vectors[model.tree.points[ti]] @ model.input_vectors[ci]
    signs = 1.0 - 2.0 * model.tree.codes[ti].astype(np.float64)
    return float(np.prod(_sigmoid(signs * x)))


def hs_log_probability(model: SkipGramModel, center_idx: int, target_idx: int) -> float:
    x = model.node_vectors[model.tree.points[target_idx]] @ model.input_vectors[center_idx]
    signs = 1.0 - 2.0 * model.tree.codes[target_idx].astype(np.float64)
    # log sigmoid(z) = -log1p(exp(-z)), stable on both tails
    z = signs * x
    return float(-np.logaddexp(0.0, -z).sum())


def _iter_pairs(sentence: np.ndarray, window: int):
    length = len(sentence)
    for pos in range(length):
        lo = max(0, pos - window)
        hi = min(length, pos + window + 1)
        for p2 in range(lo, hi):
            if p2 != pos:
                yield int(sentence[pos]), int(sentence[p2])


def _count_pairs(sentences, window: int) -> int:
    total = 0
    for sent in sentences:
        length = len(sent)
        for pos in range(length):
            total += min(length, pos + window + 1) - max(0, pos - window) - 1
    return total


def _sg_train_epoch_numpy(vectors, node_vectors, sentences, window, tree,
                          alpha_start, alpha_end, pairs_done, pairs_total):
    """Pure-NumPy twin of the compiled skip-gram epoch (20-80x slower)."""
    span = alpha_end - alpha_start
    for sent in sentences:
        for center, target in _iter_pairs(sent, window):
            alpha = alpha_start + span * (pairs_done / pairs_total)
            pts = tree.points[target]
            l1 = vectors[center]
            l2 = node_vectors[pts]
            fa = _sigmoid(l2 @ l1)
            g = ((1.0 - tree.codes[target]) - fa) * alpha
            neu1e = g @ l2
            node_vectors[pts] += np.outer(g, l1)
            vectors[center] += neu1e
            pairs_done += 1
    return pairs_done


def train_skipgram(corpus, window: int = 5, dim: int = 100, epochs: int = 5,
                   learning_rate: float = 0.025, min_count: int = 1,
                   seed: int = 0) -> SkipGramModel:
    """Train skip-gram embeddings on a corpus of token sequences.

    Stochastic gradient ascent over all (center, context) pairs from
    sliding windows, in corpus order, with the learning rate decayed
    linearly to 1% of its starting value across the whole run. Input
    vectors start uniform in [-0.5/dim, 0.5/dim]; node vectors start at
    zero. Deterministic for a fixed seed.
    """
    if window < 1:
        raise ParameterError(f"context window must be >= 1, got {window}")
    if dim < 2:
        raise ParameterError(f"embedding dimension must be >= 2, got {dim}")
    if epochs < 1:
        raise ParameterError(f"epochs must be >= 1, got {epochs}")
    corpus = [list(sentence) for sentence in corpus]  # may be a generator
    vocab = build_vocab(corpus, min_count=min_count)
    tree = build_huffman(vocab)
    rng = np.random.default_rng(seed)
    vectors = (rng.random((len(vocab), dim)) - 0.5) / dim
    node_vectors = np.zeros((len(vocab) - 1, dim))

    sentences = []
    for sentence in corpus:
        idx = [vocab.index[t] for t in sentence if t in vocab.index]
        if idx:
            sentences.append(np.array(idx, dtype=np.int32))

    pairs_per_epoch = _count_pairs(sentences, window)
    model = SkipGramModel(vocab=vocab, input_vectors=vectors,
                          node_vectors=node_vectors, tree=tree,
                          window=window, dim=dim)
    if pairs_per_epoch == 0:
        warnings.warn("corpus yields no training pairs; embeddings stay at "
                      "their random initialization")
        return model

    pairs_total = pairs_per_epoch * epochs
    alpha_end = learning_rate / 100.0
    pairs_done = 0
    for _ in range(epochs):
        if _native is not None:
            pairs_done = _native.sg_train_epoch(
                vectors, node_vectors, sentences, window,
                tree.points_flat, tree.codes_flat, tree.path_offsets,
                learning_rate, alpha_end, pairs_done, pairs_total)
        else:
            pairs_done = _sg_train_epoch_numpy(
                vectors, node_vectors, sentences, window, tree,
                learning_rate, alpha_end, pairs_done, pairs_total)
    return model


def corpus_log_likelihood(model: SkipGramModel, corpus) -> float:
    """Mean log-probability of the corpus's (center, context) pairs under
    the model; the quantity training pushes up."""
    total = 0.0
    pairs = 0
    for sentence in corpus:
        idx = np.array([model.vocab.index[t] for t in sentence
                        if t in model.vocab.index], dtype=np.int32)
        for center, target in _iter_pairs(idx, model.window):
            total += hs_log_probability(model, center, target)
            pairs += 1
    if pairs == 0:
        raise DatasetError("corpus yields no (center, context) pairs")
    return total / pairs


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise UndefinedSimilarityError("cosine similarity is undefined for a zero vector")
    return float(a @ b / (na * nb))


def top_k_similar(model: SkipGramModel, term: str, k: int = 10) -> list[tuple[str, float]]:
    """The k vocabulary terms most cosine-similar to ``term`` (itself
    excluded), highest first, ties broken by vocabulary index."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    qi = model.vocab.index_of(term)
    q = model.input_vectors[qi]
    nq = np.linalg.norm(q)
    if nq == 0.0:
        raise UndefinedSimilarityError(f"term {term!r} has a zero vector")
    norms = np.linalg.norm(model.input_vectors, axis=1)
    sims = model.input_vectors @ q
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = np.where(norms > 0.0, sims / (norms * nq), -np.inf)
    sims[qi] = -np.inf
    order = np.lexsort((np.arange(len(sims)), -sims))
    top = order[:min(k, len(model.vocab) - 1)]
    return [(model.vocab.terms[i], float(sims[i])) for i in top]


def export_embeddings_text(model: SkipGramModel, path) -> None:
    """Write one 'term v1 ... vd' line per vocabulary term (UTF-8)."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, term in enumerate(model.vocab.terms):
            values = " ".join(repr(float(v)) for v in model.input_vectors[i])
            fh.write(f"{term} {values}\n")
