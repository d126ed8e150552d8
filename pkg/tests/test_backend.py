"""Compiled kernels and their NumPy twins must agree numerically."""

import numpy as np
import pytest

from ballotbeat import backend
from ballotbeat.nn import kernels_numpy

native = backend.native_module()
needs_native = pytest.mark.skipif(native is None,
                                  reason="compiled extension not built")


@needs_native
def test_conv_forward_parity(rng):
    xb = rng.standard_normal((5, 30, 11))
    w = rng.standard_normal((7, 4 * 11))
    b = rng.standard_normal(7)
    got = native.conv1d_batch_forward(xb, w, b, 4)
    want = kernels_numpy.conv1d_batch_forward(xb, w, b, 4)
    np.testing.assert_allclose(got, want, atol=1e-12)


@needs_native
def test_conv_backward_parity(rng):
    xb = rng.standard_normal((4, 25, 6))
    w = rng.standard_normal((8, 3 * 6))
    d = rng.standard_normal((4, 23, 8))
    got = native.conv1d_batch_backward(xb, w, 3, d)
    want = kernels_numpy.conv1d_batch_backward(xb, w, 3, d)
    for g, ww in zip(got, want):
        np.testing.assert_allclose(g, ww, atol=1e-10)


@needs_native
def test_skipgram_epoch_parity(rng):
    from ballotbeat import embeddings as E

    corpus = [[f"w{i}" for i in rng.integers(0, 12, rng.integers(3, 8))]
              for _ in range(30)]
    vocab = E.build_vocab(corpus)
    tree = E.build_huffman(vocab)
    sentences = [np.array([vocab.index[t] for t in s if t in vocab.index],
                          dtype=np.int32) for s in corpus]
    pairs = E._count_pairs(sentences, 2)

    init = (np.random.default_rng(3).random((len(vocab), 10)) - 0.5) / 10
    v_native = init.copy()
    n_native = np.zeros((len(vocab) - 1, 10))
    native.sg_train_epoch(v_native, n_native, sentences, 2,
                          tree.points_flat, tree.codes_flat, tree.path_offsets,
                          0.05, 0.0005, 0, pairs)

    v_np = init.copy()
    n_np = np.zeros((len(vocab) - 1, 10))
    E._sg_train_epoch_numpy(v_np, n_np, sentences, 2, tree, 0.05, 0.0005, 0, pairs)

    np.testing.assert_allclose(v_native, v_np, atol=1e-10)
    np.testing.assert_allclose(n_native, n_np, atol=1e-10)


def test_backend_name_reports_something():
    assert backend.backend_name() in ("compiled", "numpy")
