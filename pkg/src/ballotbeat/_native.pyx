# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the hot loops.

Two families live here: the im2col/col2im halves of the 1-d convolution
(the matmul itself stays on BLAS via numpy) and the per-pair skip-gram
hierarchical-softmax update, which is dominated by Python overhead in the
NumPy fallback. Both mirror the NumPy twins' semantics exactly; see
ballotbeat.nn.kernels_numpy and ballotbeat.embeddings.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


cdef void _fill_cols(const double[:, :, ::1] xb, double[:, ::1] cols,
                     Py_ssize_t window) noexcept nogil:
    cdef Py_ssize_t batch = xb.shape[0], n = xb.shape[1], channels = xb.shape[2]
    cdef Py_ssize_t m = n - window + 1
    cdef Py_ssize_t b, i, j, c, row
    for b in range(batch):
        for i in range(m):
            row = b * m + i
            for j in range(window):
                for c in range(channels):
                    cols[row, j * channels + c] = xb[b, i + j, c]


def conv1d_batch_forward(const double[:, :, ::1] xb, const double[:, ::1] weights,
                         const double[::1] bias, Py_ssize_t window):
    """Pre-activation feature maps for a batch: (B, n, C) -> (B, n-window+1, f)."""
    cdef Py_ssize_t batch = xb.shape[0], n = xb.shape[1], channels = xb.shape[2]
    cdef Py_ssize_t m = n - window + 1
    cols_arr = np.empty((batch * m, window * channels), dtype=np.float64)
    cdef double[:, ::1] cols = cols_arr
    with nogil:
        _fill_cols(xb, cols, window)
    out = cols_arr @ np.asarray(weights).T
    out += np.asarray(bias)
    return out.reshape(batch, m, weights.shape[0])


def conv1d_batch_backward(const double[:, :, ::1] xb, const double[:, ::1] weights,
                          Py_ssize_t window, const double[:, :, ::1] d_pre):
    """Gradients of a scalar loss wrt input, weights, and bias."""
    cdef Py_ssize_t batch = xb.shape[0], n = xb.shape[1], channels = xb.shape[2]
    cdef Py_ssize_t m = n - window + 1
    cdef Py_ssize_t filters = weights.shape[0]
    cols_arr = np.empty((batch * m, window * channels), dtype=np.float64)
    cdef double[:, ::1] cols = cols_arr
    with nogil:
        _fill_cols(xb, cols, window)
    d_flat = np.asarray(d_pre).reshape(batch * m, filters)
    d_weights = d_flat.T @ cols_arr
    d_bias = d_flat.sum(axis=0)
    d_cols_arr = d_flat @ np.asarray(weights)
    d_x_arr = np.zeros((batch, n, channels), dtype=np.float64)
    cdef double[:, ::1] d_cols = d_cols_arr
    cdef double[:, :, ::1] d_x = d_x_arr
    cdef Py_ssize_t b, i, j, c, row
    with nogil:
        for b in range(batch):
            for i in range(m):
                row = b * m + i
                for j in range(window):
                    for c in range(channels):
                        d_x[b, i + j, c] += d_cols[row, j * channels + c]
    return d_x_arr, d_weights, d_bias


cdef inline double _sigmoid(double x) noexcept nogil:
    if x > 30.0:
        x = 30.0
    elif x < -30.0:
        x = -30.0
    return 1.0 / (1.0 + exp(-x))


def sg_train_epoch(double[:, ::1] vectors, double[:, ::1] node_vectors,
                   list sentences, Py_ssize_t window,
                   const cnp.int32_t[::1] points_flat,
                   const cnp.uint8_t[::1] codes_flat,
                   const cnp.int64_t[::1] path_offsets,
                   double alpha_start, double alpha_end,
                   long long pairs_done, long long pairs_total):
    """One skip-gram pass over the corpus with hierarchical softmax.

    For every (center, context) pair inside the window the context word's
    Huffman path is trained against the center word's input vector, with a
    learning rate decayed linearly over the whole training run. Updates
    and iteration order match the NumPy fallback pair for pair.
    """
    cdef Py_ssize_t dim = vectors.shape[1]
    neu1e_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] neu1e = neu1e_arr
    cdef const cnp.int32_t[::1] sent
    cdef Py_ssize_t length, pos, off, p2, d
    cdef cnp.int64_t node_i, start, stop
    cdef cnp.int32_t center, target, node
    cdef double alpha, dot, fa, g
    cdef double span = alpha_end - alpha_start

    for sentence in sentences:
        sent = sentence
        length = sent.shape[0]
        with nogil:
            for pos in range(length):
                center = sent[pos]
                for off in range(-window, window + 1):
                    if off == 0:
                        continue
                    p2 = pos + off
                    if p2 < 0 or p2 >= length:
                        continue
                    target = sent[p2]
                    alpha = alpha_start + span * (<double>pairs_done / <double>pairs_total)
                    start = path_offsets[target]
                    stop = path_offsets[target + 1]
                    for d in range(dim):
                        neu1e[d] = 0.0
                    for node_i in range(start, stop):
                        node = points_flat[node_i]
                        dot = 0.0
                        for d in range(dim):
                            dot += vectors[center, d] * node_vectors[node, d]
                        fa = _sigmoid(dot)
                        g = ((1.0 - <double>codes_flat[node_i]) - fa) * alpha
                        for d in range(dim):
                            neu1e[d] += g * node_vectors[node, d]
                        for d in range(dim):
                            node_vectors[node, d] += g * vectors[center, d]
                    for d in range(dim):
                        vectors[center, d] += neu1e[d]
                    pairs_done += 1
    return pairs_done
