"""NumPy twins of the compiled convolution kernels.

Valid 1-d convolution, stride 1, no padding, computed as im2col plus one
BLAS matmul. Filters are stored as (filters, window*channels) with the
window axis major, so row i of the unrolled input is the flattened
window starting at position i.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _im2col(xb: np.ndarray, window: int) -> np.ndarray:
    batch, n, channels = xb.shape
    m = n - window + 1
    # sliding_window_view yields (B, m, C, window); filters expect window-major rows
    cols = sliding_window_view(xb, window, axis=1).transpose(0, 1, 3, 2)
    return np.ascontiguousarray(cols).reshape(batch * m, window * channels)


def conv1d_batch_forward(xb: np.ndarray, weights: np.ndarray, bias: np.ndarray,
                         window: int) -> np.ndarray:
    """Pre-activation feature maps for a batch: (B, n, C) -> (B, n-window+1, f)."""
    batch, n, _ = xb.shape
    m = n - window + 1
    out = _im2col(xb, window) @ weights.T
    out += bias
    return out.reshape(batch, m, weights.shape[0])


def conv1d_batch_backward(xb: np.ndarray, weights: np.ndarray, window: int,
                          d_pre: np.ndarray):
    """Gradients of a scalar loss wrt input, weights, and bias.

    ``d_pre`` is the loss gradient at the pre-activation feature maps.
    """
    batch, n, channels = xb.shape
    m = n - window + 1
    filters = weights.shape[0]
    cols = _im2col(xb, window)
    d_flat = d_pre.reshape(batch * m, filters)
    d_weights = d_flat.T @ cols
    d_bias = d_flat.sum(axis=0)
    d_cols = (d_flat @ weights).reshape(batch, m, window, channels)
    d_x = np.zeros_like(xb)
    for j in range(window):
        d_x[:, j:j + m, :] += d_cols[:, :, j, :]
    return d_x, d_weights, d_bias
