"""Forward operations and losses shared by both convolutional classifiers.

Everything runs in float64. Single-example operations are thin wrappers
over their batched twins so the two code paths cannot drift apart.
"""

import numpy as np

from ballotbeat.errors import ParameterError, ShapeError
from ballotbeat.nn import kernels

#: Probabilities are clamped to [LOG_EPS, 1-LOG_EPS] before any log().
LOG_EPS = 1e-7


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


def _as_matrix(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ShapeError(f"{name} must be 2-d, got shape {x.shape}")
    return x


def infer_window(weights: np.ndarray, in_channels: int) -> int:
    """Window length implied by a (filters, window*channels) filter bank."""
    if weights.ndim != 2:
        raise ShapeError(f"filter bank must be 2-d, got shape {weights.shape}")
    if in_channels < 1 or weights.shape[1] % in_channels:
        raise ShapeError(
            f"filter width {weights.shape[1]} is not a multiple of "
            f"{in_channels} input channels")
    return weights.shape[1] // in_channels


def conv1d_forward(x, weights, bias, activation: str = "relu") -> np.ndarray:
    """Valid 1-d convolution, stride 1, rectified by default.

    ``x`` is (seq_len, in_channels), ``weights`` is
    (filters, window*in_channels), ``bias`` is (filters,). The
    ``activation="identity"`` hook exists for linearity tests only.
    """
    if activation not in ("relu", "identity"):
        raise ParameterError(f"unknown conv activation {activation!r}")
    x = _as_matrix(x, "conv input")
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    window = infer_window(weights, x.shape[1])
    if x.shape[0] < window:
        raise ShapeError(
            f"input has {x.shape[0]} rows but the filter window spans {window}")
    pre = kernels.conv1d_batch_forward(x[None], weights, bias, window)[0]
    return relu(pre) if activation == "relu" else pre


def conv1d_backward(x, weights, window: int, d_pre):
    """Backward pass of the pre-activation convolution (single example)."""
    x = _as_matrix(x, "conv input")
    d_x, d_w, d_b = kernels.conv1d_batch_backward(
        x[None], np.asarray(weights, dtype=np.float64), window,
        np.asarray(d_pre, dtype=np.float64)[None])
    return d_x[0], d_w, d_b


def maxpool1d_batch(xb: np.ndarray, pool: int):
    """Non-overlapping max pooling over rows; remainder rows are dropped.

    Returns the pooled maps and the within-window argmax offsets needed to
    route gradients back.
    """
    batch, m, f = xb.shape
    k = m // pool
    windows = xb[:, :k * pool, :].reshape(batch, k, pool, f)
    idx = windows.argmax(axis=2)
    pooled = np.take_along_axis(windows, idx[:, :, None, :], axis=2)[:, :, 0, :]
    return pooled, idx


def maxpool1d_batch_backward(shape, pool: int, idx: np.ndarray, d_out: np.ndarray):
    batch, m, f = shape
    k = m // pool
    d_windows = np.zeros((batch, k, pool, f), dtype=np.float64)
    np.put_along_axis(d_windows, idx[:, :, None, :], d_out[:, :, None, :], axis=2)
    d_x = np.zeros(shape, dtype=np.float64)
    d_x[:, :k * pool, :] = d_windows.reshape(batch, k * pool, f)
    return d_x


def maxpool1d(x, pool: int) -> np.ndarray:
    """Max over disjoint windows of ``pool`` rows, one column at a time."""
    if pool < 1:
        raise ParameterError(f"pool size must be >= 1, got {pool}")
    x = _as_matrix(x, "pool input")
    if x.shape[0] < pool:
        raise ShapeError(f"cannot pool {x.shape[0]} rows with window {pool}")
    return maxpool1d_batch(x[None], pool)[0][0]


def max_over_time(x) -> np.ndarray:
    """Collapse a feature map to one value per column (its maximum)."""
    x = _as_matrix(x, "feature map")
    if x.shape[0] < 1:
        raise ShapeError("max-over-time needs at least one row")
    return x.max(axis=0)


def max_over_time_backward(x: np.ndarray, d_out: np.ndarray) -> np.ndarray:
    """Route gradient to the first maximal row of each column."""
    d_x = np.zeros_like(x)
    d_x[x.argmax(axis=0), np.arange(x.shape[1])] = d_out
    return d_x


ACTIVATIONS = ("relu", "sigmoid", "softmax", "none")


def apply_activation(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return relu(z)
    if activation == "sigmoid":
        return sigmoid(z)
    if activation == "softmax":
        return softmax_rows(z) if z.ndim == 2 else softmax(z)
    if activation == "none":
        return z
    raise ParameterError(f"unknown activation {activation!r}")


def dense_forward(x, spec, weights, bias) -> np.ndarray:
    """Affine map plus the spec's activation. Dropout is a training-time
    concern and never applies here."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != spec.in_size:
        raise ShapeError(
            f"dense input has length {x.shape[0] if x.ndim == 1 else x.shape}, "
            f"spec expects {spec.in_size}")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (spec.out_size, spec.in_size):
        raise ShapeError(
            f"dense weights have shape {weights.shape}, spec expects "
            f"({spec.out_size}, {spec.in_size})")
    return apply_activation(weights @ x + np.asarray(bias, dtype=np.float64),
                            spec.activation)


def softmax(logits) -> np.ndarray:
    """Numerically stable softmax (max-subtracted)."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1 or logits.size == 0:
        raise ShapeError("softmax expects a nonempty vector")
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)


def sample_dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    return (rng.random(shape) >= rate).astype(np.float64)


def apply_dropout_mask(x: np.ndarray, mask: np.ndarray, rate: float) -> np.ndarray:
    """Inverted dropout: survivors are rescaled so inference is identity."""
    return x * mask / (1.0 - rate)


def dropout_apply(x, rate: float, mode: str, rng: np.random.Generator | None = None) -> np.ndarray:
    """Inverted dropout. Train mode zeroes each unit with probability
    ``rate`` and rescales survivors by 1/(1-rate); inference is identity."""
    if not 0.0 <= rate < 1.0:
        raise ParameterError(f"dropout rate must be in [0, 1), got {rate}")
    if mode not in ("train", "inference"):
        raise ParameterError(f"dropout mode must be 'train' or 'inference', got {mode!r}")
    x = np.asarray(x, dtype=np.float64)
    if mode == "inference" or rate == 0.0:
        return x.copy()
    if rng is None:
        rng = np.random.default_rng()
    return apply_dropout_mask(x, sample_dropout_mask(x.shape, rate, rng), rate)


def bce_loss(predicted: float, target) -> float:
    """Binary cross-entropy of one prediction against a 0/1 target."""
    if target not in (0, 1):
        raise ParameterError(f"binary target must be 0 or 1, got {target!r}")
    o = min(max(float(predicted), LOG_EPS), 1.0 - LOG_EPS)
    t = float(target)
    return -(t * np.log(o) + (1.0 - t) * np.log(1.0 - o))


def cross_entropy_loss(true_dist, predicted) -> float:
    """Cross-entropy -sum p(x) log q(x); equals -log q(true class) for
    one-hot p. Predicted entries are clamped away from zero."""
    p = np.asarray(true_dist, dtype=np.float64)
    q = np.asarray(predicted, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ShapeError(
            f"distribution lengths differ: {p.shape} vs {q.shape}")
    return float(-(p * np.log(np.maximum(q, LOG_EPS))).sum())
