"""Sequential forward/backprop engine for conv-then-dense stacks.

This is the training engine behind the character-level election
classifier: a run of convolutional layers (ReLU, optional non-overlapping
max pooling), an implicit flatten, then dense layers with optional
inverted dropout. Gradients are exact analytic gradients of the mean
batch loss; dropout masks are sampled once per batch in the forward pass
and reused in the backward pass.
"""

from dataclasses import dataclass

import numpy as np

from ballotbeat.errors import ParameterError, ShapeError
from ballotbeat.nn import functional as F
from ballotbeat.nn import kernels

LOSS_KINDS = ("bce", "cross_entropy")


@dataclass(frozen=True)
class ConvLayerSpec:
    """Geometry of one 1-d conv layer: window l, f filters, optional
    non-overlapping pool of size p."""

    window: int
    filters: int
    in_channels: int
    pool: int | None = None

    def __post_init__(self):
        if self.window < 1:
            raise ParameterError(f"conv window must be >= 1, got {self.window}")
        if self.filters < 1:
            raise ParameterError(f"filter count must be >= 1, got {self.filters}")
        if self.in_channels < 1:
            raise ParameterError(f"channel count must be >= 1, got {self.in_channels}")
        if self.pool is not None and self.pool < 2:
            raise ParameterError(f"pool size must be >= 2 when present, got {self.pool}")


@dataclass(frozen=True)
class DenseLayerSpec:
    in_size: int
    out_size: int
    activation: str = "none"
    dropout_rate: float = 0.0

    def __post_init__(self):
        if self.in_size < 1 or self.out_size < 1:
            raise ParameterError(
                f"dense sizes must be >= 1, got {self.in_size}->{self.out_size}")
        if self.activation not in F.ACTIVATIONS:
            raise ParameterError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ParameterError(
                f"dropout rate must be in [0, 1), got {self.dropout_rate}")


def split_specs(specs):
    """Partition a spec list into its conv prefix and dense suffix."""
    conv = [s for s in specs if isinstance(s, ConvLayerSpec)]
    dense = [s for s in specs if isinstance(s, DenseLayerSpec)]
    if list(specs) != conv + dense:
        raise ParameterError("conv layers must precede dense layers")
    if not dense:
        raise ParameterError("the stack needs at least one dense layer")
    return conv, dense


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(specs, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Glorot-uniform weights, zero biases, keyed '<kind><i>.w' / '.b'."""
    conv, dense = split_specs(specs)
    params: dict[str, np.ndarray] = {}
    for i, s in enumerate(conv):
        width = s.window * s.in_channels
        params[f"conv{i}.w"] = glorot_uniform(rng, (s.filters, width), width, s.filters)
        params[f"conv{i}.b"] = np.zeros(s.filters)
    for j, s in enumerate(dense):
        params[f"dense{j}.w"] = glorot_uniform(rng, (s.out_size, s.in_size),
                                               s.in_size, s.out_size)
        params[f"dense{j}.b"] = np.zeros(s.out_size)
    return params


def conv_output_rows(conv_specs, rows: int) -> list[int]:
    """Row counts after each conv and pool step, starting with the input."""
    chain = [rows]
    for s in conv_specs:
        rows = rows - s.window + 1
        if rows < 1:
            raise ShapeError(f"window {s.window} does not fit {chain[-1]} rows")
        chain.append(rows)
        if s.pool is not None:
            rows //= s.pool
            if rows < 1:
                raise ShapeError(f"pool {s.pool} empties a {chain[-1]}-row map")
            chain.append(rows)
    return chain


def _forward(params, conv, dense, xb, train, rng):
    caches = {"conv": [], "dense": [], "shapes": [xb.shape]}
    h = xb
    for i, s in enumerate(conv):
        if h.shape[2] != s.in_channels:
            raise ShapeError(
                f"conv{i}: expected {s.in_channels} channels, got {h.shape[2]}")
        if h.shape[1] < s.window:
            raise ShapeError(
                f"conv{i}: window {s.window} does not fit {h.shape[1]} rows")
        pre = kernels.conv1d_batch_forward(h, params[f"conv{i}.w"],
                                           params[f"conv{i}.b"], s.window)
        act = F.relu(pre)
        cache = {"x": h, "pre": pre}
        if s.pool is not None:
            if act.shape[1] < s.pool:
                raise ShapeError(
                    f"conv{i}: pool {s.pool} does not fit {act.shape[1]} rows")
            out, idx = F.maxpool1d_batch(act, s.pool)
            cache.update(act_shape=act.shape, pool_idx=idx)
            h = out
        else:
            h = act
        caches["conv"].append(cache)
        caches["shapes"].append(h.shape)

    flat = h.reshape(h.shape[0], -1)
    caches["flat_shape"] = h.shape
    h = flat
    for j, s in enumerate(dense):
        if h.shape[1] != s.in_size:
            raise ShapeError(
                f"dense{j}: expected input size {s.in_size}, got {h.shape[1]}")
        z = h @ params[f"dense{j}.w"].T + params[f"dense{j}.b"]
        last = j == len(dense) - 1
        # the final activation is fused with the loss during training
        a = z if (train and last) else F.apply_activation(z, s.activation)
        cache = {"x": h, "z": z}
        if train and s.dropout_rate > 0.0 and not last:
            mask = F.sample_dropout_mask(a.shape, s.dropout_rate, rng)
            a = F.apply_dropout_mask(a, mask, s.dropout_rate)
            cache["mask"] = mask
        caches["dense"].append(cache)
        h = a
    return h, caches


def forward(params, specs, xb, train: bool = False,
            rng: np.random.Generator | None = None):
    """Run the stack on a batch (B, rows, channels); returns (out, caches).

    Inference (the default) applies every activation and skips dropout.
    """
    conv, dense = split_specs(specs)
    xb = np.asarray(xb, dtype=np.float64)
    if xb.ndim != 3:
        raise ShapeError(f"batch input must be 3-d, got shape {xb.shape}")
    if train and rng is None:
        rng = np.random.default_rng()
    return _forward(params, conv, dense, xb, train, rng)


def backprop(params, specs, xb, targets, loss: str = "bce",
             rng: np.random.Generator | None = None):
    """Mean batch loss and its exact gradients for every parameter.

    ``loss="bce"`` expects a single sigmoid output unit and 0/1 targets
    of shape (B,); ``loss="cross_entropy"`` expects a softmax output and
    target distributions of shape (B, classes). The returned gradient set
    mirrors the parameter dict key for key and shape for shape.
    """
    if loss not in LOSS_KINDS:
        raise ParameterError(f"unknown loss kind {loss!r}")
    conv, dense = split_specs(specs)
    xb = np.asarray(xb, dtype=np.float64)
    if xb.ndim != 3 or xb.shape[0] < 1:
        raise ShapeError(f"batch input must be 3-d and nonempty, got {xb.shape}")
    targets = np.asarray(targets, dtype=np.float64)
    batch = xb.shape[0]
    if rng is None:
        rng = np.random.default_rng()

    z_out, caches = _forward(params, conv, dense, xb, True, rng)
    final = dense[-1]
    if loss == "bce":
        if final.out_size != 1 or final.activation != "sigmoid":
            raise ParameterError("bce loss needs a single sigmoid output unit")
        if targets.shape != (batch,):
            raise ShapeError(f"targets must have shape ({batch},), got {targets.shape}")
        out = F.sigmoid(z_out[:, 0])
        clamped = np.clip(out, F.LOG_EPS, 1.0 - F.LOG_EPS)
        loss_value = float(np.mean(
            -(targets * np.log(clamped) + (1.0 - targets) * np.log(1.0 - clamped))))
        d_z = ((out - targets) / batch)[:, None]
    else:
        if final.activation != "softmax":
            raise ParameterError("cross-entropy loss needs a softmax output layer")
        if targets.shape != z_out.shape:
            raise ShapeError(
                f"targets must have shape {z_out.shape}, got {targets.shape}")
        q = F.softmax_rows(z_out)
        loss_value = float(np.mean(
            -(targets * np.log(np.maximum(q, F.LOG_EPS))).sum(axis=1)))
        d_z = (q - targets) / batch

    grads: dict[str, np.ndarray] = {}
    d_h = d_z
    for j in range(len(dense) - 1, -1, -1):
        s, cache = dense[j], caches["dense"][j]
        if "mask" in cache:
            d_h = F.apply_dropout_mask(d_h, cache["mask"], s.dropout_rate)
        if j == len(dense) - 1:
            d_zj = d_h  # final activation already folded into the loss
        elif s.activation == "relu":
            d_zj = d_h * (cache["z"] > 0.0)
        elif s.activation == "sigmoid":
            a = F.sigmoid(cache["z"])
            d_zj = d_h * a * (1.0 - a)
        elif s.activation == "none":
            d_zj = d_h
        else:
            raise ParameterError(
                f"dense{j}: activation {s.activation!r} is only valid on the "
                "output layer")
        grads[f"dense{j}.w"] = d_zj.T @ cache["x"]
        grads[f"dense{j}.b"] = d_zj.sum(axis=0)
        d_h = d_zj @ params[f"dense{j}.w"]

    d_conv = d_h.reshape(caches["flat_shape"])
    for i in range(len(conv) - 1, -1, -1):
        s, cache = conv[i], caches["conv"][i]
        if s.pool is not None:
            d_act = F.maxpool1d_batch_backward(cache["act_shape"], s.pool,
                                               cache["pool_idx"], d_conv)
        else:
            d_act = d_conv
        d_pre = d_act * (cache["pre"] > 0.0)
        d_conv, d_w, d_b = kernels.conv1d_batch_backward(
            cache["x"], params[f"conv{i}.w"], s.window, d_pre)
        grads[f"conv{i}.w"] = d_w
        grads[f"conv{i}.b"] = d_b

    return loss_value, grads
