"""Dependency-light numerical core: layers, losses, backprop, Adam."""

from ballotbeat.nn.adam import AdamState, adam_step, init_adam
from ballotbeat.nn.functional import (
    bce_loss,
    conv1d_forward,
    cross_entropy_loss,
    dense_forward,
    dropout_apply,
    max_over_time,
    maxpool1d,
    softmax,
)
from ballotbeat.nn.network import (
    ConvLayerSpec,
    DenseLayerSpec,
    backprop,
    conv_output_rows,
    forward,
    init_params,
)

__all__ = [
    "AdamState", "adam_step", "init_adam",
    "bce_loss", "conv1d_forward", "cross_entropy_loss", "dense_forward",
    "dropout_apply", "max_over_time", "maxpool1d", "softmax",
    "ConvLayerSpec", "DenseLayerSpec", "backprop", "conv_output_rows",
    "forward", "init_params",
]
