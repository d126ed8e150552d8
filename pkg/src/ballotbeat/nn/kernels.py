"""Convolution kernels, compiled when the extension built cleanly."""

import numpy as np

from ballotbeat import backend
from ballotbeat.nn import kernels_numpy

_native = backend.native_module()

if _native is not None:
    def conv1d_batch_forward(xb, weights, bias, window):
        return _native.conv1d_batch_forward(
            np.ascontiguousarray(xb), np.ascontiguousarray(weights),
            np.ascontiguousarray(bias), window)

    def conv1d_batch_backward(xb, weights, window, d_pre):
        return _native.conv1d_batch_backward(
            np.ascontiguousarray(xb), np.ascontiguousarray(weights),
            window, np.ascontiguousarray(d_pre))
else:
    conv1d_batch_forward = kernels_numpy.conv1d_batch_forward
    conv1d_batch_backward = kernels_numpy.conv1d_batch_backward
