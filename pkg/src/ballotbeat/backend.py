"""Selects the compiled kernel module when available.

The hot loops (1-d convolution forward/backward and the skip-gram
hierarchical-softmax inner loop) exist twice: compiled Cython kernels in
``ballotbeat._native`` and NumPy twins next to their consumers. Whichever
is importable wins; set ``BALLOTBEAT_PURE_PYTHON=1`` to force the NumPy
path (the benchmark suite uses this to compare both).
"""

import os

_native = None
if not os.environ.get("BALLOTBEAT_PURE_PYTHON"):
    try:
        from ballotbeat import _native  # type: ignore[attr-defined]
    except ImportError:
        _native = None

COMPILED = _native is not None


def native_module():
    """The compiled kernel module, or None when running on NumPy."""
    return _native


def backend_name() -> str:
    return "compiled" if COMPILED else "numpy"
