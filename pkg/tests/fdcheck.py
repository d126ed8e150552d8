"""Finite-difference gradient oracle used across the test suite.

Central differences with h=1e-5 on float64; kept deliberately independent
of the analytic backward passes it checks.
"""

import numpy as np

H = 1e-5
#: Relative error is measured against max(|a|, |n|, FLOOR) so that noise
#: on near-zero gradients does not flag false mismatches.
FLOOR = 1e-6


def numerical_gradient(loss_fn, params: dict, h: float = H) -> dict:
    """d loss_fn / d params by central differences.

    ``loss_fn`` takes no arguments and must read the live ``params``
    arrays; entries are perturbed in place and restored.
    """
    grads = {}
    for name, value in params.items():
        grad = np.zeros_like(value)
        flat = value.ravel()
        gflat = grad.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn()
            flat[i] = orig - h
            down = loss_fn()
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * h)
        grads[name] = grad
    return grads


def max_rel_error(analytic: dict, numerical: dict, floor: float = FLOOR) -> float:
    worst = 0.0
    for name in analytic:
        a = analytic[name]
        n = numerical[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst


def numerical_gradient_array(loss_fn, x: np.ndarray, h: float = H) -> np.ndarray:
    """Same oracle for a single array argument perturbed in place."""
    return numerical_gradient(loss_fn, {"x": x}, h)["x"]
