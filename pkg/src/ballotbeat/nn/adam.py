"""Adam optimizer with bias-corrected first and second moments."""

from dataclasses import dataclass, field

import numpy as np

from ballotbeat.errors import NumericalError, ParameterError, ShapeError


@dataclass
class AdamState:
    """Optimizer state for one named parameter set.

    Moments mirror the parameter dict shape for shape; ``step_count`` is
    the number of updates applied so far.
    """

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ParameterError(
                f"betas must be in [0, 1), got {self.beta1}, {self.beta2}")
        if self.epsilon <= 0.0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")
        if self.step_count < 0:
            raise ParameterError(f"step count must be >= 0, got {self.step_count}")


def init_adam(params: dict[str, np.ndarray], learning_rate: float = 0.001,
              beta1: float = 0.9, beta2: float = 0.999,
              epsilon: float = 1e-8) -> AdamState:
    """Fresh state with zero moments shaped like ``params``."""
    return AdamState(
        learning_rate=learning_rate, beta1=beta1, beta2=beta2, epsilon=epsilon,
        first_moment={k: np.zeros_like(v) for k, v in params.items()},
        second_moment={k: np.zeros_like(v) for k, v in params.items()})


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState):
    """One bias-corrected Adam update, applied in place.

    Raises if gradient shapes do not mirror the parameters or if the
    update produces a non-finite value.
    """
    if set(grads) != set(params):
        raise ShapeError(
            f"gradient keys {sorted(grads)} do not match parameters {sorted(params)}")
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name, theta in params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ShapeError(
                f"gradient for {name} has shape {g.shape}, parameter has {theta.shape}")
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        theta -= state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
        if not np.isfinite(theta).all():
            raise NumericalError(f"parameter {name} became non-finite during training")
    return params, state
