"""Binary cross-entropy loss and the Adam optimizer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

# Predicted probabilities are clipped to [PROB_CLIP, 1 - PROB_CLIP] before the
# logs so a saturated output cannot produce an infinite loss.
PROB_CLIP = 1e-7


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters of one training run."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 4
    epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise ValueError(f"decay rates must lie in [0, 1), got {self.beta1}, {self.beta2}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")


def bce_loss(p, y):
    """Binary cross-entropy and its derivative with respect to `p`.

    `p` is clipped to [1e-7, 1 - 1e-7] and the derivative is evaluated at the
    clipped value, so both stay finite. Scalars in, scalars out; arrays are
    processed elementwise.

    Returns (loss, dloss_dp).
    """
    p_arr = np.asarray(p, dtype=np.float64)
    y_arr = np.asarray(y, dtype=np.float64)
    if not np.all((y_arr == 0.0) | (y_arr == 1.0)):
        raise ValueError("labels must be 0 or 1")
    clipped = np.clip(p_arr, PROB_CLIP, 1.0 - PROB_CLIP)
    loss = -(y_arr * np.log(clipped) + (1.0 - y_arr) * np.log1p(-clipped))
    grad = -y_arr / clipped + (1.0 - y_arr) / (1.0 - clipped)
    if p_arr.ndim == 0 and y_arr.ndim == 0:
        return float(loss), float(grad)
    return loss, grad


@dataclass(frozen=True)
class AdamState:
    """First/second moment estimates and the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(params, grads, state: AdamState, cfg: TrainConfig):
    """One Adam update with bias correction.

    t <- t+1; m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2; the step is
    lr * m_hat / (sqrt(v_hat) + eps) with m_hat = m/(1-b1^t), v_hat = v/(1-b2^t).
    Pure: returns (new_params, new_state) and leaves the inputs untouched.
    """
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.ndim != 1 or not (params.shape == grads.shape == state.m.shape == state.v.shape):
        raise ShapeError(
            "adam_step: mismatched lengths "
            f"params={params.shape} grads={grads.shape} m={state.m.shape} v={state.v.shape}"
        )
    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads**2
    m_hat = m / (1.0 - cfg.beta1**t)
    v_hat = v / (1.0 - cfg.beta2**t)
    new_params = params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return new_params, AdamState(m, v, t)
