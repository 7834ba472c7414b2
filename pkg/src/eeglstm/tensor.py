"""Dense float64 array math underneath every layer.

A Matrix is a 2-D row-major float64 numpy array, a Vector is 1-D. All
functions are pure and deterministic: identical inputs produce bit-identical
outputs on one platform.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

__all__ = ["matmul", "matvec", "add", "sub", "mul", "scale", "sigmoid", "tanh"]


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def matmul(a, b) -> np.ndarray:
    """Product of an (m, k) matrix and a (k, n) matrix."""
    a, b = _as_array(a), _as_array(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return a @ b


def matvec(a, v) -> np.ndarray:
    """Product of an (m, k) matrix and a length-k vector."""
    a, v = _as_array(a), _as_array(v)
    if a.ndim != 2 or v.ndim != 1:
        raise ShapeError(f"matvec expects a matrix and a vector, got {a.shape} and {v.shape}")
    if a.shape[1] != v.shape[0]:
        raise ShapeError(f"matvec: cannot multiply {a.shape} by {v.shape}")
    return a @ v


def _binary(op, a, b) -> np.ndarray:
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise ShapeError(f"elementwise op needs identical shapes, got {a.shape} and {b.shape}")
    return op(a, b)


def add(a, b) -> np.ndarray:
    return _binary(np.add, a, b)


def sub(a, b) -> np.ndarray:
    return _binary(np.subtract, a, b)


def mul(a, b) -> np.ndarray:
    return _binary(np.multiply, a, b)


def scale(a, s: float) -> np.ndarray:
    return _as_array(a) * float(s)


def sigmoid(x) -> np.ndarray:
    """Logistic function 1/(1+e^-x), computed so large |x| never overflows."""
    x = _as_array(x)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0, e) / (1.0 + e)


def tanh(x) -> np.ndarray:
    return np.tanh(_as_array(x))
