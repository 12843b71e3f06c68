"""Central finite differences, the oracle side of every Jacobian identity."""

from __future__ import annotations

import numpy as np


def central_jacobian(f, x, step: float) -> np.ndarray:
    """Second-order central-difference Jacobian of ``f`` at ``x``.

    ``f`` maps a vector of length n to a vector of length m; the result has
    shape (m, n).  Truncation error is O(step^2) for C^3 maps.
    """
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = step
        cols.append((np.asarray(f(x + e), float) - np.asarray(f(x - e), float)))
    return np.stack(cols, axis=-1) / (2.0 * step)


def central_jacobian_det(f, x, step: float) -> float:
    """Determinant of the central-difference Jacobian (square maps only)."""
    jac = central_jacobian(f, x, step)
    if jac.shape[0] != jac.shape[1]:
        raise ValueError("determinant oracle needs a square Jacobian")
    return float(np.linalg.det(jac))
