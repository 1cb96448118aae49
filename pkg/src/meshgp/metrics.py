"""Prediction quality metrics."""

import numpy as np


def relative_error(u_hat, u):
    """Frobenius-norm ratio ``||u_hat - u|| / ||u||``."""
    u_hat = np.asarray(u_hat, dtype=float)
    u = np.asarray(u, dtype=float)
    if u_hat.shape != u.shape:
        raise ValueError(f"shape mismatch: {u_hat.shape} vs {u.shape}")
    denom = np.linalg.norm(u)
    if denom == 0:
        raise ValueError("reference field has zero norm")
    return float(np.linalg.norm(u_hat - u) / denom)
