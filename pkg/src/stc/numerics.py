"""Shared numerical primitives: count losses and probability-simplex projection."""

from __future__ import annotations

import numpy as np

__all__ = [
    "poisson_loss",
    "unnorm_kl",
    "project_to_simplex",
    "project_rows_to_simplex",
    "is_on_simplex",
]

# feasibility tolerance for "this vector lies on the simplex" checks
SIMPLEX_SUM_TOL = 1e-10


def _as_loss_args(count, mean):
    w = np.asarray(count, dtype=float)
    m = np.asarray(mean, dtype=float)
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("counts must be finite and non-negative")
    if not np.all(np.isfinite(m)) or np.any(m <= 0):
        raise ValueError("mean must be finite and positive")
    return w, m


def poisson_loss(count, mean):
    """Negative Poisson log likelihood of `count` at rate `mean`, with the
    log-factorial term dropped: mean - count*log(mean).

    The dropped term depends only on the count, so values are comparable
    across rates for a fixed count. Accepts scalars or broadcastable arrays.
    """
    w, m = _as_loss_args(count, mean)
    out = m - w * np.log(m)
    return out.item() if out.ndim == 0 else out


def unnorm_kl(count, mean):
    """Unnormalized KL divergence count*log(count/mean) - count + mean.

    The count = 0 limit is defined as `mean`. Differs from `poisson_loss`
    only by a rate-independent constant, so both induce the same minimizers.
    """
    w, m = _as_loss_args(count, mean)
    w_safe = np.where(w > 0, w, 1.0)  # dead value, masked out below
    out = np.where(w > 0, w_safe * np.log(w_safe / m), 0.0) - w + m
    return out.item() if out.ndim == 0 else out


def project_rows_to_simplex(matrix):
    """Euclidean projection of every row of `matrix` onto the probability simplex."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[1] == 0:
        raise ValueError("expected a non-empty 2-d array")
    if not np.all(np.isfinite(m)):
        raise ValueError("entries must be finite")
    n = m.shape[1]
    u = -np.sort(-m, axis=1)
    cut = (np.cumsum(u, axis=1) - 1.0) / np.arange(1, n + 1)
    # the first column always satisfies u > cut, so a last-true index exists
    active = u > cut
    rho = n - 1 - np.argmax(active[:, ::-1], axis=1)
    t = cut[np.arange(m.shape[0]), rho]
    return np.maximum(m - t[:, None], 0.0)


def project_to_simplex(vector):
    """Nearest point on the probability simplex in Euclidean distance.

    Sorts descending, finds the largest support whose shifted entries stay
    positive, and clips: p_i = max(0, v_i - t) with t chosen so sum(p) = 1.
    """
    v = np.asarray(vector, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a non-empty 1-d vector")
    return project_rows_to_simplex(v[None, :])[0]


def is_on_simplex(v, tol=SIMPLEX_SUM_TOL):
    """True when every entry is non-negative and the sum is 1 within `tol`."""
    v = np.asarray(v, dtype=float)
    return bool(np.all(v >= 0.0) and abs(float(v.sum()) - 1.0) <= tol)
