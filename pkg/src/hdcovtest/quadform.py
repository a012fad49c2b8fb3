"""Quadratic forms ``y S yᵀ`` of sample covariance matrices.

``y S yᵀ`` equals the sample variance of the weighted row sums
``s_l = sum_j y_j X[l, j]``, so it can be computed in ``O(n p)`` time without
ever forming the ``p x p`` matrix ``S``.  Row sums are accumulated with
:func:`math.fsum` (correctly rounded), which keeps the rounding error
independent of ``p`` even for ``p`` in the hundreds of thousands.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import DataError

__all__ = [
    "as_group",
    "weighted_row_sums",
    "quad_form",
    "sample_covariance_oracle",
    "ORACLE_MAX_DIM",
]

ORACLE_MAX_DIM = 2000


def as_group(X, *, min_rows: int = 2) -> np.ndarray:
    """Validate one group of samples and return it as a float 2-D array.

    Rows are i.i.d. sample vectors, columns are coordinates.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise DataError(f"group data must be 2-D (n x p), got shape {arr.shape}")
    if arr.shape[0] < min_rows:
        raise DataError(f"group needs at least {min_rows} rows, got {arr.shape[0]}")
    if arr.shape[1] < 1:
        raise DataError("group data has no columns")
    if not np.all(np.isfinite(arr)):
        raise DataError("group data contains non-finite entries")
    return arr


def _selector(y, p: int) -> np.ndarray:
    if y is None:
        return np.ones(p)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.shape[0] != p:
        raise ValueError(f"selector length {y.shape} does not match dimension p={p}")
    return y


def weighted_row_sums(X, y=None) -> np.ndarray:
    """Row sums ``s_l = sum_j y_j X[l, j]`` for every sample ``l``.

    ``y=None`` means the all-ones selector.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {X.shape}")
    y = _selector(y, X.shape[1])
    # Only touch the nonzero coordinates; block selectors are mostly zero.
    nz = np.flatnonzero(y)
    if nz.size == 0:
        return np.zeros(X.shape[0])
    if nz.size == y.size and np.all(y == 1.0):
        rows = X.tolist()
    elif np.all(y[nz] == 1.0):
        if nz[-1] - nz[0] + 1 == nz.size:
            rows = X[:, nz[0] : nz[-1] + 1].tolist()
        else:
            rows = X[:, nz].tolist()
    else:
        rows = (X[:, nz] * y[nz]).tolist()
    return np.array([math.fsum(r) for r in rows])


def quad_form(X, y=None) -> float:
    """``y S yᵀ`` for the sample covariance ``S`` of ``X`` (divisor ``n - 1``).

    Parameters
    ----------
    X : array_like, shape (n, p)
        One group of samples, ``n >= 2``.
    y : array_like, shape (p,), optional
        Selector weights. Defaults to all ones.

    Returns
    -------
    float
        Nonnegative value; exactly ``0.0`` when all weighted row sums agree.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {X.shape}")
    n = X.shape[0]
    if n < 2:
        raise ValueError(f"quadratic form needs n >= 2 samples, got {n}")
    s = weighted_row_sums(X, y)
    if np.all(s == s[0]):
        return 0.0
    mean = math.fsum(s.tolist()) / n
    dev = s - mean
    return math.fsum((dev * dev).tolist()) / (n - 1)


def sample_covariance_oracle(X, max_dim: int = ORACLE_MAX_DIM) -> np.ndarray:
    """Explicit ``p x p`` sample covariance as a sum of centered outer products.

    Intended for testing at small ``p`` only.
    """
    X = as_group(X)
    n, p = X.shape
    if p > max_dim:
        raise ValueError(
            f"p={p} exceeds the explicit-covariance limit {max_dim}; "
            "use quad_form, which never forms the p x p matrix"
        )
    centered = X - X.mean(axis=0)
    S = np.zeros((p, p))
    for row in centered:
        S += np.outer(row, row)
    S /= n - 1
    return S
