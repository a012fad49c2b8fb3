"""Chi-square distribution kernel and a Kolmogorov-Smirnov distance.

The chi-square functions are built on the regularized incomplete gamma
function, evaluated by its power series below ``a + 1`` and by a modified
Lentz continued fraction above it.  Each tail is computed directly so that
upper-tail p-values keep full relative precision far out in the tail.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

from scipy.optimize import brentq

__all__ = [
    "ln_gamma",
    "gamma_p",
    "gamma_q",
    "chi2_cdf",
    "chi2_sf",
    "chi2_quantile",
    "ks_distance",
]

_EPS = 2.220446049250313e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0:
        raise ValueError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def _gamma_prefactor(a: float, x: float) -> float:
    # x**a * exp(-x) / Gamma(a), in log space
    return math.exp(a * math.log(x) - x - ln_gamma(a))


def _series_p(a: float, x: float) -> float:
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")
    return total * _gamma_prefactor(a, x)


def _continued_fraction_q(a: float, x: float) -> float:
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(
            f"incomplete gamma continued fraction did not converge (a={a}, x={x})"
        )
    return h * _gamma_prefactor(a, x)


def gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    if not a > 0:
        raise ValueError(f"shape must be positive, got {a!r}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _series_p(a, x))
    return max(0.0, 1.0 - _continued_fraction_q(a, x))


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x)."""
    if not a > 0:
        raise ValueError(f"shape must be positive, got {a!r}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _series_p(a, x))
    return min(1.0, _continued_fraction_q(a, x))


def _check_df(df: int) -> None:
    if int(df) != df or df < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {df!r}")


def chi2_cdf(x: float, df: int) -> float:
    """Lower-tail probability P(chi2_df <= x)."""
    _check_df(df)
    if x < 0:
        raise ValueError(f"chi-square argument must be nonnegative, got {x!r}")
    return gamma_p(df / 2.0, x / 2.0)


def chi2_sf(x: float, df: int) -> float:
    """Upper-tail probability P(chi2_df > x), accurate deep in the tail."""
    _check_df(df)
    if x < 0:
        raise ValueError(f"chi-square argument must be nonnegative, got {x!r}")
    return gamma_q(df / 2.0, x / 2.0)


def chi2_quantile(q: float, df: int) -> float:
    """Inverse of :func:`chi2_cdf`.

    Solved by Brent's method on a bracket ``[0, df + 20*sqrt(2*df) + 20]``,
    doubled until it contains the root.
    """
    _check_df(df)
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q!r}")
    hi = df + 20.0 * math.sqrt(2.0 * df) + 20.0
    while chi2_cdf(hi, df) < q:
        hi *= 2.0
    if q > 0.5:
        # solving on the upper tail keeps precision when q is close to 1
        upper = 1.0 - q
        func = lambda x: upper - chi2_sf(x, df)  # noqa: E731
    else:
        func = lambda x: chi2_cdf(x, df) - q  # noqa: E731
    return brentq(func, 0.0, hi, xtol=1e-300, rtol=4 * _EPS, maxiter=500)


def ks_distance(sorted_samples: Sequence[float], cdf: Callable[[float], float]) -> float:
    """Two-sided Kolmogorov-Smirnov distance between a sample and a CDF.

    Parameters
    ----------
    sorted_samples : sequence of float
        Observations in ascending order.
    cdf : callable
        Hypothesized distribution function.

    Returns
    -------
    float
        ``max_i max(i/n - F(x_i), F(x_i) - (i-1)/n)``.
    """
    n = len(sorted_samples)
    if n == 0:
        raise ValueError("ks_distance needs at least one sample")
    d = 0.0
    prev = -math.inf
    for i, x in enumerate(sorted_samples, start=1):
        if x < prev:
            raise ValueError("samples must be sorted ascending")
        prev = x
        f = cdf(x)
        d = max(d, i / n - f, f - (i - 1) / n)
    return d
