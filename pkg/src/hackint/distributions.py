"""Student-t and chi-square CDFs and quantiles.

The CDFs are built on regularized incomplete beta / gamma functions
(continued fractions evaluated with the modified Lentz method) and inverted
by bracketed root finding, so the quantiles are reproducible to ~1e-12
without lookup tables.
"""

from __future__ import annotations

import math

from scipy.optimize import brentq

from .errors import InvalidAlpha

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _gamma_series(a: float, x: float) -> float:
    ap = a
    total = 1.0 / a
    term = total
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ArithmeticError("incomplete gamma series did not converge")


def _gamma_cf(a: float, x: float) -> float:
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
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise ArithmeticError("incomplete gamma continued fraction did not converge")


def gammainc(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x)."""
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def _t_central(x: float, df: float) -> float:
    # P(0 < T < |x|), accurate for small |x|
    z = x * x / (df + x * x)
    return 0.5 * betainc(0.5, 0.5 * df, z)


def t_sf(x: float, df: float) -> float:
    """Upper tail P(T > x), computed without cancellation for large x."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x < 0:
        return 1.0 - t_sf(-x, df)
    return 0.5 * betainc(0.5 * df, 0.5, df / (df + x * x))


def t_cdf(x: float, df: float) -> float:
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    central = _t_central(x, df)
    return 0.5 + central if x >= 0 else 0.5 - central


def chi2_cdf(x: float, df: float) -> float:
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    return gammainc(0.5 * df, 0.5 * x) if x > 0 else 0.0


def chi2_sf(x: float, df: float) -> float:
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    return gammaincc(0.5 * df, 0.5 * x) if x > 0 else 1.0


def _bracket_root(fn, lo: float, hi: float) -> float:
    # fn increasing in its argument, fn(lo) <= 0
    while fn(hi) < 0:
        lo, hi = hi, hi * 2.0
    return brentq(fn, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=1000)


def t_ppf(prob: float, df: float) -> float:
    """Quantile of the t distribution with ``df`` degrees of freedom."""
    if not 0.0 < prob < 1.0:
        raise InvalidAlpha(f"probability must lie in (0, 1), got {prob}")
    if prob == 0.5:
        return 0.0
    sign = 1.0 if prob > 0.5 else -1.0
    # tail mass beyond the quantile, taken on the side where it is small
    tail = 1.0 - prob if prob > 0.5 else prob
    if tail >= 0.25:
        target = 0.5 - tail
        return sign * _bracket_root(lambda v: _t_central(v, df) - target, 0.0, 2.0)
    return sign * _bracket_root(lambda v: tail - t_sf(v, df), 0.0, 4.0)


def chi2_ppf(prob: float, df: float) -> float:
    """Quantile of the chi-square distribution with ``df`` degrees of freedom."""
    if not 0.0 <= prob < 1.0:
        raise InvalidAlpha(f"probability must lie in [0, 1), got {prob}")
    if prob == 0.0:
        return 0.0
    start = max(4.0, 2.0 * df)
    if prob <= 0.5:
        return _bracket_root(lambda v: chi2_cdf(v, df) - prob, 0.0, start)
    upper = 1.0 - prob
    return _bracket_root(lambda v: upper - chi2_sf(v, df), 0.0, start)


def two_sided_t(alpha: float, df: float) -> float:
    """``1 - alpha/2`` quantile of t_df, the multiplier of a two-sided interval."""
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie strictly in (0, 1), got {alpha}")
    return t_ppf(1.0 - 0.5 * alpha, df)
