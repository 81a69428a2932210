"""Upper incomplete gamma function for real order and the Riemann zeta function."""

from __future__ import annotations

import math

import numpy as np

_EPS = 1e-16
_MAX_ITER = 10_000
_TINY = 1e-300


def _series_lower_regularized(s: float, x: float) -> float:
    """P(s, x) = gamma(s, x) / Gamma(s) by its power series, for s > 0."""
    term = 1.0 / s
    total = term
    a = s
    for _ in range(_MAX_ITER):
        a += 1.0
        term *= x / a
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"series for P({s}, {x}) did not converge")
    return total * math.exp(-x + s * math.log(x) - math.lgamma(s))


def _continued_fraction(s: float, x: float) -> float:
    """Gamma(s, x) by Legendre's continued fraction (modified Lentz)."""
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0 else 1.0 / _TINY
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
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
        raise ArithmeticError(f"continued fraction for Gamma({s}, {x}) did not converge")
    return math.exp(-x + s * math.log(x)) * h


_EULER_GAMMA = 0.57721566490153286061
# zeta(k) for k = 2..61, used by the log-gamma series near 1
_ZETA_INT = None


def _lgamma1p(s: float) -> float:
    """log Gamma(1 + s) for |s| <= 0.5 by its Taylor series."""
    global _ZETA_INT
    if _ZETA_INT is None:
        _ZETA_INT = [zeta(float(k)) for k in range(2, 62)]
    total = -_EULER_GAMMA * s
    power = -s  # becomes (-s)^k inside the loop
    for k, zk in enumerate(_ZETA_INT, start=2):
        power *= -s
        total += zk * power / k
    return total


def _small_order(s: float, x: float) -> float:
    """Gamma(s, x) for |s| <= 0.5 and 0 < x < 1.

    Uses Gamma(s, x) = (Gamma(1+s) - x^s)/s - x^s sum_{n>=1} (-x)^n / (n! (s+n)),
    with both quotients evaluated through expm1 so s -> 0 stays accurate.
    """
    log_x = math.log(x)
    if abs(s) < 1e-8:
        # first order in s; dividing by a tiny or subnormal s loses all digits
        curvature = (math.pi ** 2 / 6 + _EULER_GAMMA ** 2 - log_x ** 2) / 2
        head = -_EULER_GAMMA - log_x + s * curvature
    else:
        head = math.expm1(_lgamma1p(s)) / s - math.expm1(s * log_x) / s
    total = 0.0
    term = 1.0
    for n in range(1, _MAX_ITER):
        term *= -x / n
        contrib = term / (s + n)
        total += contrib
        if abs(contrib) < _EPS * abs(total):
            break
    return head - math.exp(s * log_x) * total


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Gamma(s, x) = integral from x to infinity of u^(s-1) e^(-u) du.

    ``s`` may be any real number, ``x`` must be positive. Large ``x`` uses
    Legendre's continued fraction, orders above 1/2 the series for the lower
    function. Remaining orders are shifted into [-1/2, 1/2], evaluated there by
    a small-order series, and brought back with the downward recurrence
    Gamma(s, x) = (Gamma(s + 1, x) - x^s e^(-x)) / s.
    """
    s = float(s)
    x = float(x)
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    if x >= max(1.0, s + 1.0):
        return _continued_fraction(s, x)
    if s > 0.5:
        return math.gamma(s) * (1.0 - _series_lower_regularized(s, x))
    shift = math.ceil(-0.5 - s) if s < -0.5 else 0
    order = s + shift
    value = _small_order(order, x)
    for _ in range(shift):
        order -= 1.0
        value = (value - math.exp(order * math.log(x) - x)) / order
    return value


def gamma_upper(s: float, x):
    """Vectorized wrapper of :func:`upper_incomplete_gamma` over ``x``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return upper_incomplete_gamma(s, float(x))
    return np.array([upper_incomplete_gamma(s, xi) for xi in x.ravel()]).reshape(x.shape)


# Bernoulli numbers B_2k for the Euler-Maclaurin tail
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


def zeta_partial(z: float, n: int) -> float:
    """zeta_N(z) = sum_{i=1}^{n} i^(-z)."""
    i = np.arange(1, n + 1, dtype=float)
    return math.fsum(i ** (-z))


def zeta(z: float, terms: int = 50) -> float:
    """Riemann zeta for z > 1 as a partial sum plus Euler-Maclaurin tail."""
    if not z > 1:
        raise ValueError(f"zeta needs z > 1, got {z}")
    m = terms
    head = zeta_partial(z, m - 1)
    tail = m ** (1.0 - z) / (z - 1.0) + 0.5 * m ** (-z)
    # derivatives of f(x) = x^-z: f^(2k-1)(m) = -(z)(z+1)...(z+2k-2) m^(-z-2k+1)
    rising = z
    power = m ** (-z - 1.0)
    for k, b2k in enumerate(_BERNOULLI, start=1):
        tail += b2k / math.factorial(2 * k) * rising * power
        rising *= (z + 2 * k - 1) * (z + 2 * k)
        power /= m * m
    return head + tail
