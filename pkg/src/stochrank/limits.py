"""Closed-form hydrodynamic limit of the ranking process for discrete mixtures.

For a mixture sum_a r_a delta(rho_a) and initial class tails u_a(y), the limit
fraction of class-a particles at scaled position >= y is

    U_a(y, t) = r_a exp(-rho_a((t - t0, t]))       for y <= y_c(t),
    U_a(y, t) = u_a(yhat) exp(-rho_a((0, t]))      for y >= y_c(t),

where t0 = t0(y, t) inverts y_a(., t) and yhat = yhat(y, t) inverts y_b(., t).
All functions broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .intensity import MixtureSpec
from .ranking import LAYOUTS, PROPORTIONAL

MAX_BISECTION_ITERS = 60
YHAT_UPPER = 1.0 - 1e-12


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _bisect_inf(pred: Callable[[np.ndarray], np.ndarray], lo, hi, tol: float):
    """Approximate inf{s in [lo, hi] : pred(s)} for a monotone predicate.

    ``pred(hi)`` must hold. Returns ``lo`` wherever ``pred(lo)`` already holds.
    """
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    lo, hi = lo.copy(), hi.copy()
    start = lo.copy()
    at_lo = np.asarray(pred(lo))
    for _ in range(MAX_BISECTION_ITERS):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        ok = np.asarray(pred(mid))
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return np.where(at_lo, start, hi)


@dataclass(frozen=True)
class LimitEvaluator:
    mixture: MixtureSpec
    layout: str = PROPORTIONAL
    inversion_tolerance: float = 1e-10

    def __post_init__(self) -> None:
        if self.layout not in LAYOUTS:
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.inversion_tolerance < 0:
            raise ValueError("inversion_tolerance must be non-negative")

    @property
    def n_classes(self) -> int:
        return len(self.mixture)

    def initial_tail(self, a: int, y):
        """u_a(y): mass of class a at scaled position >= y at time 0."""
        y = np.asarray(y, dtype=float)
        r = self.mixture.weights[a]
        if self.layout == PROPORTIONAL:
            return _out(r * (1.0 - y))
        edges = np.concatenate([[0.0], np.cumsum(self.mixture.weights)])
        lo, hi = edges[a], min(edges[a + 1], 1.0)
        return _out(np.clip(hi - np.maximum(y, lo), 0.0, None))

    def masses(self, s, t) -> np.ndarray:
        """rho_a((s, t]) for every class, stacked on a leading axis."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.stack([np.asarray(spec.cumulative(t)) - np.asarray(spec.cumulative(s)) for spec in self.mixture.specs])

    def _weights_col(self, ndim: int) -> np.ndarray:
        return np.asarray(self.mixture.weights).reshape((-1,) + (1,) * ndim)

    # -- characteristic functions ------------------------------------------

    def y_c(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("t must be non-negative")
        m = self.masses(np.zeros_like(t), t)
        return _out(1.0 - np.sum(self._weights_col(t.ndim) * np.exp(-m), axis=0))

    def y_a(self, t0, t):
        t0, t = np.broadcast_arrays(np.asarray(t0, dtype=float), np.asarray(t, dtype=float))
        if np.any(t0 < 0) or np.any(t0 > t):
            raise ValueError("y_a requires 0 <= t0 <= t")
        return _out(self._y_a(t0, t))

    def _y_a(self, t0, t):
        m = self.masses(t - t0, t)
        m = np.where(t0 == 0, 0.0, m)
        return 1.0 - np.sum(self._weights_col(np.ndim(t)) * np.exp(-m), axis=0)

    def y_b(self, y0, t):
        y0, t = np.broadcast_arrays(np.asarray(y0, dtype=float), np.asarray(t, dtype=float))
        if np.any(y0 < 0) or np.any(y0 >= 1) or np.any(t < 0):
            raise ValueError("y_b requires 0 <= y0 < 1 and t >= 0")
        return _out(self._y_b(y0, t))

    def _y_b(self, y0, t):
        m = self.masses(np.zeros_like(t), t)
        u = np.stack([np.asarray(self.initial_tail(a, y0)) for a in range(self.n_classes)])
        return 1.0 - np.sum(u * np.exp(-m), axis=0)

    # -- inverses ------------------------------------------------------------

    def invert_t0(self, y, t):
        """t0(y, t) = inf{s in [0, t] : y_a(s, t) >= y}."""
        y, t = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(t, dtype=float))
        yc = np.asarray(self.y_c(t))
        if np.any(y < 0) or np.any(y > yc):
            raise ValueError("invert_t0 requires 0 <= y <= y_c(t)")
        out = _bisect_inf(lambda s: self._y_a(s, t) >= y, np.zeros_like(t), t, self.inversion_tolerance)
        return _out(np.where(y <= 0, 0.0, out))

    def invert_yhat(self, y, t):
        """yhat(y, t) = inf{x in [0, 1) : y_b(x, t) >= y}."""
        y, t = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(t, dtype=float))
        yc = np.asarray(self.y_c(t))
        if np.any(y < yc) or np.any(y >= 1):
            raise ValueError("invert_yhat requires y_c(t) <= y < 1")
        hi = np.full_like(y, YHAT_UPPER)
        out = _bisect_inf(lambda x: self._y_b(x, t) >= y, np.zeros_like(y), hi, self.inversion_tolerance)
        return _out(np.where(t == 0, y, out))

    # -- limit tails -----------------------------------------------------------

    def limit_tails(self, y, t) -> np.ndarray:
        """U_a(y, t) for all classes; leading axis indexes the class."""
        y, t = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(t, dtype=float))
        if np.any(y < 0) or np.any(y >= 1) or np.any(t < 0):
            raise ValueError("limit tails require 0 <= y < 1 and t >= 0")
        yc = np.asarray(self.y_c(t))
        top = y <= yc
        t0 = np.asarray(self.invert_t0(np.where(top, y, 0.0), t))
        yhat = np.asarray(self.invert_yhat(np.where(top, yc, y), t))
        r = self._weights_col(y.ndim)
        upper = r * np.exp(-np.where(t0 == 0, 0.0, self.masses(t - t0, t)))
        u_hat = np.stack([np.asarray(self.initial_tail(a, yhat)) for a in range(self.n_classes)])
        lower = u_hat * np.exp(-self.masses(np.zeros_like(t), t))
        return np.where(top, upper, lower)

    def limit_tail(self, a: int, y, t):
        return _out(self.limit_tails(y, t)[a])


def y_c(ev: LimitEvaluator, t):
    return ev.y_c(t)


def y_a(ev: LimitEvaluator, t0, t):
    return ev.y_a(t0, t)


def y_b(ev: LimitEvaluator, y0, t):
    return ev.y_b(y0, t)


def invert_t0(ev: LimitEvaluator, y, t):
    return ev.invert_t0(y, t)


def invert_yhat(ev: LimitEvaluator, y, t):
    return ev.invert_yhat(y, t)


def limit_tail(ev: LimitEvaluator, a: int, y, t):
    return ev.limit_tail(a, y, t)
