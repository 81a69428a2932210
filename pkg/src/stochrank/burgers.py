"""Checks that the closed-form limit tails solve the Burgers system with evaporation.

    dU_a/dt + (sum_b w_b(t) U_b) dU_a/dy = -w_a(t) U_a,
    U_a(0, t) = r_a,   U_a(y, 0) = u_a(y).

Residuals use central differences. Characteristics are integrated with
fixed-step RK4 on (y, phi_1..phi_k), where dy/dt = sum_b w_b phi_b and
dphi_a/dt = -w_a phi_a, independently of the closed form.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from .limits import LimitEvaluator


@dataclass(frozen=True)
class PdeCheckConfig:
    h: float = 1e-4
    curve_margin: float = 10.0  # in units of h
    y_max: float = 0.99
    ode_steps: int = 10_000


@dataclass(frozen=True)
class TopSide:
    """Characteristic leaving the top boundary y = 0 at time t1."""

    t1: float


@dataclass(frozen=True)
class TailSide:
    """Characteristic starting at (y0, 0)."""

    y0: float


@dataclass(frozen=True)
class Characteristic:
    times: np.ndarray
    y: np.ndarray
    phi: np.ndarray  # shape (n_classes, len(times))


def rates(ev: LimitEvaluator, t) -> np.ndarray:
    """Densities w_a(t) of every class, stacked on a leading axis."""
    return np.stack([np.asarray(spec.density(t), dtype=float) for spec in ev.mixture.specs])


def _exact(ev: LimitEvaluator) -> LimitEvaluator:
    # difference quotients need inverses at full double precision
    return dataclasses.replace(ev, inversion_tolerance=0.0)


def _stencil_ok(ev: LimitEvaluator, y: float, t: float, h: float, margin: float, y_max: float) -> Optional[str]:
    if not (y - h >= 0 and y + h <= y_max and t - h >= 0):
        return "stencil leaves the domain"
    for s in (t - h, t, t + h):
        if abs(y - ev.y_c(s)) < margin * h:
            return "point too close to the curve y = y_c(t)"
    for spec in ev.mixture.specs:
        for k in spec.knots:
            if t - h <= k <= t + h and k > 0:
                return "stencil straddles a density knot"
    return None


def pde_residual(ev: LimitEvaluator, a: int, y: float, t: float, h: float = 1e-4, margin: float = 10.0,
                 y_max: float = 0.99) -> float:
    """Central-difference residual of the class-``a`` equation at (y, t)."""
    reason = _stencil_ok(ev, y, t, h, margin, y_max)
    if reason:
        raise ValueError(f"cannot evaluate residual at (y={y}, t={t}): {reason}")
    ex = _exact(ev)
    ys = np.array([y, y + h, y - h, y, y])
    ts = np.array([t, t, t, t + h, t - h])
    U = ex.limit_tails(ys, ts)
    w = rates(ev, t)
    du_dt = (U[a, 3] - U[a, 4]) / (2 * h)
    du_dy = (U[a, 1] - U[a, 2]) / (2 * h)
    speed = float(np.sum(w * U[:, 0]))
    return float(du_dt + speed * du_dy + w[a] * U[a, 0])


def residual_grid(ev: LimitEvaluator, ys: Sequence[float], ts: Sequence[float], h: float = 1e-4,
                  margin: float = 10.0, y_max: float = 0.99) -> List[dict]:
    """Residual records (y, t, alpha, residual, h) over admissible grid points.

    Points whose stencil meets the curve y = y_c(t), a density knot or the
    domain edge are skipped. ``alpha`` is 1-based.
    """
    ex = _exact(ev)
    pts = [(float(y), float(t)) for t in ts for y in ys
           if _stencil_ok(ev, float(y), float(t), h, margin, y_max) is None]
    if not pts:
        return []
    y = np.array([p[0] for p in pts])
    t = np.array([p[1] for p in pts])
    U0 = ex.limit_tails(y, t)
    Uyp = ex.limit_tails(y + h, t)
    Uym = ex.limit_tails(y - h, t)
    Utp = ex.limit_tails(y, t + h)
    Utm = ex.limit_tails(y, t - h)
    w = rates(ev, t)
    speed = np.sum(w * U0, axis=0)
    res = (Utp - Utm) / (2 * h) + speed * (Uyp - Uym) / (2 * h) + w * U0
    return [
        {"y": y[j], "t": t[j], "alpha": a + 1, "residual": float(res[a, j]), "h": h}
        for j in range(len(pts)) for a in range(ev.n_classes)
    ]


def boundary_residual(ev: LimitEvaluator, ts: Sequence[float]) -> float:
    """max |U_a(0, t) - r_a| over classes and times."""
    U = ev.limit_tails(np.zeros(len(ts)), np.asarray(ts, dtype=float))
    r = np.asarray(ev.mixture.weights)[:, None]
    return float(np.max(np.abs(U - r)))


def initial_residual(ev: LimitEvaluator, ys: Sequence[float]) -> float:
    """max |U_a(y, 0) - u_a(y)| over classes and positions."""
    ys = np.asarray(ys, dtype=float)
    U = ev.limit_tails(ys, np.zeros_like(ys))
    u = np.stack([np.asarray(ev.initial_tail(a, ys)) for a in range(ev.n_classes)])
    return float(np.max(np.abs(U - u)))


def characteristic_curve(ev: LimitEvaluator, start: Union[TopSide, TailSide], t_end: float,
                         steps: int = 10_000) -> Characteristic:
    """Integrate one characteristic and the class values it carries."""
    k = ev.n_classes
    if isinstance(start, TopSide):
        t_start, y_start = float(start.t1), 0.0
        phi_start = np.asarray(ev.mixture.weights, dtype=float)
    elif isinstance(start, TailSide):
        if not 0 <= start.y0 < 1:
            raise ValueError("y0 must lie in [0, 1)")
        t_start, y_start = 0.0, float(start.y0)
        phi_start = np.array([float(ev.initial_tail(a, start.y0)) for a in range(k)])
    else:
        raise TypeError(f"unknown start {start!r}")
    if t_end < t_start:
        raise ValueError("t_end must not precede the starting time")

    times = np.linspace(t_start, t_end, steps + 1)
    state = np.empty((steps + 1, k + 1))
    state[0, 0] = y_start
    state[0, 1:] = phi_start
    if t_end == t_start:
        return Characteristic(times[:1], state[:1, 0].copy(), state[:1, 1:].T.copy())

    def rhs(s, x):
        w = rates(ev, s)
        return np.concatenate([[np.dot(w, x[1:])], -w * x[1:]])

    dt = (t_end - t_start) / steps
    for n in range(steps):
        s, x = times[n], state[n]
        k1 = rhs(s, x)
        k2 = rhs(s + dt / 2, x + dt / 2 * k1)
        k3 = rhs(s + dt / 2, x + dt / 2 * k2)
        k4 = rhs(s + dt, x + dt * k3)
        state[n + 1] = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not 0 <= state[n + 1, 0] < 1:
            raise ValueError(f"characteristic left [0, 1) at t={times[n + 1]:.6g}")
    return Characteristic(times, state[:, 0].copy(), state[:, 1:].T.copy())
