"""Intensity measures of the driving Poisson random measures.

Every intensity is represented by its cumulative function R(t) = rho((0, t]).
Jump times are produced by mapping the points of a unit-rate Poisson process
through the generalized inverse of R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

_NORMALIZATION_TOL = 1e-12
_BISECTION_ITERS = 60


def _as_float_or_array(values: np.ndarray, like) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(values)
    return values


# ---------------------------------------------------------------------------
# Activity profiles (shared time dependence a(t))
# ---------------------------------------------------------------------------


class ActivityProfile:
    """Strictly positive activity level a(t) with cumulative A(t)."""

    period: float

    def density(self, t: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def cumulative(self, t: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def inverse(self, m: ArrayLike) -> ArrayLike:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(ActivityProfile):
    level: float = 1.0
    period: float = 1.0

    def __post_init__(self) -> None:
        if self.level != 1.0:
            raise ValueError(f"Constant profile must have level 1, got {self.level}")
        if self.period <= 0:
            raise ValueError(f"period must be positive, got {self.period}")

    def density(self, t):
        t = np.asarray(t, dtype=float)
        return _as_float_or_array(np.ones_like(t), t)

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        return _as_float_or_array(t.copy(), t)

    def inverse(self, m):
        m = np.asarray(m, dtype=float)
        return _as_float_or_array(m.copy(), m)


@dataclass(frozen=True)
class Sinusoidal(ActivityProfile):
    """a(t) = 1 + amplitude * sin(2 pi t / period); mean one over a period."""

    period: float = 1.0
    amplitude: float = 0.5

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise ValueError(f"period must be positive, got {self.period}")
        if not 0.0 <= self.amplitude < 1.0:
            raise ValueError(f"amplitude must lie in [0, 1), got {self.amplitude}")

    def density(self, t):
        t = np.asarray(t, dtype=float)
        out = 1.0 + self.amplitude * np.sin(2.0 * np.pi * t / self.period)
        return _as_float_or_array(out, t)

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        k = self.amplitude * self.period / (2.0 * np.pi)
        out = t + k * (1.0 - np.cos(2.0 * np.pi * t / self.period))
        return _as_float_or_array(out, t)

    def inverse(self, m):
        # A(t) - t lies in [0, amplitude * period / pi], which brackets the root.
        m = np.asarray(m, dtype=float)
        lo = np.maximum(m - self.amplitude * self.period / np.pi, 0.0)
        hi = m.copy()
        for _ in range(_BISECTION_ITERS):
            mid = 0.5 * (lo + hi)
            ok = np.asarray(self.cumulative(mid)) >= m
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid)
            if np.all(hi - lo <= 1e-12 * np.maximum(1.0, np.abs(m))):
                break
        return _as_float_or_array(hi, m)


@dataclass(frozen=True)
class PiecewiseConstant(ActivityProfile):
    """Periodic step profile.

    ``breakpoints`` run from 0 to the period; ``levels[j]`` holds on
    ``[breakpoints[j], breakpoints[j+1])``. The mean over a period must be 1.
    """

    breakpoints: Tuple[float, ...]
    levels: Tuple[float, ...]
    period: float = field(init=False)

    def __post_init__(self) -> None:
        bp = tuple(float(b) for b in self.breakpoints)
        lv = tuple(float(v) for v in self.levels)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "levels", lv)
        if len(bp) != len(lv) + 1 or len(lv) == 0:
            raise ValueError("need len(breakpoints) == len(levels) + 1 >= 2")
        if bp[0] != 0.0 or any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must start at 0 and strictly increase")
        if any(v <= 0 for v in lv):
            raise ValueError("levels must be strictly positive")
        period = bp[-1]
        mean = sum(v * (b1 - b0) for v, b0, b1 in zip(lv, bp, bp[1:])) / period
        if abs(mean - 1.0) > _NORMALIZATION_TOL:
            raise ValueError(f"profile mean over one period is {mean!r}, expected 1")
        object.__setattr__(self, "period", period)

    @property
    def _knot_mass(self) -> np.ndarray:
        bp = np.asarray(self.breakpoints)
        return np.concatenate([[0.0], np.cumsum(np.asarray(self.levels) * np.diff(bp))])

    def density(self, t):
        t = np.asarray(t, dtype=float)
        phase = np.mod(t, self.period)
        idx = np.clip(np.searchsorted(self.breakpoints, phase, side="right") - 1, 0, len(self.levels) - 1)
        return _as_float_or_array(np.asarray(self.levels)[idx], t)

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        n = np.floor(t / self.period)
        phase = t - n * self.period
        out = n * self.period + np.interp(phase, self.breakpoints, self._knot_mass)
        return _as_float_or_array(out, t)

    def inverse(self, m):
        m = np.asarray(m, dtype=float)
        n = np.floor(m / self.period)
        rem = m - n * self.period
        out = n * self.period + np.interp(rem, self._knot_mass, self.breakpoints)
        return _as_float_or_array(out, m)


# ---------------------------------------------------------------------------
# Intensity specifications
# ---------------------------------------------------------------------------


class IntensitySpec:
    """Cumulative intensity R(t) of one particle class."""

    def cumulative(self, t: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def inverse(self, m: ArrayLike) -> ArrayLike:
        """Generalized inverse: smallest t with R(t) >= m."""
        raise NotImplementedError

    def density(self, t: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    @property
    def knots(self) -> Tuple[float, ...]:
        """Times where the density may be discontinuous."""
        return ()


@dataclass(frozen=True)
class Homogeneous(IntensitySpec):
    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        return _as_float_or_array(self.rate * t, t)

    def inverse(self, m):
        m = np.asarray(m, dtype=float)
        return _as_float_or_array(m / self.rate, m)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        return _as_float_or_array(np.full_like(t, self.rate), t)


@dataclass(frozen=True)
class CommonProfile(IntensitySpec):
    """R(t) = rate * A(t) for a shared activity profile."""

    rate: float
    profile: ActivityProfile = field(default_factory=Constant)

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        return _as_float_or_array(self.rate * np.asarray(self.profile.cumulative(t)), t)

    def inverse(self, m):
        m = np.asarray(m, dtype=float)
        return _as_float_or_array(np.asarray(self.profile.inverse(m / self.rate)), m)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        return _as_float_or_array(self.rate * np.asarray(self.profile.density(t)), t)

    @property
    def knots(self):
        if isinstance(self.profile, PiecewiseConstant):
            return self.profile.breakpoints
        return ()


@dataclass(frozen=True)
class PiecewiseLinearCumulative(IntensitySpec):
    """R given by linear interpolation of (time, mass) knots.

    Past the last knot R continues with the slope of the final segment.
    """

    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(a), float(b)) for a, b in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("need at least two knots")
        if pts[0] != (0.0, 0.0):
            raise ValueError(f"first knot must be (0, 0), got {pts[0]}")
        ts = [p[0] for p in pts]
        ms = [p[1] for p in pts]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("knot times must be strictly increasing")
        if any(b < a for a, b in zip(ms, ms[1:])):
            raise ValueError("knot masses must be non-decreasing")

    @property
    def _t(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def _m(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    @property
    def _tail_slope(self) -> float:
        (t0, m0), (t1, m1) = self.points[-2], self.points[-1]
        return (m1 - m0) / (t1 - t0)

    @property
    def knots(self):
        return tuple(p[0] for p in self.points)

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        ts, ms = self._t, self._m
        out = np.interp(t, ts, ms)
        out = np.where(t > ts[-1], ms[-1] + self._tail_slope * (t - ts[-1]), out)
        return _as_float_or_array(out, t)

    def inverse(self, m):
        m = np.asarray(m, dtype=float)
        ts, ms = self._t, self._m
        # first knot index k with ms[k] >= m, so ms[k-1] < m <= ms[k]
        k = np.searchsorted(ms, m, side="left")
        inside = k < len(ms)
        kc = np.clip(k, 1, len(ms) - 1)
        span = ms[kc] - ms[kc - 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(span > 0, (m - ms[kc - 1]) / span, 0.0)
        out = ts[kc - 1] + frac * (ts[kc] - ts[kc - 1])
        out = np.where(k == 0, 0.0, out)
        slope = self._tail_slope
        beyond = ts[-1] + (m - ms[-1]) / slope if slope > 0 else np.full_like(m, np.inf)
        out = np.where(inside, out, beyond)
        return _as_float_or_array(out, m)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        ts, ms = self._t, self._m
        slopes = np.diff(ms) / np.diff(ts)
        idx = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(slopes) - 1)
        return _as_float_or_array(slopes[idx], t)


# ---------------------------------------------------------------------------
# Mixtures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixtureSpec:
    """Discrete mixing measure: sum of weights[a] * delta(specs[a])."""

    weights: Tuple[float, ...]
    specs: Tuple[IntensitySpec, ...]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.specs) or not self.weights:
            raise ValueError("weights and specs must be non-empty and of equal length")
        if any(not r > 0 for r in self.weights):
            raise ValueError("mixture weights must be strictly positive")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise ValueError(f"mixture weights sum to {total!r}, expected 1")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def atoms(self) -> Tuple[Tuple[float, IntensitySpec], ...]:
        return tuple(zip(self.weights, self.specs))


def build_mixture(atoms: Sequence[Tuple[float, IntensitySpec]]) -> MixtureSpec:
    """Validate ``(weight, spec)`` pairs into a MixtureSpec.

    Weights within 1e-9 of summing to one are renormalized; anything further
    off is rejected.
    """
    atoms = list(atoms)
    if not atoms:
        raise ValueError("mixture needs at least one atom")
    weights = [float(r) for r, _ in atoms]
    for r in weights:
        if not r > 0:
            raise ValueError(f"mixture weight must be positive, got {r}")
    total = math.fsum(weights)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"mixture weights sum to {total:g}, expected 1")
    weights = [r / total for r in weights]
    return MixtureSpec(tuple(weights), tuple(spec for _, spec in atoms))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def interval_mass(spec: IntensitySpec, s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """rho((s, t]) = R(t) - R(s)."""
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(s_arr < 0) or np.any(t_arr < 0):
        raise ValueError("times must be non-negative")
    if np.any(s_arr > t_arr):
        raise ValueError("interval_mass requires s <= t")
    out = np.asarray(spec.cumulative(t_arr)) - np.asarray(spec.cumulative(s_arr))
    out = np.where(s_arr == t_arr, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def unit_poisson_points(masses: np.ndarray, rng: np.random.Generator, block: int = 16):
    """Points of independent unit-rate Poisson processes on ``(0, masses[i]]``.

    Each process is built from partial sums of unit exponentials, drawn in
    blocks of ``block`` columns until every row passes its mass. Returns
    ``(counts, points)``; ``points`` lists process 0's points, then process
    1's, and so on, each in increasing order.
    """
    masses = np.asarray(masses, dtype=float)
    n = masses.shape[0]
    last = np.zeros(n)
    active = np.flatnonzero(masses > 0)
    owners, values = [], []
    while active.size:
        sums = last[active, None] + np.cumsum(rng.exponential(size=(active.size, block)), axis=1)
        keep = sums <= masses[active, None]
        owners.append(np.broadcast_to(active[:, None], sums.shape)[keep])
        values.append(sums[keep])
        last[active] = sums[:, -1]
        active = active[keep[:, -1]]
    if not owners:
        return np.zeros(n, dtype=np.int64), np.empty(0)
    owner = np.concatenate(owners)
    value = np.concatenate(values)
    order = np.argsort(owner, kind="stable")
    counts = np.bincount(owner, minlength=n).astype(np.int64)
    return counts, value[order]


def sample_jump_times(spec: IntensitySpec, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Jump times in (0, horizon] as R^{-1} of unit Poisson partial sums."""
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    mass = float(spec.cumulative(horizon))
    _, points = unit_poisson_points(np.array([mass]), rng)
    times = np.asarray(spec.inverse(points), dtype=float)
    return np.minimum(times, horizon)
