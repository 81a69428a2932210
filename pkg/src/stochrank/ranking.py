"""Exact simulation of the stochastic ranking (move-to-front) process.

Positions are never maintained as a list. A particle that has not jumped by
time t sits at its initial rank shifted down by the number of particles from
below it that have jumped; a particle that has jumped sits one below the
number of particles whose most recent jump is later than its own. Both counts
are rank queries over jump times.

Simultaneous jumps (possible only through floating point) are ordered by
particle index: at equal times the larger index counts as the later jump.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .fenwick import FenwickTree
from .intensity import MixtureSpec, unit_poisson_points

PROPORTIONAL = "proportional"
BLOCKS = "blocks"
LAYOUTS = (PROPORTIONAL, BLOCKS)


def class_counts(weights: Sequence[float], n: int) -> np.ndarray:
    """Round ``weights * n`` to integers summing to ``n`` (largest remainder)."""
    quotas = np.asarray(weights, dtype=float) * n
    counts = np.floor(quotas).astype(np.int64)
    short = n - int(counts.sum())
    if short > 0:
        # ties go to the lower class index
        order = np.lexsort((np.arange(len(quotas)), -(quotas - counts)))
        counts[order[:short]] += 1
    return counts


def layout_classes(weights: Sequence[float], n: int, layout: str) -> np.ndarray:
    """Class index (0-based) occupying each rank 1..n, as an array of length n."""
    counts = class_counts(weights, n)
    k = len(counts)
    if layout == BLOCKS:
        if n < k:
            raise ValueError(f"blocks layout needs N >= number of classes ({n} < {k})")
        return np.repeat(np.arange(k), counts)
    if layout == PROPORTIONAL:
        # member j of class a wants relative rank (j + 1/2) / n_a
        cls = np.repeat(np.arange(k), counts)
        member = np.concatenate([np.arange(c) for c in counts]) if n else np.empty(0)
        target = (member + 0.5) / counts[cls]
        return cls[np.lexsort((cls, target))]
    raise ValueError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")


class ParticleSystem:
    """N particles with pre-sampled jump streams up to ``horizon``.

    Particle ``i`` (0-based) starts at rank ``initial_rank[i]`` (1-based) and
    belongs to class ``class_of[i]``. Its jump times are
    ``jump_times[offsets[i]:offsets[i + 1]]``.
    """

    def __init__(
        self,
        jump_times: Sequence[Sequence[float]] | Tuple[np.ndarray, np.ndarray],
        initial_rank: Sequence[int],
        horizon: float,
        class_of: Optional[Sequence[int]] = None,
        mixture: Optional[MixtureSpec] = None,
        layout: Optional[str] = None,
    ):
        initial_rank = np.asarray(initial_rank, dtype=np.int64)
        n = initial_rank.size
        if n < 1:
            raise ValueError("need at least one particle")
        if not np.array_equal(np.sort(initial_rank), np.arange(1, n + 1)):
            raise ValueError("initial_rank must be a permutation of 1..N")
        if not horizon > 0:
            raise ValueError(f"horizon must be positive, got {horizon}")

        if isinstance(jump_times, tuple) and len(jump_times) == 2 and isinstance(jump_times[0], np.ndarray):
            counts, flat = jump_times
            counts = np.asarray(counts, dtype=np.int64)
            flat = np.asarray(flat, dtype=float)
        else:
            lists = [np.asarray(ts, dtype=float) for ts in jump_times]
            counts = np.array([len(ts) for ts in lists], dtype=np.int64)
            flat = np.concatenate(lists) if lists else np.empty(0)
        if counts.size != n:
            raise ValueError("need one jump list per particle")
        offsets = np.concatenate([[0], np.cumsum(counts)])
        owner = np.repeat(np.arange(n), counts)
        if flat.size:
            if np.any(flat <= 0) or np.any(flat > horizon):
                raise ValueError("jump times must lie in (0, horizon]")
            same = owner[1:] == owner[:-1]
            if np.any(np.diff(flat)[same] <= 0):
                raise ValueError("jump times must be strictly increasing per particle")

        self.n_particles = n
        self.horizon = float(horizon)
        self.initial_rank = initial_rank
        self.class_of = np.zeros(n, dtype=np.int64) if class_of is None else np.asarray(class_of, dtype=np.int64)
        self.mixture = mixture
        self.layout = layout
        self.offsets = offsets
        self.jump_times = flat
        self.jump_owner = owner

        order = np.lexsort((owner, flat))
        self.event_times = flat[order]
        self.event_particles = owner[order]
        # global event rank of each stored jump
        self.jump_event_rank = np.empty(flat.size, dtype=np.int64)
        self.jump_event_rank[order] = np.arange(flat.size)

        first = np.full(n, np.inf)
        has = counts > 0
        first[has] = flat[offsets[:-1][has]]
        self.first_jump = first
        self._sorted_first = np.sort(first)

        self._lock = threading.Lock()
        self._index: Optional[_RankIndex] = None

    @property
    def n_events(self) -> int:
        return int(self.event_times.size)

    def jumps_of(self, i: int) -> np.ndarray:
        return self.jump_times[self.offsets[i]:self.offsets[i + 1]]

    def _check_time(self, t) -> None:
        t = np.asarray(t)
        if np.any(t < 0) or np.any(t > self.horizon):
            raise ValueError(f"query time outside [0, {self.horizon}]")


class _RankIndex:
    """Fenwick trees tracking the configuration as events are swept in order."""

    def __init__(self, system: ParticleSystem):
        self.system = system
        self.time = 0.0
        self.processed = 0
        self.last_event = np.full(system.n_particles, -1, dtype=np.int64)
        self.by_event = FenwickTree(system.n_events)
        self.by_rank = FenwickTree(system.n_particles)

    def advance(self, t: float) -> None:
        sys_ = self.system
        times, parts = sys_.event_times, sys_.event_particles
        k = self.processed
        while k < times.size and times[k] <= t:
            p = parts[k]
            prev = self.last_event[p]
            if prev >= 0:
                self.by_event.add(int(prev), -1)
            else:
                self.by_rank.add(int(sys_.initial_rank[p]) - 1, 1)
            self.by_event.add(k, 1)
            self.last_event[p] = k
            k += 1
        self.processed = k
        self.time = t

    def position(self, i: int) -> int:
        last = self.last_event[i]
        if last < 0:
            x = int(self.system.initial_rank[i])
            return x + self.by_rank.count_above(x - 1)
        return 1 + self.by_event.count_above(int(last))


def init_system(
    n: int,
    mixture: MixtureSpec,
    layout: str,
    horizon: float,
    rng: np.random.Generator,
) -> ParticleSystem:
    """Lay out ``n`` particles by class and pre-sample all jump streams."""
    if n < 1:
        raise ValueError(f"N must be positive, got {n}")
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    class_by_rank = layout_classes(mixture.weights, n, layout)
    class_of = class_by_rank  # particle i starts at rank i + 1
    initial_rank = np.arange(1, n + 1)

    masses = np.empty(n)
    for a, spec in enumerate(mixture.specs):
        masses[class_of == a] = spec.cumulative(horizon)
    counts, points = unit_poisson_points(masses, rng)

    point_class = np.repeat(class_of, counts)
    times = np.empty_like(points)
    for a, spec in enumerate(mixture.specs):
        sel = point_class == a
        if np.any(sel):
            times[sel] = spec.inverse(points[sel])
    np.minimum(times, horizon, out=times)
    return ParticleSystem((counts, times), initial_rank, horizon, class_of, mixture, layout)


def position_at(system: ParticleSystem, i: int, t: float) -> int:
    """Rank of particle ``i`` at time ``t`` in O(log N) amortized."""
    system._check_time(t)
    if not 0 <= i < system.n_particles:
        raise IndexError(i)
    with system._lock:
        index = system._index
        if index is None or t < index.time:
            index = system._index = _RankIndex(system)
        index.advance(t)
        return index.position(i)


def positions(system: ParticleSystem, t: float) -> np.ndarray:
    """Ranks of all particles at time ``t`` (vectorized, O(E + N log N))."""
    system._check_time(t)
    n = system.n_particles
    k = int(np.searchsorted(system.event_times, t, side="right"))
    recent = system.event_particles[:k][::-1]
    jumped, first_seen = np.unique(recent, return_index=True)
    last_rank = k - 1 - first_seen
    pos = np.empty(n, dtype=np.int64)
    pos[jumped[np.argsort(-last_rank)]] = np.arange(1, jumped.size + 1)
    rest = np.ones(n, dtype=bool)
    rest[jumped] = False
    idle = np.flatnonzero(rest)
    pos[idle[np.argsort(system.initial_rank[idle])]] = np.arange(jumped.size + 1, n + 1)
    return pos


def boundary_fraction(system: ParticleSystem, t):
    """Fraction of particles whose first jump is at or before ``t``."""
    system._check_time(t)
    out = np.searchsorted(system._sorted_first, np.asarray(t, dtype=float), side="right") / system.n_particles
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class EmpiricalSnapshot:
    time: float
    scaled_positions: np.ndarray
    boundary_fraction: float
    grid: np.ndarray
    class_tails: Dict[int, np.ndarray]


def empirical_tail(system: ParticleSystem, t: float, grid: Sequence[float]) -> Dict[int, np.ndarray]:
    """U_a(y, t) = #{i in class a : Y_i(t) >= y} / N for each y in ``grid``."""
    return snapshot(system, t, grid).class_tails


def snapshot(system: ParticleSystem, t: float, grid: Sequence[float]) -> EmpiricalSnapshot:
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0) or np.any(grid >= 1):
        raise ValueError("tail grid values must lie in [0, 1)")
    n = system.n_particles
    offset = positions(system, t) - 1
    k = len(system.mixture) if system.mixture is not None else int(system.class_of.max()) + 1
    # Y_i >= y  <=>  X_i - 1 >= ceil(y N); the slack absorbs rounding in y * N
    thresh = np.ceil(grid * n - 1e-9).astype(np.int64)
    tails = {}
    for a in range(k):
        sorted_offsets = np.sort(offset[system.class_of == a])
        tails[a] = (sorted_offsets.size - np.searchsorted(sorted_offsets, thresh, side="left")) / n
    y = offset / n
    return EmpiricalSnapshot(float(t), y, boundary_fraction(system, t), grid, tails)


def total_jumps_and_inverse(system: ParticleSystem) -> Tuple[Callable, Callable]:
    """Total jump count S(t) and its right-continuous inverse s(u).

    ``s(u)`` is ``inf`` once ``u`` reaches the number of recorded events.
    """
    times = system.event_times

    def total(t):
        out = np.searchsorted(times, np.asarray(t, dtype=float), side="right")
        return int(out) if np.ndim(out) == 0 else out

    def inverse(u):
        u = np.asarray(u, dtype=float)
        idx = np.floor(np.maximum(u, -1.0)).astype(np.int64)
        ok = (idx >= 0) & (idx < times.size)
        out = np.where(ok, times[np.clip(idx, 0, max(times.size - 1, 0))] if times.size else np.inf, np.inf)
        out = np.where(idx < 0, 0.0, out)
        return float(out) if out.ndim == 0 else out

    return total, inverse
