"""Least-squares fit of the Zipf exponent b to (total jumps, position) records."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .ranking import ParticleSystem
from .timechange import FORMS, GAMMA_FORM, SUM_FORM, RankingCurve, x_b_curve

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_BOUNDS = (0.05, 0.99)


@dataclass(frozen=True)
class ObservationSet:
    """Records of (S, x): jumps in the whole system since a particle's last
    jump, and that particle's position. ``x`` is 1-based for simulated data;
    values in [0, N] are accepted so exact curve samples can be used too."""

    S: np.ndarray
    x: np.ndarray
    n: int

    def __post_init__(self) -> None:
        S = np.asarray(self.S, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if S.shape != x.shape or S.ndim != 1:
            raise ValueError("S and x must be 1-d arrays of equal length")
        if self.n < 1:
            raise ValueError("N must be positive")
        if np.any(S < 0) or not np.all(np.isfinite(S)):
            raise ValueError("S must be finite and non-negative")
        if np.any(x < 0) or np.any(x > self.n):
            raise ValueError(f"positions must lie in [0, {self.n}]")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "x", x)

    def __len__(self) -> int:
        return int(self.S.size)


@dataclass(frozen=True)
class FitResult:
    b_hat: float
    residual_norm: float
    ci_halfwidth: float
    hit_boundary: bool = False


def load_observations(path, n: int) -> ObservationSet:
    """Read a CSV with header ``S,x``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["S", "x"]:
            raise ValueError(f"expected header 'S,x', got {','.join(header)!r}")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    data = np.array(rows, dtype=float).reshape(-1, 2)
    return ObservationSet(data[:, 0], data[:, 1], n)


def write_fit(path, result: FitResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["b_hat", "rms", "ci90"])
        w.writerow([repr(result.b_hat), repr(result.residual_norm), repr(result.ci_halfwidth)])


def generate_observations(system: ParticleSystem, times: Iterable[float] = (),
                          event_counts: Iterable[int] = ()) -> ObservationSet:
    """Observe every particle that has jumped, at each of ``times`` and after
    each of ``event_counts`` system-wide jumps.

    A record is (number of system-wide jumps after the particle's last jump,
    its current position).
    """
    cuts = []
    for t in times:
        system._check_time(t)
        cuts.append(int(np.searchsorted(system.event_times, t, side="right")))
    for k in event_counts:
        if not 0 <= k <= system.n_events:
            raise ValueError(f"event count {k} outside [0, {system.n_events}]")
        cuts.append(int(k))
    S_parts, x_parts = [], []
    for k in cuts:
        recent = system.event_particles[:k][::-1]
        _, since = np.unique(recent, return_index=True)
        # the particle whose last jump has ``since`` later events sits at
        # 1 + (number of distinct particles with an even later last jump)
        order = np.sort(since)
        S_parts.append(order.astype(float))
        x_parts.append(np.arange(1, order.size + 1, dtype=float))
    S = np.concatenate(S_parts) if S_parts else np.empty(0)
    x = np.concatenate(x_parts) if x_parts else np.empty(0)
    return ObservationSet(S, x, system.n_particles)


def _check_informative(obs: ObservationSet) -> None:
    if len(obs) < 10:
        raise ValueError(f"degenerate observations: need at least 10 records, got {len(obs)}")
    if np.all(obs.S == obs.S[0]):
        raise ValueError("degenerate observations: all S values are equal")
    pos = obs.S[obs.S > 0]
    if pos.size == 0 or pos.max() < 10 * pos.min():
        raise ValueError("degenerate observations: S must span at least a decade")


class _Loss:
    """Squared loss evaluated once per distinct S value."""

    def __init__(self, obs: ObservationSet, form: str):
        self.n = obs.n
        self.form = form
        self.S_unique, self.inverse = np.unique(obs.S, return_inverse=True)
        self.x = obs.x

    def aggregates(self, weights: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray, float]:
        c = np.ones_like(self.x) if weights is None else weights
        count = np.bincount(self.inverse, weights=c, minlength=self.S_unique.size)
        xsum = np.bincount(self.inverse, weights=c * self.x, minlength=self.S_unique.size)
        return count, xsum, float(np.sum(c * self.x ** 2))

    def __call__(self, b: float, agg) -> float:
        count, xsum, x2 = agg
        keep = count > 0
        f = self.curve_subset(b, keep)
        return float(x2 - 2.0 * np.dot(xsum[keep], f) + np.dot(count[keep], f * f))

    def curve_subset(self, b: float, keep: np.ndarray) -> np.ndarray:
        return np.asarray(x_b_curve(RankingCurve(self.n, b, self.form), self.S_unique[keep]))


class _CurveTable:
    """Curve values at every distinct S on a uniform b grid, cubic in between."""

    def __init__(self, loss: _Loss, lo: float, hi: float, step: float):
        n = max(4, int(math.ceil((hi - lo) / step)) + 1)
        self.bs = np.linspace(lo, hi, n)
        self.h = self.bs[1] - self.bs[0]
        keep = np.ones(loss.S_unique.size, dtype=bool)
        self.values = np.stack([loss.curve_subset(float(b), keep) for b in self.bs])

    def __call__(self, b: float) -> np.ndarray:
        n = self.bs.size
        j = int(np.clip(np.floor((b - self.bs[0]) / self.h), 1, n - 3))
        u = (b - self.bs[j]) / self.h
        # Lagrange weights on nodes j-1, j, j+1, j+2
        w = np.array([
            -u * (u - 1) * (u - 2) / 6,
            (u + 1) * (u - 1) * (u - 2) / 2,
            -(u + 1) * u * (u - 2) / 2,
            (u + 1) * u * (u - 1) / 6,
        ])
        return w @ self.values[j - 1:j + 3]


def golden_section(fn, lo: float, hi: float, tol: float) -> float:
    """Minimizer of a unimodal ``fn`` on [lo, hi], to within ``tol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def fit_b(
    obs: ObservationSet,
    form: str = SUM_FORM,
    n_boot: int = 200,
    seed: int = 0,
    tol: float = 1e-4,
    bounds: Tuple[float, float] = DEFAULT_BOUNDS,
    boot_window: float = 0.1,
    boot_step: float = 0.0025,
    threads: int = 1,
) -> FitResult:
    """Fit b by golden-section least squares; bootstrap a 90% half-width.

    Each bootstrap refit searches ``b_hat +- boot_window`` (clipped to
    ``bounds``) using the curve tabulated every ``boot_step`` in b and
    interpolated with local cubics. ``hit_boundary`` flags an estimate within ``tol`` of either
    end of ``bounds``.
    """
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}")
    lo, hi = bounds
    if not 0 < lo < hi:
        raise ValueError("bounds must satisfy 0 < lo < hi")
    if form == GAMMA_FORM and hi >= 1:
        raise ValueError("gamma form needs an upper bound below 1")
    _check_informative(obs)

    loss = _Loss(obs, form)
    full = loss.aggregates(None)
    b_hat = golden_section(lambda b: loss(b, full), lo, hi, tol)
    rms = math.sqrt(max(loss(b_hat, full), 0.0) / len(obs))
    hit = b_hat - lo <= tol or hi - b_hat <= tol

    half = float("nan")
    if n_boot > 0:
        blo, bhi = max(lo, b_hat - boot_window), min(hi, b_hat + boot_window)
        streams = np.random.SeedSequence(seed).spawn(n_boot)
        m = len(obs)

        table = _CurveTable(loss, blo, bhi, boot_step)

        def one(ss: np.random.SeedSequence) -> float:
            rng = np.random.default_rng(ss)
            c = np.bincount(rng.integers(0, m, size=m), minlength=m).astype(float)
            count, xsum, x2 = loss.aggregates(c)

            def objective(b: float) -> float:
                f = table(b)
                return float(x2 - 2.0 * np.dot(xsum, f) + np.dot(count, f * f))

            return golden_section(objective, blo, bhi, tol)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                boots = np.array(list(pool.map(one, streams)))
        else:
            boots = np.array([one(ss) for ss in streams])
        q05, q95 = np.quantile(boots, [0.05, 0.95])
        half = float(q95 - q05) / 2.0
    return FitResult(float(b_hat), float(rms), half, bool(hit))


def loss_profile(obs: ObservationSet, bs: Sequence[float], form: str = SUM_FORM) -> np.ndarray:
    """Squared loss at each b in ``bs`` (for checking unimodality)."""
    loss = _Loss(obs, form)
    agg = loss.aggregates(None)
    return np.array([loss(float(b), agg) for b in bs])
