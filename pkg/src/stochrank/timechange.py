"""Common time dependence: Zipf weights, total-jump time change, ranking curve.

When every particle's intensity is ``w_i * A(t)`` for a shared activity
profile, measuring time by the total number of jumps divided by
``Z(N) = sum_i w_i`` removes the profile from the boundary fraction. For Zipf
weights ``w_i = a (N / i)^(1/b)`` the expected position of a particle after
``S`` further jumps in the whole system is the ranking curve ``x_b^N(S)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .intensity import ActivityProfile, CommonProfile, Constant, MixtureSpec
from .ranking import ParticleSystem, boundary_fraction, total_jumps_and_inverse
from .special import gamma_upper, zeta, zeta_partial

SUM_FORM = "sum"
PARETO_FORM = "pareto"
GAMMA_FORM = "gamma"
FORMS = (SUM_FORM, PARETO_FORM, GAMMA_FORM)


@dataclass(frozen=True)
class ZipfFamily:
    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise ValueError("Zipf parameters a and b must be positive")
        if self.n < 1:
            raise ValueError("population size must be positive")

    def weights(self) -> np.ndarray:
        i = np.arange(1, self.n + 1, dtype=float)
        return self.a * (self.n / i) ** (1.0 / self.b)


def zipf_weights_and_Z(fam: ZipfFamily, n: int | None = None) -> Tuple[np.ndarray, float, float]:
    """Weights, the partial total Z(N, n) over the first ``n`` and Z(N)."""
    n = fam.n if n is None else n
    if not 1 <= n <= fam.n:
        raise ValueError(f"subset size must lie in [1, {fam.n}], got {n}")
    w = fam.weights()
    return w, math.fsum(w[:n]), math.fsum(w)


def zipf_Z_asymptotic(fam: ZipfFamily) -> float:
    """Leading large-N behaviour of Z(N) in the three exponent regimes."""
    a, b, n = fam.a, fam.b, fam.n
    if b > 1:
        return a * n * b / (b - 1)
    if b == 1:
        return a * n * math.log(n)
    return a * n ** (1.0 / b) * zeta(1.0 / b)


def pareto_tail(a: float, b: float, w):
    """lambda([w, inf)) = (a / w)^b for w >= a, else 1."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(w >= a, (a / np.maximum(w, a)) ** b, 1.0)
    return float(out) if out.ndim == 0 else out


def zipf_mixture(fam: ZipfFamily, profile: ActivityProfile | None = None) -> MixtureSpec:
    """One atom of weight 1/N per Zipf particle, sharing ``profile``."""
    profile = Constant() if profile is None else profile
    w = fam.weights()
    return MixtureSpec(tuple([1.0 / fam.n] * fam.n), tuple(CommonProfile(float(x), profile) for x in w))


# ---------------------------------------------------------------------------
# Ranking curve
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankingCurve:
    """Expected position after ``S`` total jumps, for Zipf exponent ``b``.

    ``form`` selects the evaluation: ``"sum"`` sums over the N discrete Zipf
    weights; ``"pareto"`` integrates against the Pareto law
    (``N - b (S/zeta_N)^b Gamma(-b, x)``); ``"gamma"`` is the same integral
    rewritten with ``Gamma(1 - b, x)``, valid for ``0 < b < 1``. Here
    ``x = S / (N^(1/b) zeta_N(1/b))`` and ``zeta_N`` is the partial zeta sum.
    """

    n: int
    b: float
    form: str = SUM_FORM

    def __post_init__(self) -> None:
        if self.form not in FORMS:
            raise ValueError(f"unknown form {self.form!r}; expected one of {FORMS}")
        if not self.b > 0 or self.n < 1:
            raise ValueError("need b > 0 and N >= 1")
        if self.form == GAMMA_FORM and not self.b < 1:
            raise ValueError(f"gamma form needs 0 < b < 1, got b={self.b}")

    @property
    def zeta_n(self) -> float:
        return zeta_partial(1.0 / self.b, self.n)


def _sum_form(n: int, b: float, zeta_n: float, S: np.ndarray) -> np.ndarray:
    q = np.arange(1, n + 1, dtype=float) ** (-1.0 / b) / zeta_n
    out = np.empty(S.shape)
    flat = S.ravel()
    res = out.ravel()
    chunk = max(1, 2_000_000 // n)
    for start in range(0, flat.size, chunk):
        s = flat[start:start + chunk]
        res[start:start + chunk] = n - np.exp(-np.outer(s, q)).sum(axis=1)
    return res.reshape(S.shape)


def x_b_curve(curve: RankingCurve, S):
    S_arr = np.asarray(S, dtype=float)
    if np.any(S_arr < 0):
        raise ValueError("total jumps must be non-negative")
    n, b = curve.n, curve.b
    zn = curve.zeta_n
    if curve.form == SUM_FORM:
        out = _sum_form(n, b, zn, S_arr)
    else:
        pos = S_arr > 0
        s = np.where(pos, S_arr, 1.0)
        x = s / (n ** (1.0 / b) * zn)
        scale = (s / zn) ** b
        if curve.form == PARETO_FORM:
            out = n - b * scale * np.asarray(gamma_upper(-b, x))
        else:
            out = n - n * np.exp(-x) + scale * np.asarray(gamma_upper(1.0 - b, x))
        out = np.where(pos, out, 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Periodic profiles
# ---------------------------------------------------------------------------


def periodic_part(profile: ActivityProfile, t):
    """A_p(t) = A(t) - t."""
    t = np.asarray(t, dtype=float)
    out = np.asarray(profile.cumulative(t)) - t
    return float(out) if out.ndim == 0 else out


def periodic_shift(profile: ActivityProfile, t0: float) -> Tuple[float, float]:
    """Return ``(A_p(t0), t0 + A_p(t0))`` for a normalized periodic profile."""
    period = profile.period
    mean = float(profile.cumulative(period)) / period
    if abs(mean - 1.0) > 1e-10:
        raise ValueError(f"profile is not normalized: mean over a period is {mean!r}")
    ap = periodic_part(profile, t0)
    return ap, t0 + ap


def shifted_boundary(mixture: MixtureSpec, t0: float, n_periods) -> np.ndarray:
    """Boundary fraction at t0 + n T from the constant-rate formula with shifted origin.

    All atoms must be :class:`CommonProfile` intensities sharing one profile.
    """
    if not all(isinstance(spec, CommonProfile) for spec in mixture.specs):
        raise TypeError("shifted_boundary needs CommonProfile atoms")
    profile = mixture.specs[0].profile
    if any(spec.profile != profile for spec in mixture.specs):
        raise ValueError("atoms must share one activity profile")
    _, origin = periodic_shift(profile, t0)
    n = np.asarray(n_periods, dtype=float)
    shifted = n * profile.period + origin
    rates = np.array([spec.rate for spec in mixture.specs]).reshape((-1,) + (1,) * n.ndim)
    r = np.asarray(mixture.weights).reshape(rates.shape)
    return 1.0 - np.sum(r * np.exp(-rates * shifted), axis=0)


# ---------------------------------------------------------------------------
# Time-changed boundary
# ---------------------------------------------------------------------------


def _scale(scale: Union[float, ZipfFamily, np.ndarray]) -> float:
    if isinstance(scale, ZipfFamily):
        return zipf_weights_and_Z(scale)[2]
    arr = np.asarray(scale, dtype=float)
    if arr.ndim == 1:
        return math.fsum(arr)
    return float(arr)


def timechange_observable(system: ParticleSystem, scale, t):
    """Boundary fraction at the time the total jump count first exceeds Z(N) t.

    ``scale`` is Z(N) itself, a :class:`ZipfFamily`, or the weight vector.
    """
    z = _scale(scale)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("scaled time must be non-negative")
    _, inverse = total_jumps_and_inverse(system)
    when = np.asarray(inverse(z * t))
    if np.any(~np.isfinite(when)):
        raise ValueError(
            f"horizon too short: scaled time {float(np.max(t)):g} needs more than "
            f"{system.n_events} recorded jumps"
        )
    return boundary_fraction(system, when)


def time_changed_limit(weights, t):
    """1 - (1/N) sum_i exp(-w_i t)."""
    w = np.asarray(weights, dtype=float)
    t = np.asarray(t, dtype=float)
    out = 1.0 - np.mean(np.exp(-np.multiply.outer(t, w)), axis=-1)
    return float(out) if out.ndim == 0 else out
