"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def replay_positions(jump_lists, initial_rank, query_times):
    """Move-to-front replay on an explicit list.

    Returns one array of 1-based positions per query time. Jumps at equal
    times are applied in increasing particle index.
    """
    n = len(initial_rank)
    ranking = [int(i) for i in np.argsort(initial_rank)]  # ranking[k] = particle at rank k+1
    events = sorted((float(t), i) for i, ts in enumerate(jump_lists) for t in ts)
    out = []
    k = 0
    for q in query_times:
        while k < len(events) and events[k][0] <= q:
            p = events[k][1]
            ranking.remove(p)
            ranking.insert(0, p)
            k += 1
        pos = np.empty(n, dtype=np.int64)
        for r, p in enumerate(ranking):
            pos[p] = r + 1
        out.append(pos)
    return out


def thinning_times(density, bound: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Lewis-Shedler thinning of a rate-``bound`` Poisson process."""
    n = rng.poisson(bound * horizon)
    cand = np.sort(rng.uniform(0.0, horizon, size=n))
    keep = rng.uniform(0.0, bound, size=n) < density(cand)
    return cand[keep]


def gamma_quad(s: float, x: float) -> float:
    """Gamma(s, x) by adaptive quadrature after u = x e^z.

    Gamma(s, x) = x^s e^(-x) * integral over [0, inf) of exp(s z - x (e^z - 1)) dz,
    a smooth integrand with doubly exponential decay.
    """
    log_scale = s * math.log(x)

    def f(z):
        if z > 700.0:
            return 0.0
        return math.exp(s * z - x * math.expm1(z))

    # the integrand peaks near z = log(max(s, 1) / x); split there
    peak = max(0.0, math.log(max(s, 1.0) / x))
    head, _ = integrate.quad(f, 0.0, peak + 1.0, epsabs=0.0, epsrel=1e-13, limit=500)
    tail, _ = integrate.quad(f, peak + 1.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=500)
    return math.exp(log_scale - x) * (head + tail)
