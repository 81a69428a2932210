"""Run configured experiments and write CSV tables.

Every run writes ``summary.csv`` (kind, N, metric, value) plus per-size tables
``<kind>_<N>.csv``. Floats are written with ``repr`` so repeated runs with the
same config and seeds produce byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np

from .burgers import boundary_residual, initial_residual, residual_grid
from .config import ExperimentConfig, replica_rng
from .estimation import ObservationSet, fit_b, generate_observations, write_fit
from .limits import LimitEvaluator
from .ranking import boundary_fraction, init_system, snapshot
from .timechange import (
    RankingCurve,
    time_changed_limit,
    timechange_observable,
    x_b_curve,
    zipf_weights_and_Z,
)

Row = Tuple


def format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Row]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def _pool_map(fn: Callable, items: List, threads: int) -> List:
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _replicas(cfg: ExperimentConfig, threads: int, work: Callable) -> dict:
    """Run ``work(n, system)`` for every (N, seed); results keyed by N in seed order."""
    horizon = cfg.run_horizon()
    tasks = [(n, s) for n in cfg.n_values for s in cfg.seeds]

    def one(task):
        n, s = task
        system = init_system(n, cfg.mixture_for(n), cfg.layout, horizon, replica_rng(s, n))
        return work(n, system)

    results = _pool_map(one, tasks, threads)
    out: dict = {n: [] for n in cfg.n_values}
    for (n, _), r in zip(tasks, results):
        out[n].append(r)
    return out


def _boundary(cfg: ExperimentConfig, out: Path, threads: int) -> List[Row]:
    res = _replicas(cfg, threads, lambda n, sys_: np.asarray(boundary_fraction(sys_, cfg.times)))
    summary = []
    for n, curves in res.items():
        ev = LimitEvaluator(cfg.mixture_for(n if cfg.is_zipf else None), cfg.layout)
        limit = np.asarray(ev.y_c(cfg.times))
        curves = np.stack(curves)
        write_csv(out / f"{cfg.kind}_{n}.csv", ["t", "Yc_emp"], zip(cfg.times, curves.mean(axis=0)))
        dev = np.max(np.abs(curves - limit), axis=1)
        summary += [(cfg.kind, n, "max_deviation_mean", dev.mean()), (cfg.kind, n, "max_deviation_max", dev.max())]
    return summary


def _tails(cfg: ExperimentConfig, out: Path, threads: int) -> List[Row]:
    ev = LimitEvaluator(cfg.mixture_for(), cfg.layout)
    tt, yy = np.meshgrid(cfg.times, cfg.y_grid, indexing="ij")
    limit = ev.limit_tails(yy, tt)  # (class, t, y)
    k = ev.n_classes
    write_csv(out / f"{cfg.kind}_limit.csv", ["t", "y", "alpha", "U_limit"],
              ((t, y, a + 1, limit[a, i, j]) for i, t in enumerate(cfg.times)
               for j, y in enumerate(cfg.y_grid) for a in range(k)))

    def work(n, sys_):
        return np.stack([np.stack([snapshot(sys_, t, cfg.y_grid).class_tails[a] for t in cfg.times])
                         for a in range(k)])

    res = _replicas(cfg, threads, work)
    summary = []
    for n, tails in res.items():
        tails = np.stack(tails)
        mean = tails.mean(axis=0)
        write_csv(out / f"{cfg.kind}_{n}.csv", ["t", "y", "alpha", "U_emp"],
                  ((t, y, a + 1, mean[a, i, j]) for i, t in enumerate(cfg.times)
                   for j, y in enumerate(cfg.y_grid) for a in range(k)))
        dev = np.max(np.abs(tails - limit), axis=(1, 2, 3))
        summary += [(cfg.kind, n, "max_deviation_mean", dev.mean()), (cfg.kind, n, "max_deviation_max", dev.max())]
    return summary


def _sup_norm(cfg: ExperimentConfig, out: Path, threads: int) -> List[Row]:
    rows = _boundary(cfg, out, threads)
    return [(k, n, m.replace("max_deviation", "sup_deviation"), v) for k, n, m, v in rows]


def _pde(cfg: ExperimentConfig, out: Path, threads: int) -> List[Row]:
    ev = LimitEvaluator(cfg.mixture_for(), cfg.layout)
    records, maxima = [], []
    # the finer step keeps the same exclusion distance around the curve y = y_c(t)
    for h, margin in ((cfg.h, 10.0), (cfg.h / 2, 20.0)):
        recs = residual_grid(ev, cfg.y_grid, cfg.times, h=h, margin=margin)
        records += recs
        maxima.append(max((abs(r["residual"]) for r in recs), default=float("nan")))
    write_csv(out / f"{cfg.kind}.csv", ["y", "t", "alpha", "residual", "h"],
              ((r["y"], r["t"], r["alpha"], r["residual"], r["h"]) for r in records))
    ratio = maxima[0] / maxima[1] if maxima[1] else float("inf")
    return [
        (cfg.kind, "", "max_residual_h", maxima[0]),
        (cfg.kind, "", "max_residual_h_half", maxima[1]),
        (cfg.kind, "", "halving_ratio", ratio),
        (cfg.kind, "", "boundary_residual", boundary_residual(ev, cfg.times)),
        (cfg.kind, "", "initial_residual", initial_residual(ev, cfg.y_grid)),
    ]


def _timechange(cfg: ExperimentConfig, out: Path, threads: int) -> List[Row]:
    res = _replicas(cfg, threads, lambda n, sys_: np.asarray(
        timechange_observable(sys_, cfg.zipf_family(n), cfg.times)))
    summary = []
    b = cfg.zipf_family(1).b
    for n, curves in res.items():
        fam = cfg.zipf_family(n)
        weights, _, z = zipf_weights_and_Z(fam)
        limit = time_changed_limit(weights, cfg.times)
        curves = np.stack(curves)
        write_csv(out / f"{cfg.kind}_{n}.csv", ["t_scaled", "Yc_timechanged", "Yc_limit"],
                  zip(cfg.times, curves.mean(axis=0), limit))
        S = np.geomspace(1.0, 50.0 * z, cfg.curve_points)
        x_sum = x_b_curve(RankingCurve(n, b, "sum"), S)
        x_gamma = x_b_curve(RankingCurve(n, b, "gamma"), S) if b < 1 else np.full_like(S, np.nan)
        write_csv(out / f"{cfg.kind}_curve_{n}.csv", ["S", "x_sum_form", "x_gamma_form"], zip(S, x_sum, x_gamma))
        dev = np.max(np.abs(curves - limit), axis=1)
        summary += [(cfg.kind, n, "max_deviation_mean", dev.mean()), (cfg.kind, n, "max_deviation_max", dev.max())]
    return summary


def _fit(cfg: ExperimentConfig, out: Path, threads: int) -> List[Row]:
    res = _replicas(cfg, threads, lambda n, sys_: generate_observations(sys_, cfg.observation_times))
    summary = []
    b_true = cfg.zipf_family(1).b
    for n, sets in res.items():
        obs = ObservationSet(np.concatenate([o.S for o in sets]), np.concatenate([o.x for o in sets]), n)
        write_csv(out / f"{cfg.kind}_{n}_observations.csv", ["S", "x"], zip(obs.S, obs.x))
        result = fit_b(obs, n_boot=cfg.n_boot, seed=cfg.seeds[0])
        write_fit(out / f"{cfg.kind}_{n}.csv", result)
        summary += [
            (cfg.kind, n, "b_hat", result.b_hat),
            (cfg.kind, n, "ci90", result.ci_halfwidth),
            (cfg.kind, n, "abs_error", abs(result.b_hat - b_true)),
            (cfg.kind, n, "hit_boundary", int(result.hit_boundary)),
        ]
    return summary


_RUNNERS = {
    "boundary_convergence": _boundary,
    "tail_convergence": _tails,
    "sup_norm_sweep": _sup_norm,
    "pde_residual": _pde,
    "timechange": _timechange,
    "fit": _fit,
}


def run_experiment(cfg: ExperimentConfig, out_dir=None, seeds: Sequence[int] | None = None,
                   threads: int = 1) -> List[Row]:
    """Run ``cfg`` and write its tables; returns the summary rows."""
    if seeds is not None:
        if not seeds:
            raise ValueError("at least one seed is required")
        cfg = dataclasses.replace(cfg, seeds=tuple(int(s) for s in seeds))
    target = out_dir if out_dir is not None else cfg.output_dir
    if target is None:
        raise ValueError("no output directory: pass --out or set output_dir")
    out = Path(target)
    out.mkdir(parents=True, exist_ok=True)
    summary = _RUNNERS[cfg.kind](cfg, out, max(1, int(threads)))
    write_csv(out / "summary.csv", ["kind", "N", "metric", "value"], summary)
    return summary
