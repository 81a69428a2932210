"""JSON experiment configuration: schema, validation and object construction.

Seed splitting rule: the replica with seed ``s`` at population size ``N``
draws from ``numpy.random.default_rng(SeedSequence([s, N]))``. Replicas are
therefore independent of worker count and scheduling order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import jsonschema
import numpy as np

from .intensity import (
    ActivityProfile,
    CommonProfile,
    Constant,
    Homogeneous,
    IntensitySpec,
    MixtureSpec,
    PiecewiseConstant,
    PiecewiseLinearCumulative,
    Sinusoidal,
    build_mixture,
)
from .ranking import LAYOUTS, PROPORTIONAL
from .timechange import ZipfFamily, zipf_mixture

KINDS = ("boundary_convergence", "tail_convergence", "sup_norm_sweep", "pde_residual", "timechange", "fit")

_GRID = {
    "oneOf": [
        {"type": "array", "items": {"type": "number"}, "minItems": 1},
        {
            "type": "object",
            "properties": {
                "start": {"type": "number"},
                "stop": {"type": "number"},
                "num": {"type": "integer", "minimum": 1},
            },
            "required": ["start", "stop", "num"],
            "additionalProperties": False,
        },
    ]
}

_PROFILE = {
    "type": "object",
    "properties": {
        "type": {"enum": ["constant", "sinusoidal", "piecewise_constant"]},
        "period": {"type": "number", "exclusiveMinimum": 0},
        "amplitude": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "breakpoints": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "levels": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
    },
    "required": ["type"],
    "additionalProperties": False,
}

_INTENSITY = {
    "type": "object",
    "properties": {
        "type": {"enum": ["homogeneous", "common_profile", "piecewise_linear"]},
        "rate": {"type": "number", "exclusiveMinimum": 0},
        "profile": _PROFILE,
        "points": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            "minItems": 2,
        },
    },
    "required": ["type"],
    "additionalProperties": False,
}

SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "stochrank experiment",
    "type": "object",
    "properties": {
        "kind": {"enum": list(KINDS)},
        "mixture": {
            "type": "object",
            "properties": {
                "classes": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {
                            "weight": {"type": "number", "exclusiveMinimum": 0},
                            "intensity": _INTENSITY,
                        },
                        "required": ["weight", "intensity"],
                        "additionalProperties": False,
                    },
                },
                "zipf": {
                    "type": "object",
                    "properties": {
                        "a": {"type": "number", "exclusiveMinimum": 0},
                        "b": {"type": "number", "exclusiveMinimum": 0},
                        "profile": _PROFILE,
                    },
                    "required": ["a", "b"],
                    "additionalProperties": False,
                },
            },
            "oneOf": [{"required": ["classes"]}, {"required": ["zipf"]}],
            "additionalProperties": False,
        },
        "layout": {"enum": list(LAYOUTS)},
        "N": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "times": _GRID,
        "y_grid": _GRID,
        "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "output_dir": {"type": "string"},
        "h": {"type": "number", "exclusiveMinimum": 0},
        "observation_times": _GRID,
        "n_boot": {"type": "integer", "minimum": 0},
        "curve_points": {"type": "integer", "minimum": 2},
    },
    "required": ["mixture"],
    "additionalProperties": False,
}

# what each kind needs beyond the mixture
_NEEDS = {
    "boundary_convergence": ("N", "times", "seeds"),
    "tail_convergence": ("N", "times", "y_grid", "seeds"),
    "sup_norm_sweep": ("N", "times", "seeds"),
    "pde_residual": ("times", "y_grid"),
    "timechange": ("N", "times", "seeds"),
    "fit": ("N", "observation_times", "seeds"),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    mixture: Dict[str, Any]
    layout: str = PROPORTIONAL
    n_values: Tuple[int, ...] = ()
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    y_grid: np.ndarray = field(default_factory=lambda: np.empty(0))
    seeds: Tuple[int, ...] = ()
    horizon: Optional[float] = None
    output_dir: Optional[str] = None
    h: float = 1e-4
    observation_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    n_boot: int = 200
    curve_points: int = 50

    @property
    def is_zipf(self) -> bool:
        return "zipf" in self.mixture

    def zipf_family(self, n: int) -> ZipfFamily:
        z = self.mixture["zipf"]
        return ZipfFamily(float(z["a"]), float(z["b"]), n)

    def mixture_for(self, n: Optional[int] = None) -> MixtureSpec:
        """The mixture to simulate; Zipf mixtures depend on ``n``."""
        if self.is_zipf:
            if n is None:
                raise ConfigError("a Zipf mixture needs a population size")
            profile = _profile(self.mixture["zipf"].get("profile"), "mixture.zipf.profile")
            return zipf_mixture(self.zipf_family(n), profile)
        atoms = []
        for j, c in enumerate(self.mixture["classes"]):
            atoms.append((float(c["weight"]), _intensity(c["intensity"], f"mixture.classes.{j}.intensity")))
        try:
            return build_mixture(atoms)
        except ValueError as exc:
            raise ConfigError(f"config field 'mixture.classes': {exc}") from exc

    def run_horizon(self) -> float:
        last = float(max(self.times[-1] if self.times.size else 0.0,
                         self.observation_times[-1] if self.observation_times.size else 0.0))
        if self.horizon is not None:
            return float(self.horizon)
        if self.kind == "timechange":
            # scaled time t needs about Z(N) t jumps; leave room for fluctuations
            return 1.5 * last + 1.0
        return last


def _grid(value, name: str) -> np.ndarray:
    if isinstance(value, dict):
        arr = np.linspace(value["start"], value["stop"], value["num"])
    else:
        arr = np.asarray(value, dtype=float)
    if np.any(np.diff(arr) <= 0):
        raise ConfigError(f"config field '{name}': grid must be sorted ascending without repeats")
    return arr


def _profile(decl: Optional[Dict[str, Any]], where: str) -> ActivityProfile:
    if decl is None:
        return Constant()
    kind = decl["type"]
    try:
        if kind == "constant":
            return Constant(period=float(decl.get("period", 1.0)))
        if kind == "sinusoidal":
            return Sinusoidal(float(decl.get("period", 1.0)), float(decl.get("amplitude", 0.5)))
        return PiecewiseConstant(tuple(decl.get("breakpoints", ())), tuple(decl.get("levels", ())))
    except ValueError as exc:
        raise ConfigError(f"config field '{where}': {exc}") from exc


def _intensity(decl: Dict[str, Any], where: str) -> IntensitySpec:
    kind = decl["type"]
    try:
        if kind == "homogeneous":
            return Homogeneous(float(_require(decl, "rate", where)))
        if kind == "common_profile":
            return CommonProfile(float(_require(decl, "rate", where)), _profile(decl.get("profile"), where + ".profile"))
        points = tuple((float(p[0]), float(p[1])) for p in _require(decl, "points", where))
        return PiecewiseLinearCumulative(points)
    except ValueError as exc:
        raise ConfigError(f"config field '{where}': {exc}") from exc


def _require(decl: Dict[str, Any], key: str, where: str):
    if key not in decl:
        raise ConfigError(f"config field '{where}.{key}': required for type {decl['type']!r}")
    return decl[key]


def parse_config(raw: Dict[str, Any], kind: Optional[str] = None) -> ExperimentConfig:
    """Validate a decoded JSON config and build an :class:`ExperimentConfig`.

    ``kind`` (from the CLI subcommand) must agree with the file's ``kind`` if
    both are given.
    """
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config field '{path}': {err.message}")

    file_kind = raw.get("kind")
    if kind is not None and file_kind is not None and kind != file_kind:
        raise ConfigError(f"config field 'kind': file says {file_kind!r} but {kind!r} was requested")
    kind = kind or file_kind
    if kind not in KINDS:
        raise ConfigError("config field 'kind': missing; give it in the file or as a subcommand")
    for key in _NEEDS[kind]:
        if key not in raw:
            raise ConfigError(f"config field '{key}': required for {kind}")

    n_values = tuple(int(n) for n in raw.get("N", ()))
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ConfigError("config field 'N': must be strictly increasing")
    if kind in ("tail_convergence", "pde_residual") and "zipf" in raw["mixture"]:
        raise ConfigError(f"config field 'mixture.zipf': {kind} needs a class mixture")
    if kind in ("timechange", "fit") and "zipf" not in raw["mixture"]:
        raise ConfigError(f"config field 'mixture.zipf': {kind} experiments need a Zipf mixture")

    cfg = ExperimentConfig(
        kind=kind,
        mixture=raw["mixture"],
        layout=raw.get("layout", PROPORTIONAL),
        n_values=n_values,
        times=_grid(raw["times"], "times") if "times" in raw else np.empty(0),
        y_grid=_grid(raw["y_grid"], "y_grid") if "y_grid" in raw else np.empty(0),
        seeds=tuple(int(s) for s in raw.get("seeds", ())),
        horizon=float(raw["horizon"]) if "horizon" in raw else None,
        output_dir=raw.get("output_dir"),
        h=float(raw.get("h", 1e-4)),
        observation_times=(_grid(raw["observation_times"], "observation_times")
                           if "observation_times" in raw else np.empty(0)),
        n_boot=int(raw.get("n_boot", 200)),
        curve_points=int(raw.get("curve_points", 50)),
    )
    if cfg.times.size and cfg.times[0] < 0:
        raise ConfigError("config field 'times': times must be non-negative")
    if cfg.y_grid.size and (cfg.y_grid[0] < 0 or cfg.y_grid[-1] >= 1):
        raise ConfigError("config field 'y_grid': values must lie in [0, 1)")
    if kind != "pde_residual" and kind != "timechange":
        latest = max(cfg.times[-1] if cfg.times.size else 0.0,
                     cfg.observation_times[-1] if cfg.observation_times.size else 0.0)
        if cfg.run_horizon() < latest:
            raise ConfigError(f"config field 'horizon': {cfg.run_horizon()} is shorter than the time grid ({latest})")
    cfg.mixture_for(n_values[0] if n_values else 1)  # surface declaration errors early
    return cfg


def load_config(path, kind: Optional[str] = None) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON ({exc})") from exc
    return parse_config(raw, kind)


def replica_rng(seed: int, n: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, n]))
