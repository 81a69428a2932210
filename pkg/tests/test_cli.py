from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from stochrank.cli import main
from stochrank.config import ConfigError, parse_config

HOMOGENEOUS = {"classes": [{"weight": 1.0, "intensity": {"type": "homogeneous", "rate": 1.0}}]}
SINE_PAIR = {"classes": [
    {"weight": 0.5, "intensity": {"type": "common_profile", "rate": 1.0,
                                  "profile": {"type": "sinusoidal", "period": 1.0, "amplitude": 0.5}}},
    {"weight": 0.5, "intensity": {"type": "common_profile", "rate": 3.0,
                                  "profile": {"type": "sinusoidal", "period": 1.0, "amplitude": 0.5}}},
]}
ZIPF = {"zipf": {"a": 1.0, "b": 0.872, "profile": {"type": "sinusoidal", "period": 1.0, "amplitude": 0.5}}}

CONFIGS = {
    "boundary_convergence": {"mixture": HOMOGENEOUS, "N": [100, 1000, 10000],
                             "times": {"start": 0.1, "stop": 3.0, "num": 30}, "seeds": [0, 1, 2, 3]},
    "tail_convergence": {"mixture": SINE_PAIR, "N": [500], "times": [0.5, 1.0],
                         "y_grid": {"start": 0.0, "stop": 0.9, "num": 10}, "seeds": [0, 1]},
    "sup_norm_sweep": {"mixture": SINE_PAIR, "N": [200, 2000], "times": {"start": 0.01, "stop": 2.0, "num": 50},
                       "seeds": [0, 1]},
    "pde_residual": {"mixture": SINE_PAIR, "times": {"start": 0.1, "stop": 2.0, "num": 6},
                     "y_grid": {"start": 0.01, "stop": 0.99, "num": 6}},
    "timechange": {"mixture": ZIPF, "N": [100], "times": {"start": 0.1, "stop": 2.0, "num": 8}, "seeds": [0, 1]},
    "fit": {"mixture": ZIPF, "N": [300], "observation_times": [1.0, 2.0, 3.0], "seeds": [0], "n_boot": 10},
}

HEADERS = {
    "boundary_convergence": ["t", "Yc_emp"],
    "sup_norm_sweep": ["t", "Yc_emp"],
    "tail_convergence": ["t", "y", "alpha", "U_emp"],
    "pde_residual": ["y", "t", "alpha", "residual", "h"],
    "timechange": ["t_scaled", "Yc_timechanged", "Yc_limit"],
    "fit": ["b_hat", "rms", "ci90"],
}


def _write(tmp_path, kind, **overrides):
    cfg = dict(CONFIGS[kind], **overrides)
    path = tmp_path / f"{kind}.json"
    path.write_text(json.dumps(cfg))
    return path


def _summary(path):
    with open(path / "summary.csv") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("kind", sorted(CONFIGS))
def test_every_kind_runs_with_declared_headers(tmp_path, kind, capsys):
    out = tmp_path / "out"
    assert main([kind, "--config", str(_write(tmp_path, kind)), "--out", str(out)]) == 0
    assert (out / "summary.csv").read_text().splitlines()[0] == "kind,N,metric,value"
    tables = sorted(p.name for p in out.glob(f"{kind}*.csv"))
    assert tables
    main_table = out / (f"{kind}.csv" if kind == "pde_residual" else f"{kind}_{CONFIGS[kind].get('N', [0])[0]}.csv")
    assert main_table.read_text().splitlines()[0].split(",") == HEADERS[kind]
    assert kind in capsys.readouterr().out


def test_outputs_are_bit_identical(tmp_path):
    for kind in ("boundary_convergence", "timechange", "fit"):
        cfg = _write(tmp_path, kind)
        a, b = tmp_path / f"{kind}_a", tmp_path / f"{kind}_b"
        assert main([kind, "--config", str(cfg), "--out", str(a)]) == 0
        assert main([kind, "--config", str(cfg), "--out", str(b), "--threads", "3"]) == 0
        files = sorted(p.name for p in a.iterdir())
        assert files == sorted(p.name for p in b.iterdir())
        for name in files:
            assert (a / name).read_bytes() == (b / name).read_bytes()


def test_boundary_deviation_decreases_with_n(tmp_path):
    out = tmp_path / "out"
    main(["boundary_convergence", "--config", str(_write(tmp_path, "boundary_convergence")), "--out", str(out)])
    devs = [float(r["value"]) for r in _summary(out) if r["metric"] == "max_deviation_mean"]
    assert devs == sorted(devs, reverse=True)


def test_pde_halving_ratio(tmp_path):
    out = tmp_path / "out"
    main(["pde_residual", "--config", str(_write(tmp_path, "pde_residual")), "--out", str(out)])
    ratio = next(float(r["value"]) for r in _summary(out) if r["metric"] == "halving_ratio")
    assert 3.5 <= ratio <= 4.5


def test_fit_experiment_recovers_b(tmp_path):
    out = tmp_path / "out"
    main(["fit", "--config", str(_write(tmp_path, "fit", N=[697], n_boot=20)), "--out", str(out)])
    err = next(float(r["value"]) for r in _summary(out) if r["metric"] == "abs_error")
    assert err <= 0.05


def test_seed_override_changes_output(tmp_path):
    cfg = _write(tmp_path, "boundary_convergence")
    main(["boundary_convergence", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["boundary_convergence", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seeds", "5,6"])
    assert (tmp_path / "a" / "summary.csv").read_bytes() != (tmp_path / "b" / "summary.csv").read_bytes()


@pytest.mark.parametrize("patch,field", [
    ({"N": [1000, 100]}, "N"),
    ({"times": [0.5, 0.2]}, "times"),
    ({"seeds": []}, "seeds"),
    ({"mixture": {"classes": [{"weight": 0.6, "intensity": {"type": "homogeneous", "rate": 1.0}},
                              {"weight": 0.6, "intensity": {"type": "homogeneous", "rate": 2.0}}]}},
     "mixture.classes"),
    ({"mixture": {"classes": [{"weight": 1.0, "intensity": {"type": "homogeneous", "rate": -1.0}}]}},
     "mixture.classes.0.intensity.rate"),
    ({"layout": "diagonal"}, "layout"),
    ({"horizon": 1.0}, "horizon"),
    ({"colour": "red"}, "<root>"),
])
def test_invalid_fields_are_named(patch, field):
    raw = dict(CONFIGS["boundary_convergence"], **patch)
    with pytest.raises(ConfigError, match=f"'{field}"):
        parse_config(raw, "boundary_convergence")


def test_kind_must_be_known_and_consistent(tmp_path):
    with pytest.raises(ConfigError, match="kind"):
        parse_config(CONFIGS["boundary_convergence"])
    with pytest.raises(ConfigError, match="kind"):
        parse_config(dict(CONFIGS["boundary_convergence"], kind="fit"), "boundary_convergence")
    with pytest.raises(ConfigError, match="zipf"):
        parse_config(dict(CONFIGS["fit"], mixture=HOMOGENEOUS), "fit")


def test_cli_reports_errors_with_status(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["fit", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "invalid JSON" in capsys.readouterr().err
    cfg = _write(tmp_path, "boundary_convergence")
    assert main(["boundary_convergence", "--config", str(cfg)]) == 2
    assert "output directory" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["boundary_convergence", "--config", str(cfg), "--seeds", "a,b"])


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, "pde_residual")
    done = subprocess.run([sys.executable, "-m", "stochrank", "pde_residual", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
    assert "halving_ratio" in done.stdout
