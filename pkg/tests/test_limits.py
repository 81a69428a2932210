from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochrank.intensity import CommonProfile, Homogeneous, PiecewiseLinearCumulative, Sinusoidal, build_mixture
from stochrank.limits import LimitEvaluator, invert_t0, invert_yhat, limit_tail, y_a, y_b, y_c
from stochrank.ranking import BLOCKS, PROPORTIONAL

ONE = LimitEvaluator(build_mixture([(1.0, Homogeneous(1.0))]))
TWO = LimitEvaluator(build_mixture([(0.5, Homogeneous(1.0)), (0.5, Homogeneous(2.0))]))
SINE = LimitEvaluator(build_mixture([(0.5, CommonProfile(1.0, Sinusoidal(1.0, 0.5))),
                                     (0.5, CommonProfile(3.0, Sinusoidal(1.0, 0.5)))]))
THREE_BLOCKS = LimitEvaluator(build_mixture([(0.2, Homogeneous(0.5)), (0.3, Homogeneous(1.0)),
                                             (0.5, Homogeneous(4.0))]), BLOCKS)
EVALUATORS = [ONE, TWO, SINE, THREE_BLOCKS]


def test_boundary_curve_examples():
    assert y_c(ONE, 0.0) == 0.0
    assert y_c(ONE, math.log(2)) == pytest.approx(0.5, abs=1e-15)
    t = np.linspace(0, 3, 7)
    profile = Sinusoidal(1.0, 0.5)
    expected = 1 - 0.5 * np.exp(-profile.cumulative(t)) - 0.5 * np.exp(-3 * profile.cumulative(t))
    assert np.allclose(y_c(SINE, t), expected, atol=1e-15)
    with pytest.raises(ValueError):
        y_c(ONE, -1.0)


def test_top_side_function():
    assert y_a(TWO, 0.0, 2.0) == 0.0
    assert y_a(TWO, 2.0, 2.0) == pytest.approx(y_c(TWO, 2.0), abs=1e-15)
    ev = LimitEvaluator(build_mixture([(1.0, Homogeneous(2.5))]))
    assert y_a(ev, 0.4, 1.0) == pytest.approx(1 - math.exp(-2.5 * 0.4), abs=1e-15)
    with pytest.raises(ValueError):
        y_a(TWO, 1.5, 1.0)


def test_tail_side_function():
    assert y_b(TWO, 0.37, 0.0) == pytest.approx(0.37, abs=1e-15)
    assert y_b(SINE, 0.0, 1.3) == pytest.approx(y_c(SINE, 1.3), abs=1e-15)
    ev = LimitEvaluator(build_mixture([(1.0, Homogeneous(2.5))]))
    assert y_b(ev, 0.3, 0.8) == pytest.approx(1 - 0.7 * math.exp(-2.0), abs=1e-15)
    with pytest.raises(ValueError):
        y_b(TWO, 1.0, 1.0)


def test_inverse_examples():
    w, t = 2.0, 1.0
    ev = LimitEvaluator(build_mixture([(1.0, Homogeneous(w))]))
    assert invert_t0(ev, 0.0, t) == 0.0
    for y in (0.1, 0.5, 0.8):
        assert invert_t0(ev, y, t) == pytest.approx(-math.log(1 - y) / w, abs=1e-9)
    assert invert_t0(ev, y_c(ev, t), t) == pytest.approx(t, abs=1e-9)
    assert invert_yhat(ev, y_c(ev, t), t) == pytest.approx(0.0, abs=1e-9)
    for y in (0.9, 0.95):
        assert invert_yhat(ev, y, t) == pytest.approx(1 - (1 - y) * math.exp(w * t), abs=1e-9)
    assert invert_yhat(ev, 0.42, 0.0) == 0.42
    with pytest.raises(ValueError):
        invert_t0(ev, 0.9, t)
    with pytest.raises(ValueError):
        invert_yhat(ev, 0.5, t)


def test_limit_tail_examples():
    assert limit_tail(TWO, 1, 0.0, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert limit_tail(ONE, 0, 0.9, 1.0) == pytest.approx(0.1, abs=1e-9)
    t = 1.2
    yc = y_c(TWO, t)
    for a, w in ((0, 1.0), (1, 2.0)):
        # both branches give r_a exp(-rho_a((0, t])) on the curve
        assert limit_tail(TWO, a, yc, t) == pytest.approx(0.5 * math.exp(-w * t), abs=1e-9)
        assert limit_tail(TWO, a, yc + 1e-12, t) == pytest.approx(0.5 * math.exp(-w * t), abs=1e-9)


@pytest.mark.parametrize("ev", EVALUATORS)
def test_initial_tails_sum_to_one_minus_y(ev):
    y = np.linspace(0, 0.999, 101)
    total = sum(np.asarray(ev.initial_tail(a, y)) for a in range(ev.n_classes))
    assert np.allclose(total, 1 - y, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(EVALUATORS), st.floats(0, 0.999), st.floats(0, 4))
def test_conservation(ev, y, t):
    assert float(np.sum(ev.limit_tails(y, t))) == pytest.approx(1 - y, abs=1e-9)


@pytest.mark.parametrize("ev", EVALUATORS)
def test_consistency_on_time_grid(ev):
    t = np.linspace(0, 4, 41)
    assert np.allclose(ev.y_a(t, t), ev.y_c(t), atol=1e-12, rtol=0)
    assert np.allclose(ev.y_b(np.zeros_like(t), t), ev.y_c(t), atol=1e-12, rtol=0)


@pytest.mark.parametrize("ev", EVALUATORS)
def test_monotone_characteristic_functions(ev):
    t = 2.0
    assert np.all(np.diff(ev.y_a(np.linspace(0, t, 2001), t)) >= 0)
    assert np.all(np.diff(ev.y_b(np.linspace(0, 0.999, 2001), t)) >= 0)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([ONE, TWO, SINE]), st.floats(0.01, 4), st.floats(0, 1))
def test_round_trips(ev, t, frac):
    yc = ev.y_c(t)
    y = frac * yc
    assert ev.y_a(ev.invert_t0(y, t), t) == pytest.approx(y, abs=1e-9)
    y = yc + frac * (0.999 - yc)
    assert ev.y_b(ev.invert_yhat(y, t), t) == pytest.approx(y, abs=1e-9)


def test_flat_segments_resolve_to_left_edge():
    # no jumps during (1, 2], so y_a(., 3) is flat for t0 in [1, 2]
    spec = PiecewiseLinearCumulative(((0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 2.0)))
    ev = LimitEvaluator(build_mixture([(1.0, spec)]), inversion_tolerance=1e-13)
    plateau = ev.y_a(1.0, 3.0)
    assert ev.y_a(1.7, 3.0) == plateau
    assert ev.invert_t0(plateau, 3.0) == pytest.approx(1.0, abs=1e-12)


def test_broadcasting_shapes():
    y = np.linspace(0, 0.9, 5)[None, :]
    t = np.linspace(0.1, 2, 3)[:, None]
    assert SINE.limit_tails(y, t).shape == (2, 3, 5)
    assert np.shape(SINE.invert_t0(np.zeros((3, 5)), t)) == (3, 5)


def test_unknown_layout_rejected():
    with pytest.raises(ValueError):
        LimitEvaluator(TWO.mixture, "shuffled")
