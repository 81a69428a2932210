from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import replay_positions
from stochrank.fenwick import FenwickTree
from stochrank.intensity import CommonProfile, Homogeneous, Sinusoidal, build_mixture
from stochrank.ranking import (
    BLOCKS,
    PROPORTIONAL,
    ParticleSystem,
    boundary_fraction,
    class_counts,
    empirical_tail,
    init_system,
    layout_classes,
    position_at,
    positions,
    snapshot,
    total_jumps_and_inverse,
)

TWO = build_mixture([(0.5, Homogeneous(1.0)), (0.5, Homogeneous(3.0))])
SINE = build_mixture([(0.5, CommonProfile(1.0, Sinusoidal(1.0, 0.5))),
                      (0.5, CommonProfile(3.0, Sinusoidal(1.0, 0.5)))])


def test_fenwick_counts():
    tree = FenwickTree(10)
    for i in (0, 3, 3, 9):
        tree.add(i, 1)
    assert tree.prefix(3) == 3
    assert tree.count_above(3) == 1
    assert tree.total == 4
    with pytest.raises(IndexError):
        tree.add(10, 1)


def test_largest_remainder_rounding():
    assert class_counts([0.5, 0.5], 5).tolist() == [3, 2]
    assert class_counts([0.2, 0.3, 0.5], 7).tolist() == [1, 2, 4]
    assert class_counts([1 / 3] * 3, 10).sum() == 10


def test_proportional_layout_alternates():
    assert (layout_classes([0.5, 0.5], 4, PROPORTIONAL) + 1).tolist() == [1, 2, 1, 2]


def test_blocks_layout():
    assert (layout_classes([0.5, 0.5], 4, BLOCKS) + 1).tolist() == [1, 1, 2, 2]
    with pytest.raises(ValueError):
        layout_classes([0.25] * 4, 3, BLOCKS)


def test_single_atom_is_all_one_class():
    mix = build_mixture([(1.0, Homogeneous(1.0))])
    system = init_system(7, mix, PROPORTIONAL, 1.0, np.random.default_rng(0))
    assert np.all(system.class_of == 0)
    tails = empirical_tail(system, 0.0, [0.0, 3 / 7, 6 / 7])[0]
    assert np.allclose(tails, [1.0, 4 / 7, 1 / 7])


def test_three_particle_trace():
    system = ParticleSystem([[], [], [0.5]], [1, 2, 3], horizon=2.0)
    assert positions(system, 1.0).tolist() == [2, 3, 1]
    assert [position_at(system, i, 1.0) for i in range(3)] == [2, 3, 1]
    assert positions(system, 0.0).tolist() == [1, 2, 3]
    assert boundary_fraction(system, 1.0) == pytest.approx(1 / 3)
    assert boundary_fraction(system, 0.0) == 0.0


def test_total_jump_counter():
    system = ParticleSystem([[0.2, 0.9], [0.5]], [1, 2], horizon=1.0)
    S, s = total_jumps_and_inverse(system)
    assert S(0.0) == 0 and S(0.6) == 2 and S(1.0) == 3
    assert s(1) == 0.5
    assert s(0.5) == 0.2
    assert S(s(1)) == 2  # floor(u) + 1
    assert math.isinf(s(3))


def test_invalid_systems_rejected():
    with pytest.raises(ValueError):
        ParticleSystem([[], []], [1, 1], 1.0)
    with pytest.raises(ValueError):
        ParticleSystem([[0.5, 0.4]], [1], 1.0)
    with pytest.raises(ValueError):
        ParticleSystem([[1.5]], [1], 1.0)
    system = ParticleSystem([[0.5]], [1], 1.0)
    with pytest.raises(ValueError):
        positions(system, 1.5)
    with pytest.raises(ValueError):
        boundary_fraction(system, -0.1)
    with pytest.raises(ValueError):
        init_system(0, TWO, PROPORTIONAL, 1.0, np.random.default_rng(0))


jump_schedules = st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.just(n),
    # a coarse time lattice forces simultaneous jumps, exercising the tie rule
    st.lists(st.lists(st.integers(1, 12), max_size=4, unique=True), min_size=n, max_size=n),
    st.permutations(list(range(1, n + 1))),
))


@settings(max_examples=300, deadline=None)
@given(jump_schedules)
def test_lazy_positions_match_replay(schedule):
    n, lists, ranks = schedule
    jumps = [sorted(t / 4.0 for t in ts) for ts in lists]
    system = ParticleSystem(jumps, ranks, horizon=3.0)
    grid = sorted({0.0, 3.0, *(t for ts in jumps for t in ts), 0.3, 1.1, 2.6})
    expected = replay_positions(jumps, ranks, grid)
    for t, want in zip(grid, expected):
        assert positions(system, t).tolist() == want.tolist()
        assert [position_at(system, i, t) for i in range(n)] == want.tolist()


def test_position_queries_going_back_in_time():
    system = init_system(50, TWO, PROPORTIONAL, 2.0, np.random.default_rng(4))
    for t in (1.5, 0.3, 1.9, 0.0, 1.0):
        assert [position_at(system, i, t) for i in range(50)] == positions(system, t).tolist()


def test_positions_form_permutations():
    system = init_system(1000, SINE, PROPORTIONAL, 3.0, np.random.default_rng(8))
    for t in np.random.default_rng(1).uniform(0, 3, 100):
        assert np.array_equal(np.sort(positions(system, t)), np.arange(1, 1001))


def test_snapshot_invariants():
    n = 997
    system = init_system(n, SINE, PROPORTIONAL, 3.0, np.random.default_rng(2))
    grid = np.linspace(0, 0.99, 34)
    previous = -1.0
    for t in np.linspace(0, 3, 13):
        snap = snapshot(system, t, grid)
        y = snap.scaled_positions
        assert np.allclose(np.sort(y * n), np.arange(n), rtol=0, atol=1e-9)
        total = snap.class_tails[0] + snap.class_tails[1]
        assert np.all(np.abs(total - (1 - grid)) <= 1 / n + 1e-12)
        counts = np.bincount(system.class_of, minlength=2) / n
        assert snap.class_tails[0][0] == counts[0] and snap.class_tails[1][0] == counts[1]
        assert snap.boundary_fraction >= previous
        previous = snap.boundary_fraction


def test_blocks_tails_at_time_zero():
    system = init_system(10, TWO, BLOCKS, 1.0, np.random.default_rng(0))
    tails = empirical_tail(system, 0.0, [0.5])
    assert tails[0][0] == 0.0 and tails[1][0] == 0.5


def test_total_jumps_step_exactly_at_jump_times():
    system = init_system(40, SINE, PROPORTIONAL, 2.0, np.random.default_rng(6))
    S, _ = total_jumps_and_inverse(system)
    times = np.sort(system.jump_times)
    assert np.array_equal(system.event_times, times)
    assert np.array_equal(S(times), np.arange(1, times.size + 1))
    assert np.array_equal(S(times - 1e-12), np.arange(times.size))


def test_boundary_at_log_two():
    mix = build_mixture([(1.0, Homogeneous(1.0))])
    system = init_system(10**5, mix, PROPORTIONAL, 1.0, np.random.default_rng(12))
    assert abs(boundary_fraction(system, math.log(2)) - 0.5) < 0.01


def test_total_jumps_law_of_large_numbers():
    mix = build_mixture([(1.0, Homogeneous(1.0))])
    system = init_system(10**4, mix, PROPORTIONAL, 1.0, np.random.default_rng(13))
    S, _ = total_jumps_and_inverse(system)
    assert abs(S(1.0) / 10**4 - 1.0) < 0.03
