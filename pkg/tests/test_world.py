import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semdnav.avoidance import TURN_LEFT, MotorCommand, NetConfig
from semdnav.snn import ConfigError
from semdnav.world import (AU, COLLIDED, EXITED, TIMEOUT, AgentState, EpisodeConfig,
                           GenerationError, Trajectory, clearance, clutter, compute_metrics,
                           corridor, gap_arena, generate_environment, narrowing_corridor,
                           occupancy_density, polygons_intersect, robot_collides, run_episode,
                           step_agent, wrap_angle)
from semdnav.world.geometry import robot_corners, square


def test_straight_motion():
    s = step_agent(AgentState(0.0, 0.0, math.pi / 2), MotorCommand.straight(1.0), 2.0)
    assert s.x == pytest.approx(0.0, abs=1e-12)
    assert s.y == pytest.approx(2.0 * AU)


def test_turn_follows_exact_arc():
    cmd = MotorCommand(TURN_LEFT, 0.38, 90.0, 10_000)
    s = AgentState(0.0, 0.0, 0.0)
    fine = s
    for _ in range(1000):
        fine = step_agent(fine, cmd, 0.001)
    one = step_agent(s, cmd, 1.0)
    assert one.heading == pytest.approx(math.pi / 2)
    assert (one.x, one.y) == pytest.approx((fine.x, fine.y), abs=1e-12)
    r = 0.38 * AU / math.radians(90.0)
    assert (one.x, one.y) == pytest.approx((r, r))


def test_small_literal_turn_rate():
    s = step_agent(AgentState(0.0, 0.0, 0.0), MotorCommand(TURN_LEFT, 0.38, 4.0, 10_000), 1.0)
    assert math.degrees(s.heading) == pytest.approx(4.0)


def test_negative_dt_rejected():
    with pytest.raises(ValueError):
        step_agent(AgentState(0, 0, 0), MotorCommand.straight(1.0), -0.1)


@given(st.floats(-50, 50))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi <= w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)


def test_polygon_intersection():
    a = square(0.0, 0.0, 1.0)
    assert polygons_intersect(a, square(0.9, 0.0, 1.0))
    assert not polygons_intersect(a, square(1.1, 0.0, 1.0))
    diamond = robot_corners(1.2, 0.0, math.pi / 4, 0.4)
    assert not polygons_intersect(a, diamond)  # corner reach 0.283 m < 0.7 m gap
    assert polygons_intersect(a, robot_corners(0.75, 0.0, math.pi / 4, 0.4))


def test_robot_against_walls_and_obstacles():
    walls = np.array([[1.0, -5.0, 1.0, 5.0]])
    assert robot_collides(0.85, 0.0, 0.0, np.zeros((0, 2)), walls)
    assert not robot_collides(0.7, 0.0, 0.0, np.zeros((0, 2)), walls)
    assert robot_collides(0.0, 0.0, 0.0, np.array([[0.65, 0.0]]), np.zeros((0, 4)))


def test_clearance():
    d = clearance(np.array([0.0]), np.array([0.0]), np.array([[3.0, 4.0]]),
                  np.array([[10.0, -1.0, 10.0, 1.0]]))
    assert d[0] == pytest.approx(5.0)


def test_occupancy_density_of_one_square():
    d = occupancy_density((0.0, 0.0, 10.0, 10.0), np.array([[5.0, 5.0]]))
    assert d == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("density", [5.0, 15.0, 25.0])
def test_clutter_density_and_start_clearance(density):
    env = clutter(density, seed=3)
    assert env.density == pytest.approx(density, abs=1.0)
    x, y, h = env.start
    assert not robot_collides(x, y, h, env.obstacles, env.walls)
    assert np.all(np.hypot(env.obstacles[:, 0] - x, env.obstacles[:, 1] - y) >= 2.0)


def test_clutter_is_seeded():
    assert np.array_equal(clutter(15, 1).obstacles, clutter(15, 1).obstacles)
    assert not np.array_equal(clutter(15, 1).obstacles, clutter(15, 2).obstacles)


def test_impossible_density_fails_cleanly():
    with pytest.raises((GenerationError, ConfigError)):
        clutter(90.0, 0)


def test_corridor_geometry():
    env = corridor(12.5, seed=0)
    ys = sorted({w[1] for w in env.walls if w[1] == w[3]})
    assert ys[-1] - ys[0] == pytest.approx(12.5 * AU)
    assert env.exit_x - env.start[0] == pytest.approx(40.0 * AU)
    with pytest.raises(ConfigError):
        corridor(0.5)


def test_gap_arena_gap_widths():
    env = gap_arena(8.0, seed=0)
    widths = dict(zip(env.gap_labels, [hi - lo for lo, hi in env.gaps]))
    assert widths["fixed"] == pytest.approx(10.0 * AU)
    assert widths["variable"] == pytest.approx(8.0 * AU)
    assert env.start[0] < 0


def test_narrowing_corridor_tapers():
    env = narrowing_corridor()
    assert env.params["start_au"] > env.params["end_au"]
    with pytest.raises(ConfigError):
        narrowing_corridor(start_au=2.0, end_au=5.0)


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        generate_environment("maze")


def _traj(x, y, mode=None):
    x = np.asarray(x, float)
    n = x.shape[0]
    return Trajectory(np.arange(n) * 0.005, x, np.asarray(y, float), np.zeros(n),
                      np.zeros(n, np.int8) if mode is None else np.asarray(mode, np.int8))


def test_gap_crossings_counted_per_gap():
    env = gap_arena(8.0)
    lo_f, hi_f = env.gaps[0]
    lo_v, hi_v = env.gaps[1]
    yf, yv = (lo_f + hi_f) / 2, (lo_v + hi_v) / 2
    m = compute_metrics(_traj([-1, 1, -1, -1, 1], [yf, yf, yf, yv, yv]), env, 0.005)
    assert m.gap_crossings == {"fixed": 2, "variable": 1}


def test_intersaccade_speed_ignores_turning_cycles():
    env = corridor(15.0)
    step = 0.01 * AU
    x = env.start[0] + np.array([0, 1, 2, 3, 13]) * step
    m = compute_metrics(_traj(x, np.zeros(5), [0, 0, 0, 0, 1]), env, 0.005)
    assert m.mean_intersaccade_velocity_au == pytest.approx(0.01 / 0.005)


def test_corridor_lateral_stats():
    env = corridor(15.0)
    y = np.array([-1.0, 1.0, -1.0, 1.0]) * AU
    m = compute_metrics(_traj(env.start[0] + np.arange(4) * 0.01, y), env, 0.005)
    assert m.lateral_mean_au == pytest.approx(0.0)
    assert m.lateral_std_au == pytest.approx(1.0)


def test_short_episode_is_deterministic_and_well_formed():
    env = corridor(15.0, seed=1)
    cfg = EpisodeConfig(budget_s=1.0)
    a = run_episode(env, NetConfig(), seed=1, config=cfg)
    b = run_episode(env, NetConfig(), seed=1, config=cfg)
    assert a.outcome in (COLLIDED, EXITED, TIMEOUT)
    assert np.array_equal(a.trajectory.x, b.trajectory.x)
    assert a.raster.equals(b.raster)
    assert np.all(np.diff(a.trajectory.t_s) > 0)
    assert a.events_per_cycle.max() <= cfg.camera.event_cap
    assert a.trajectory.t_s[-1] <= 1.0 + 1e-9


def test_episode_config_validation():
    with pytest.raises(ConfigError):
        EpisodeConfig(budget_s=0.0)
    with pytest.raises(ConfigError):
        EpisodeConfig(samples_per_pixel=0)


def test_fixed_velocity_runs_at_constant_speed():
    env = corridor(15.0, seed=0)
    res = run_episode(env, NetConfig(), seed=0,
                      config=EpisodeConfig(budget_s=1.0, adaptive_velocity=False))
    assert res.metrics.mean_intersaccade_velocity_au == pytest.approx(
        EpisodeConfig().fixed_velocity_au, rel=1e-6)
