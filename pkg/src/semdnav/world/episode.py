"""Closed perception-action loop: render, sense, spike, act, check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from ..avoidance.assemble import assemble, events_to_input
from ..avoidance.config import NetConfig
from ..avoidance.motor import (DEFAULT_OMEGA_DEG, MOT_SIZE, SACCADE_FORWARD_AU, STRAIGHT,
                               TURN_LEFT, TURN_RIGHT, MotorCommand, OfiReadout,
                               intersaccade_velocity, mps_to_au)
from ..snn.network import SpikeRecord
from ..snn.params import DT_MS, ConfigError
from ..vision.camera import CameraModel, generate_events
from ..vision.render import render_frame
from .agent import INTERSACCADE, SACCADE, AgentState, step_agent
from .environment import AU, Environment
from .geometry import clearance, robot_collides

COLLIDED = "collided"
EXITED = "exited"
TIMEOUT = "timeout"

# populations kept in the episode raster; the sensory layers are summarised per cycle
RASTER_POPS = ("WTA", "GI", "ET", "OFI", "MOT1", "MOT2")

# The closed loop sees rendered surfaces whose flow is much slower per
# frame than the characterisation gratings, so it uses a finer threshold.
CLOSED_LOOP_CAMERA = CameraModel(threshold=0.02)


@dataclass(frozen=True)
class EpisodeConfig:
    budget_s: float = 600.0
    adaptive_velocity: bool = True
    fixed_velocity_au: float = 1.0
    omega_deg: float = DEFAULT_OMEGA_DEG
    samples_per_pixel: int = 1
    texture_filter: str = "box"
    camera: CameraModel = CLOSED_LOOP_CAMERA

    def __post_init__(self) -> None:
        if not self.budget_s > 0:
            raise ConfigError("episode.budget_s must be positive")
        if self.fixed_velocity_au < 0:
            raise ConfigError("episode.fixed_velocity_au must be >= 0")
        if self.samples_per_pixel < 1:
            raise ConfigError("episode.samples_per_pixel must be >= 1")


@dataclass
class Trajectory:
    """Pose after every camera cycle; ``mode`` describes motion during the cycle."""

    t_s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    mode: np.ndarray  # 1 = saccade (any turning in the cycle), 0 = intersaccade

    def __len__(self) -> int:
        return self.t_s.shape[0]

    def to_csv(self, path: str | Path, header_lines: Iterable[str] = ()) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for h in header_lines:
                fh.write(f"# {h}\n")
            fh.write("t_s,x_m,y_m,heading_rad,mode\n")
            for t, x, y, h, m in zip(self.t_s.tolist(), self.x.tolist(), self.y.tolist(),
                                     self.heading.tolist(), self.mode.tolist()):
                fh.write(f"{t:.4f},{x:.6f},{y:.6f},{h:.6f},"
                         f"{SACCADE if m else INTERSACCADE}\n")


@dataclass
class EpisodeMetrics:
    density_pct: float
    mean_clearance_au: float
    mean_intersaccade_velocity_au: float
    max_distance_au: float
    gap_crossings: dict[str, int]
    lateral_mean_au: float
    lateral_std_au: float
    penetration_au: float

    def row(self) -> dict[str, float | int]:
        out = {"density_pct": self.density_pct,
               "mean_clearance_au": self.mean_clearance_au,
               "mean_intersaccade_velocity_au": self.mean_intersaccade_velocity_au,
               "max_distance_au": self.max_distance_au,
               "lateral_mean_au": self.lateral_mean_au,
               "lateral_std_au": self.lateral_std_au,
               "penetration_au": self.penetration_au}
        for k, v in sorted(self.gap_crossings.items()):
            out[f"crossings_{k}"] = v
        return out


@dataclass
class EpisodeResult:
    outcome: str
    collision_time_s: float | None
    trajectory: Trajectory
    metrics: EpisodeMetrics
    raster: SpikeRecord
    events_per_cycle: np.ndarray
    sptc_per_cycle: np.ndarray
    exclusivity_violations: int
    spike_counts: dict[str, int] = field(default_factory=dict)
    env_kind: str = ""
    params: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.outcome != COLLIDED

    @property
    def lateral_series_au(self) -> np.ndarray:
        return self.trajectory.y / AU

    def summary_row(self) -> dict[str, object]:
        return {"outcome": self.outcome,
                "collision_time_s": ("" if self.collision_time_s is None
                                     else round(self.collision_time_s, 4)),
                "duration_s": round(float(self.trajectory.t_s[-1]), 4),
                **self.metrics.row()}


def compute_metrics(traj: Trajectory, env: Environment, dt_s: float) -> EpisodeMetrics:
    """Every metric from the trajectory and environment alone."""
    x, y = traj.x, traj.y
    clr = clearance(x, y, env.obstacles, env.walls)
    finite = np.isfinite(clr)
    mean_clr = float(clr[finite].mean() / AU) if finite.any() else math.inf
    # intersaccade speed from the displacement of straight cycles
    straight = traj.mode[1:] == 0
    step = np.hypot(np.diff(x), np.diff(y)) / dt_s / AU
    v_mean = float(step[straight].mean()) if straight.any() else 0.0
    x0, y0 = x[0], y[0]
    max_d = float(np.hypot(x - x0, y - y0).max() / AU)
    crossings = {lab: 0 for lab in env.gap_labels}
    if env.gaps:
        side = np.sign(x)
        for k in np.nonzero(side[1:] * side[:-1] < 0)[0]:
            # y where the path meets x = 0
            a = x[k] / (x[k] - x[k + 1])
            yc = y[k] + a * (y[k + 1] - y[k])
            for (lo, hi), lab in zip(env.gaps, env.gap_labels):
                if lo <= yc <= hi:
                    crossings[lab] += 1
    if env.kind in ("corridor", "narrowing_corridor"):
        lat_mean = float(np.mean(y) / AU)
        lat_std = float(np.std(y) / AU)
    else:
        lat_mean = lat_std = math.nan
    if env.kind == "narrowing_corridor":
        penetration = float((x.max() - env.params["entry_au"] * AU) / AU)
    elif env.kind == "corridor":
        penetration = float((x.max() - x0) / AU)
    else:
        penetration = math.nan
    return EpisodeMetrics(env.density, mean_clr, v_mean, max_d, crossings, lat_mean, lat_std,
                          penetration)


def run_episode(env: Environment, net_config: NetConfig | None = None, seed: int | None = None,
                budget_s: float | None = None, config: EpisodeConfig = EpisodeConfig(),
                raster_pops: tuple[str, ...] = RASTER_POPS) -> EpisodeResult:
    """One closed-loop run.

    Every camera cycle renders the view, turns the frame difference into
    events, advances the network by one cycle, reads the motor layer and
    moves the agent. The run ends on collision, on leaving the arena or when
    the budget is spent. ``seed`` overrides the network seed; ``raster_pops``
    names the populations whose spikes are kept.
    """
    net_config = net_config or NetConfig()
    if seed is not None:
        net_config = net_config.with_(seed=seed)
    if budget_s is not None:
        config = EpisodeConfig(**{**config.__dict__, "budget_s": budget_s})
    cam = config.camera
    net = assemble(net_config)
    scene = env.scene()
    cycle_ticks = int(round(cam.cycle_us / (DT_MS * 1000)))
    dt_s = cam.cycle_us * 1e-6
    hop_ticks = max(1, int(round(net_config.mot_hop_ms / DT_MS)))
    n_cycles = int(math.ceil(config.budget_s / dt_s))
    has_mot = net_config.size("MOT1") > 0 and net_config.size("MOT2") > 0
    has_ofi = net_config.size("OFI") > 0

    state = AgentState(*env.start)
    prev = render_frame(scene, state.pose, cam, config.samples_per_pixel,
                        config.texture_filter)

    ts = np.empty(n_cycles + 1)
    xs = np.empty(n_cycles + 1)
    ys = np.empty(n_cycles + 1)
    hs = np.empty(n_cycles + 1)
    modes = np.zeros(n_cycles + 1, dtype=np.int8)
    ts[0], xs[0], ys[0], hs[0] = 0.0, state.x, state.y, state.heading
    ev_count = np.zeros(n_cycles, dtype=np.int64)
    sptc_count = np.zeros(n_cycles, dtype=np.int64)
    raster_parts: list[SpikeRecord] = []
    pop_totals = np.zeros(len(net.pop_names), dtype=np.int64)
    keep = np.asarray([net.pop_names.index(p) for p in raster_pops if p in net.pop_names])

    ofi = OfiReadout()
    turn_pop = None
    turn_until = -1
    violations = 0
    outcome = TIMEOUT
    collision_t = None
    n_done = 0
    if robot_collides(state.x, state.y, state.heading, env.obstacles, env.walls):
        outcome, collision_t = COLLIDED, 0.0
    for k in range(n_cycles if outcome == TIMEOUT else 0):
        t_us = k * cam.cycle_us
        cur = render_frame(scene, state.pose, cam, config.samples_per_pixel,
                        config.texture_filter)
        events = generate_events(prev, cur, t_us, cam)
        prev = cur
        ev_count[k] = events.shape[0]
        inp, _ = events_to_input(events, t_us, cycle_ticks)
        rec = net.run(cycle_ticks, {"DVS": inp} if "DVS" in net.pop_names else None)
        pop_totals += np.bincount(rec.pop, minlength=len(net.pop_names))
        if "SPTC" in net.pop_names:
            sptc_count[k] = rec.count("SPTC")
        if keep.size:
            m = np.isin(rec.pop, keep)
            if m.any():
                raster_parts.append(SpikeRecord(rec.tick[m], rec.pop[m], rec.index[m],
                                                rec.pop_names))

        if has_mot:
            m1 = rec.pop == net.pop_names.index("MOT1")
            m2 = rec.pop == net.pop_names.index("MOT2")
            mm = m1 | m2
            for t, is1, i in zip(rec.tick[mm].tolist(), m1[mm].tolist(), rec.index[mm].tolist()):
                name = "MOT1" if is1 else "MOT2"
                end = t + (MOT_SIZE - i) * hop_ticks
                if turn_pop is None or t >= turn_until:
                    turn_pop, turn_until = name, end
                elif name == turn_pop:
                    turn_until = max(turn_until, end)
                else:
                    violations += 1
        now = net.tick
        turn_ticks = min(cycle_ticks, max(0, turn_until - now)) if turn_pop else 0
        intersaccade = turn_ticks == 0

        if intersaccade and turn_pop is not None:
            # the saccade has ended: start a fresh OFI window
            turn_pop = None
            ofi.reset()
        if intersaccade and has_ofi:
            ofi.add(rec.count("OFI"), cycle_ticks * DT_MS)
        if config.adaptive_velocity:
            v_au = mps_to_au(intersaccade_velocity(ofi.mean_rate))
        else:
            v_au = config.fixed_velocity_au

        if turn_ticks:
            sign = 1.0 if turn_pop == "MOT1" else -1.0
            cmd = MotorCommand(TURN_LEFT if sign > 0 else TURN_RIGHT, SACCADE_FORWARD_AU,
                               sign * config.omega_deg, turn_ticks)
            state = step_agent(state, cmd, turn_ticks * DT_MS * 1e-3)
            rest = cycle_ticks - turn_ticks
            if rest:
                state = step_agent(state, MotorCommand(STRAIGHT, v_au, 0.0, 0),
                                   rest * DT_MS * 1e-3)
        else:
            state = step_agent(state, MotorCommand(STRAIGHT, v_au, 0.0, 0), dt_s)
        n_done = k + 1
        ts[n_done] = n_done * dt_s
        xs[n_done], ys[n_done], hs[n_done] = state.x, state.y, state.heading
        modes[n_done] = 0 if intersaccade else 1
        if robot_collides(state.x, state.y, state.heading, env.obstacles, env.walls):
            outcome, collision_t = COLLIDED, n_done * dt_s
            break
        if env.is_outside(state.x, state.y):
            outcome = EXITED
            break

    traj = Trajectory(ts[:n_done + 1].copy(), xs[:n_done + 1].copy(), ys[:n_done + 1].copy(),
                      hs[:n_done + 1].copy(), modes[:n_done + 1].copy())
    raster = SpikeRecord.empty(net.pop_names)
    for part in raster_parts:
        raster = raster.concat(part)
    return EpisodeResult(outcome, collision_t, traj, compute_metrics(traj, env, dt_s), raster,
                         ev_count[:n_done], sptc_count[:n_done], violations,
                         dict(zip(net.pop_names, pop_totals.tolist())), env.kind,
                         dict(env.params))
