"""Planar agent kinematics."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..avoidance.motor import STRAIGHT, TURN_LEFT, TURN_RIGHT, MotorCommand
from .geometry import ROBOT_SIZE_M

INTERSACCADE = "intersaccade"
SACCADE = "saccade"


@dataclass(frozen=True)
class AgentState:
    x: float  # m
    y: float  # m
    heading: float  # rad, counter-clockwise from +x
    mode: str = INTERSACCADE
    robot_size: float = ROBOT_SIZE_M

    @property
    def pose(self) -> tuple[float, float, float]:
        return self.x, self.y, self.heading


def wrap_angle(a: float) -> float:
    """Map an angle to [-pi, pi]."""
    return math.remainder(a, 2.0 * math.pi)


def step_agent(state: AgentState, command: MotorCommand, dt: float) -> AgentState:
    """Advance the pose by ``dt`` seconds under ``command``.

    Speeds are in a.u./s and converted with the robot size; turns follow the
    exact circular arc so the pose moves continuously.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    v = command.v_forward * state.robot_size  # m/s
    if command.mode == STRAIGHT:
        return replace(state, x=state.x + v * dt * math.cos(state.heading),
                       y=state.y + v * dt * math.sin(state.heading), mode=INTERSACCADE)
    if command.mode not in (TURN_LEFT, TURN_RIGHT):
        raise ValueError(f"unknown motor mode {command.mode!r}")
    w = math.radians(command.omega)
    h0 = state.heading
    h1 = h0 + w * dt
    if w == 0.0:
        dx, dy = v * dt * math.cos(h0), v * dt * math.sin(h0)
    else:
        r = v / w
        dx = r * (math.sin(h1) - math.sin(h0))
        dy = -r * (math.cos(h1) - math.cos(h0))
    return replace(state, x=state.x + dx, y=state.y + dy, heading=wrap_angle(h1), mode=SACCADE)
