"""Planar agent, arenas, geometry metrics and the closed-loop episode."""

from .agent import INTERSACCADE, SACCADE, AgentState, step_agent, wrap_angle
from .environment import (AU, KINDS, Environment, GenerationError, clutter, corridor,
                          empty_box, gap_arena, generate_environment, narrowing_corridor)
from .episode import (COLLIDED, EXITED, TIMEOUT, EpisodeConfig, EpisodeMetrics, EpisodeResult,
                      Trajectory, compute_metrics, run_episode)
from .geometry import (OBSTACLE_SIZE_M, ROBOT_SIZE_M, clearance, occupancy_density,
                       polygons_intersect, robot_collides)

__all__ = [
    "INTERSACCADE", "SACCADE", "AgentState", "step_agent", "wrap_angle",
    "AU", "KINDS", "Environment", "GenerationError", "clutter", "corridor", "empty_box",
    "gap_arena", "generate_environment", "narrowing_corridor",
    "COLLIDED", "EXITED", "TIMEOUT", "EpisodeConfig", "EpisodeMetrics", "EpisodeResult",
    "Trajectory", "compute_metrics", "run_episode",
    "OBSTACLE_SIZE_M", "ROBOT_SIZE_M", "clearance", "occupancy_density", "polygons_intersect",
    "robot_collides",
]
