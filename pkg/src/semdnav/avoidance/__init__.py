"""The collision-avoidance network: wiring, input mapping and motor decoding."""

from .assemble import (TABLE5, assemble, events_to_input, hop_latency_ticks, map_events_to_sptc,
                       realise_rows, wiring_rows)
from .config import NetConfig, decision_only_sizes, motion_only_sizes
from .motor import (ET, STRAIGHT, TURN_LEFT, TURN_RIGHT, MotorCommand, OfiReadout, decode_motor,
                    gap_min, intersaccade_velocity, mot_injection, mps_to_au)

__all__ = [
    "TABLE5", "assemble", "events_to_input", "hop_latency_ticks", "map_events_to_sptc",
    "realise_rows", "wiring_rows", "NetConfig", "decision_only_sizes", "motion_only_sizes",
    "ET", "STRAIGHT", "TURN_LEFT", "TURN_RIGHT", "MotorCommand", "OfiReadout", "decode_motor",
    "gap_min", "intersaccade_velocity", "mot_injection", "mps_to_au",
]
