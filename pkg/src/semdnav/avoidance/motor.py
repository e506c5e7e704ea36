"""Winner-to-turn decoding and the intersaccadic speed law."""

from __future__ import annotations

from dataclasses import dataclass

from ..snn.params import DT_MS

ROBOT_SIZE_M = 0.4
MOT_SIZE = 96
WTA_SIZE = 64
SACCADE_FORWARD_AU = 0.38
DEFAULT_OMEGA_DEG = 187.5
ET = "ET"

STRAIGHT = "straight"
TURN_LEFT = "turn_left"
TURN_RIGHT = "turn_right"


def mps_to_au(v: float) -> float:
    return v / ROBOT_SIZE_M


def au_to_m(d: float) -> float:
    return d * ROBOT_SIZE_M


def mot_injection(winner: int | str, mapping: str = "mirror") -> tuple[str, int]:
    """Motor population and chain index excited by a winner (or the ET unit)."""
    if winner == ET:
        return "MOT1", 0
    i = int(winner)
    if not 0 <= i < WTA_SIZE:
        raise ValueError(f"winner index {i} outside [0, {WTA_SIZE})")
    if i <= 8:
        return "MOT1", 50
    if i <= 31:
        return "MOT1", 2 * i + 32
    if i <= 53:
        if mapping == "literal":
            return "MOT2", 63 - i
        return "MOT2", 2 * (63 - i) + 32
    return "MOT2", 50


@dataclass(frozen=True)
class MotorCommand:
    mode: str
    v_forward: float  # a.u./s
    omega: float  # deg/s, positive turns left
    remaining: int  # ticks

    def __post_init__(self) -> None:
        if self.mode == STRAIGHT and self.omega != 0:
            raise ValueError("straight commands carry no rotation")

    @classmethod
    def straight(cls, v_au: float) -> "MotorCommand":
        return cls(STRAIGHT, v_au, 0.0, 0)

    @property
    def duration_ms(self) -> float:
        return self.remaining * DT_MS


def decode_motor(winner: int | str, omega_deg: float = DEFAULT_OMEGA_DEG,
                 hop_ms: float = 10.0, mapping: str = "mirror") -> MotorCommand:
    """Turn command for a winning decision neuron or an escape-turn spike.

    Left-half winners (index < 32) and the escape unit drive the left-turn
    chain; the excitation wave runs from the injection index to the chain
    end, one hop per ``hop_ms``.
    """
    pop, k = mot_injection(winner, mapping)
    duration_ms = (MOT_SIZE - k) * hop_ms
    mode = TURN_LEFT if pop == "MOT1" else TURN_RIGHT
    sign = 1.0 if mode == TURN_LEFT else -1.0
    return MotorCommand(mode, SACCADE_FORWARD_AU, sign * omega_deg,
                        int(round(duration_ms / DT_MS)))


def intersaccade_velocity(f_ofi_hz: float) -> float:
    """Forward speed in m/s from the mean optic-flow-integrator rate."""
    if f_ofi_hz < 0:
        raise ValueError("firing rate must be non-negative")
    return max(0.0, 1.0 - f_ofi_hz * 0.001)


def gap_min(n_connect: int, fov_deg: float = 140.0, columns: int = 64) -> float:
    """Smallest angular gap (degrees) that can host a winner."""
    if n_connect < 0:
        raise ValueError("n_connect must be >= 0")
    return (2 * n_connect + 1) * fov_deg / columns


class OfiReadout:
    """Mean OFI rate over the current intersaccade."""

    def __init__(self) -> None:
        self.spikes = 0
        self.window_ms = 0.0

    def add(self, n_spikes: int, elapsed_ms: float) -> None:
        self.spikes += n_spikes
        self.window_ms += elapsed_ms

    @property
    def mean_rate(self) -> float:
        if self.window_ms <= 0:
            return 0.0
        return 1000.0 * self.spikes / self.window_ms

    def reset(self) -> None:
        self.spikes = 0
        self.window_ms = 0.0
