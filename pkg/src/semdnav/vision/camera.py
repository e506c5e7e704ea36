"""Frame-difference event camera."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

EVENT_DTYPE = np.dtype([("t", np.int64), ("x", np.int16), ("y", np.int16), ("p", np.int8)])

ON = 1
OFF = 0


class CameraEvent(NamedTuple):
    t: int  # microseconds
    x: int
    y: int
    polarity: int  # 1 = ON, 0 = OFF


@dataclass(frozen=True)
class CameraModel:
    width: int = 128
    height: int = 40
    fov_deg: float = 140.0
    rate_hz: float = 200.0
    event_cap: int = 1000
    threshold: float = 0.2

    @property
    def pixel_angle_deg(self) -> float:
        return self.fov_deg / self.width

    @property
    def cycle_us(self) -> int:
        return int(round(1e6 / self.rate_hz))

    def column_angles(self) -> np.ndarray:
        """Ray angle of every column relative to the optical axis, radians.

        Column 0 is the leftmost pixel, i.e. the most counter-clockwise ray.
        """
        cols = np.arange(self.width)
        return np.deg2rad(-(cols - (self.width - 1) / 2.0) * self.pixel_angle_deg)


def empty_events(n: int = 0) -> np.ndarray:
    return np.zeros(n, dtype=EVENT_DTYPE)


def generate_events(prev: np.ndarray, cur: np.ndarray, t_us: int,
                    cam: CameraModel = CameraModel()) -> np.ndarray:
    """Threshold the brightness change between two frames.

    Frames are ``(height, width)`` arrays. Events come out in raster-scan
    order (row by row, left to right) and the list is cut at the per-cycle
    cap.
    """
    if prev.shape != cur.shape:
        raise ValueError(f"frame shapes differ: {prev.shape} vs {cur.shape}")
    diff = cur - prev
    on = diff > cam.threshold
    off = diff < -cam.threshold
    changed = on | off
    ys, xs = np.nonzero(changed)  # row-major == raster order
    n = min(ys.shape[0], cam.event_cap)
    ev = np.empty(n, dtype=EVENT_DTYPE)
    ev["t"] = t_us
    ev["x"] = xs[:n]
    ev["y"] = ys[:n]
    ev["p"] = on[ys[:n], xs[:n]]
    return ev


def as_event_list(events: np.ndarray) -> list[CameraEvent]:
    return [CameraEvent(int(e["t"]), int(e["x"]), int(e["y"]), int(e["p"])) for e in events]


def from_event_list(events: list[CameraEvent] | list[tuple[int, int, int, int]]) -> np.ndarray:
    out = empty_events(len(events))
    for k, e in enumerate(events):
        out[k] = tuple(e)
    return out
