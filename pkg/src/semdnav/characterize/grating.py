"""Synthetic drifting square-wave gratings seen by the event camera."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..vision.camera import EVENT_DTYPE, CameraModel, generate_events

TABLE_FREQUENCIES_HZ = (0.1, 0.5, 1.0, 2.5, 5.0, 10.0)
TABLE_CONTRASTS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
PREFERRED = "preferred"
NULL = "null"


def michelson_contrast(c_printed: float) -> float:
    """Michelson contrast of a print with white stripes and ``1 - c`` dark stripes."""
    if not 0.0 <= c_printed <= 1.0:
        raise ValueError(f"printed contrast must lie in [0, 1], got {c_printed}")
    return c_printed / (2.0 - c_printed)


@dataclass(frozen=True)
class GratingSpec:
    """One stimulus condition.

    ``direction`` is relative to the left-to-right detector population:
    ``preferred`` drifts towards increasing pixel column.
    """

    frequency_hz: float
    contrast: float = 1.0  # printed contrast
    direction: str = PREFERRED
    wavelength_deg: float = 20.0
    duration_s: float = 4.0
    phase: float = 0.0
    sampling: str = "point"

    def __post_init__(self) -> None:
        if self.wavelength_deg <= 0:
            raise ValueError("wavelength must be positive")
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")
        if self.frequency_hz < 0:
            raise ValueError("temporal frequency must be >= 0")
        if self.direction not in (PREFERRED, NULL):
            raise ValueError(f"direction must be {PREFERRED!r} or {NULL!r}")
        if self.sampling not in ("point", "area"):
            raise ValueError("sampling must be 'point' or 'area'")
        michelson_contrast(self.contrast)

    @property
    def speed_deg_s(self) -> float:
        return self.frequency_hz * self.wavelength_deg

    @property
    def levels(self) -> tuple[float, float]:
        """(bright, dark) brightness of the printed stripes."""
        return 1.0, 1.0 - self.contrast


def _square_integral(x: np.ndarray) -> np.ndarray:
    # integral over [0, x] of a unit-period square wave that is 1 on the first half
    fl = np.floor(x)
    return 0.5 * fl + np.minimum(x - fl, 0.5)


def grating_columns(spec: GratingSpec, t_s: float, cam: CameraModel = CameraModel()) -> np.ndarray:
    """Brightness of every column at time ``t_s``.

    ``point`` sampling reads the grating at each pixel centre. With ``area``
    sampling a pixel integrates over its angular footprint, so an edge
    partway across a pixel produces an intermediate level.
    """
    pix = cam.pixel_angle_deg
    sign = 1.0 if spec.direction == PREFERRED else -1.0
    shift = sign * spec.speed_deg_s * t_s
    left = np.arange(cam.width) * pix
    bright, dark = spec.levels
    if spec.sampling == "point":
        u = (left + 0.5 * pix - shift) / spec.wavelength_deg + spec.phase
        return np.where(u - np.floor(u) < 0.5, bright, dark)
    a = (left - shift) / spec.wavelength_deg + spec.phase
    b = a + pix / spec.wavelength_deg
    frac_bright = (_square_integral(b) - _square_integral(a)) / (b - a)
    return dark + (bright - dark) * frac_bright


def synth_grating_events(spec: GratingSpec, cam: CameraModel = CameraModel()) -> np.ndarray:
    """Events of a full recording, sampled once per camera cycle."""
    n_frames = int(round(spec.duration_s * cam.rate_hz))
    prev = np.broadcast_to(grating_columns(spec, 0.0, cam), (cam.height, cam.width))
    chunks = []
    for k in range(1, n_frames):
        t_s = k / cam.rate_hz
        cur = np.broadcast_to(grating_columns(spec, t_s, cam), (cam.height, cam.width))
        ev = generate_events(prev, cur, k * cam.cycle_us, cam)
        if ev.size:
            chunks.append(ev)
        prev = cur
    if not chunks:
        return np.zeros(0, dtype=EVENT_DTYPE)
    return np.concatenate(chunks)
