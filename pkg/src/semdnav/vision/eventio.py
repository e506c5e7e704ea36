"""Event file reading and writing.

Format: UTF-8 CSV with header ``t_us,x,y,polarity``; polarity 1 = ON,
0 = OFF; timestamps non-decreasing. Lines starting with ``#`` are comments.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np

from .camera import EVENT_DTYPE, CameraModel

HEADER = "t_us,x,y,polarity"


class EventFileError(ValueError):
    def __init__(self, path: str | Path, line: int, msg: str):
        super().__init__(f"{path}:{line}: {msg}")
        self.line = line


def save_events(events: np.ndarray, path: str | Path, comments: Iterable[str] = ()) -> None:
    events = np.asarray(events, dtype=EVENT_DTYPE)
    if events.size and np.any(np.diff(events["t"]) < 0):
        raise ValueError("event timestamps must be non-decreasing")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(HEADER + "\n")
        for t, x, y, p in zip(events["t"].tolist(), events["x"].tolist(),
                              events["y"].tolist(), events["p"].tolist()):
            fh.write(f"{t},{x},{y},{p}\n")


def load_events(path: str | Path, cam: CameraModel = CameraModel()) -> np.ndarray:
    rows: list[tuple[int, int, int, int]] = []
    last_t = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.replace(" ", "") == HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise EventFileError(path, lineno, f"expected 4 fields, got {len(parts)}")
            try:
                t, x, y, p = (int(v) for v in parts)
            except ValueError:
                raise EventFileError(path, lineno, f"non-integer field in {line!r}") from None
            if t < 0:
                raise EventFileError(path, lineno, "negative timestamp")
            if not (0 <= x < cam.width and 0 <= y < cam.height):
                raise EventFileError(path, lineno, f"pixel ({x},{y}) outside sensor")
            if p not in (0, 1):
                raise EventFileError(path, lineno, f"polarity must be 0 or 1, got {p}")
            if last_t is not None and t < last_t:
                raise EventFileError(path, lineno, f"timestamp {t} < previous {last_t}")
            last_t = t
            rows.append((t, x, y, p))
    return np.array(rows, dtype=EVENT_DTYPE)
