"""Arena generators: clutter, corridors, gap arenas, empty box, narrowing corridor."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from ..snn.params import ConfigError
from ..vision.render import Scene, SceneSurface
from .geometry import OBSTACLE_SIZE_M, ROBOT_SIZE_M, occupancy_density

AU = ROBOT_SIZE_M
START_FREE_RADIUS_M = 2.0
MAX_DENSITY = 38.0
PLACEMENT_ATTEMPTS = 1000
DEFAULT_PERIOD_M = 0.2

KINDS = ("clutter", "corridor", "gap_arena", "empty_box", "narrowing_corridor")


class GenerationError(RuntimeError):
    pass


@dataclass
class Environment:
    """A planar arena.

    ``walls`` rows are segments ``(x0, y0, x1, y1)``; ``obstacles`` rows are
    centres of 1 m squares. The episode ends with ``exited`` once the agent's
    centre leaves ``bounds`` (or, for corridors, passes ``exit_x``).
    """

    kind: str
    bounds: tuple[float, float, float, float]
    obstacles: np.ndarray
    walls: np.ndarray
    start: tuple[float, float, float]
    params: dict = field(default_factory=dict)
    exit_x: float | None = None
    gaps: list[tuple[float, float]] = field(default_factory=list)  # (y_lo, y_hi) on x = 0
    gap_labels: list[str] = field(default_factory=list)
    period_m: float = DEFAULT_PERIOD_M

    def surfaces(self) -> list[SceneSurface]:
        """Every obstacle face and wall, each carrying a grating."""
        out = []
        h = OBSTACLE_SIZE_M / 2.0
        for cx, cy in self.obstacles:
            corners = [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)]
            for k in range(4):
                (a, b), (c, d) = corners[k], corners[(k + 1) % 4]
                out.append(SceneSurface(a, b, c, d, period=self.period_m))
        for x0, y0, x1, y1 in self.walls:
            out.append(SceneSurface(x0, y0, x1, y1, period=self.period_m))
        return out

    def scene(self) -> Scene:
        return Scene(self.surfaces())

    @property
    def density(self) -> float:
        return occupancy_density(self.bounds, self.obstacles)

    def is_outside(self, x: float, y: float) -> bool:
        if self.exit_x is not None and x >= self.exit_x:
            return True
        x0, y0, x1, y1 = self.bounds
        return not (x0 <= x <= x1 and y0 <= y <= y1)

    def to_csv(self, path: str | Path, header_lines: Iterable[str] = ()) -> None:
        """Arena bounds, walls and obstacle centres, one item per row."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for h in header_lines:
                fh.write(f"# {h}\n")
            fh.write("item,x0_m,y0_m,x1_m,y1_m\n")
            fh.write("bounds," + ",".join(f"{v:.6f}" for v in self.bounds) + "\n")
            for w in self.walls:
                fh.write("wall," + ",".join(f"{v:.6f}" for v in w) + "\n")
            for cx, cy in self.obstacles:
                fh.write(f"obstacle,{cx:.6f},{cy:.6f},,\n")


def _box(x0: float, y0: float, x1: float, y1: float) -> list[tuple[float, float, float, float]]:
    return [(x0, y0, x1, y0), (x1, y0, x1, y1), (x1, y1, x0, y1), (x0, y1, x0, y0)]


def _walls(rows) -> np.ndarray:
    return np.asarray(rows, dtype=np.float64).reshape(-1, 4)


def clutter(density: float, seed: int, arena_m: float = 20.0) -> Environment:
    """Randomly placed, non-overlapping 1 m blocks; no walls.

    The agent starts in the centre facing a seeded random direction; no block
    centre lies within 2 m of the start.
    """
    if not 0.0 <= density <= MAX_DENSITY:
        raise ConfigError(f"density must lie in [0, {MAX_DENSITY}] %, got {density}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    half = arena_m / 2.0
    bounds = (-half, -half, half, half)
    heading = float(rng.uniform(-np.pi, np.pi))
    n_target = int(round(density / 100.0 * arena_m * arena_m / OBSTACLE_SIZE_M ** 2))
    h = OBSTACLE_SIZE_M / 2.0
    # a cell grid makes the overlap test cheap
    cells: dict[tuple[int, int], list[tuple[float, float]]] = {}
    placed: list[tuple[float, float]] = []
    for _ in range(n_target):
        for _attempt in range(PLACEMENT_ATTEMPTS):
            cx, cy = rng.uniform(-half + h, half - h, size=2)
            if cx * cx + cy * cy < START_FREE_RADIUS_M ** 2:
                continue
            i, j = int(np.floor(cx)), int(np.floor(cy))
            clash = False
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    for ox, oy in cells.get((i + di, j + dj), ()):
                        if abs(ox - cx) < OBSTACLE_SIZE_M and abs(oy - cy) < OBSTACLE_SIZE_M:
                            clash = True
                            break
            if not clash:
                placed.append((cx, cy))
                cells.setdefault((i, j), []).append((cx, cy))
                break
        else:
            raise GenerationError(
                f"could not place obstacle {len(placed) + 1} of {n_target} "
                f"after {PLACEMENT_ATTEMPTS} attempts (target {density}%)")
    return Environment("clutter", bounds, np.asarray(placed).reshape(-1, 2), _walls([]),
                       (0.0, 0.0, heading), {"density": density, "seed": seed,
                                             "arena_m": arena_m})


def corridor(width_au: float, seed: int = 0, length_au: float = 40.0,
             start_au: float = 5.0) -> Environment:
    """Straight corridor along +x, closed behind the start, open at the far end.

    The agent starts ``start_au`` in front of the back wall and exits after
    ``length_au`` of travel along the corridor.
    """
    if width_au <= 1.0:
        raise ConfigError("corridor width must exceed the agent width (1 a.u.)")
    if length_au < 40.0:
        raise ConfigError("corridor length must be at least 40 a.u.")
    w = width_au * AU
    x0 = start_au * AU
    end = x0 + length_au * AU
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    walls = [(0.0, -w / 2, end, -w / 2), (0.0, w / 2, end, w / 2), (0.0, -w / 2, 0.0, w / 2)]
    # small seeded heading jitter so repetitions differ
    heading = float(rng.uniform(-0.05, 0.05))
    return Environment("corridor", (-1.0, -w / 2 - 1.0, end + 1.0, w / 2 + 1.0),
                       np.zeros((0, 2)), _walls(walls), (x0, 0.0, heading),
                       {"width_au": width_au, "length_au": length_au, "start_au": start_au,
                        "seed": seed}, exit_x=end)


def gap_arena(w_var_au: float, seed: int = 0, fixed_au: float = 10.0,
              half_m: float = 8.0) -> Environment:
    """Two square arenas sharing a wall at x = 0 pierced by two gaps.

    The fixed gap (``fixed_au``) is centred at y = -half/2, the variable one
    at y = +half/2. The agent starts in the left arena.
    """
    if w_var_au <= 0 or fixed_au <= 0:
        raise ConfigError("gap widths must be positive")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    L = half_m
    walls = [(-L, -L, L, -L), (L, -L, L, L), (L, L, -L, L), (-L, L, -L, -L)]
    gaps = []
    labels = []
    ys = [(-L / 2, fixed_au * AU, "fixed"), (L / 2, w_var_au * AU, "variable")]
    if any(w > L for _, w, _ in ys):
        raise ConfigError("gap wider than the dividing wall allows")
    y_cursor = -L
    for yc, w, lab in ys:
        lo, hi = yc - w / 2, yc + w / 2
        walls.append((0.0, y_cursor, 0.0, lo))
        y_cursor = hi
        gaps.append((lo, hi))
        labels.append(lab)
    walls.append((0.0, y_cursor, 0.0, L))
    heading = float(rng.uniform(-np.pi, np.pi))
    return Environment("gap_arena", (-L, -L, L, L), np.zeros((0, 2)), _walls(walls),
                       (-L / 2, 0.0, heading),
                       {"w_var_au": w_var_au, "fixed_au": fixed_au, "seed": seed},
                       gaps=gaps, gap_labels=labels)


def empty_box(seed: int = 0, side_m: float = 10.0) -> Environment:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 4]))
    h = side_m / 2
    return Environment("empty_box", (-h, -h, h, h), np.zeros((0, 2)), _walls(_box(-h, -h, h, h)),
                       (0.0, 0.0, float(rng.uniform(-np.pi, np.pi))),
                       {"side_m": side_m, "seed": seed})


def narrowing_corridor(seed: int = 0, start_au: float = 20.0, end_au: float = 2.0,
                       length_au: float = 50.0, entry_au: float = 10.0) -> Environment:
    """Corridor along +x whose width tapers linearly from ``start_au`` to ``end_au``.

    A straight section of ``entry_au`` at the full width precedes the taper;
    the agent starts halfway along it. Penetration is measured from the
    start of the taper.
    """
    if not start_au > end_au > 0:
        raise ConfigError("narrowing corridor needs start width > end width > 0")
    x0 = entry_au * AU
    end = x0 + length_au * AU
    w0, w1 = start_au * AU, end_au * AU
    rng = np.random.default_rng(np.random.SeedSequence([seed, 5]))
    walls = [(0.0, -w0 / 2, x0, -w0 / 2), (0.0, w0 / 2, x0, w0 / 2),
             (x0, -w0 / 2, end, -w1 / 2), (x0, w0 / 2, end, w1 / 2),
             (0.0, -w0 / 2, 0.0, w0 / 2)]
    heading = float(rng.uniform(-0.05, 0.05))
    return Environment("narrowing_corridor", (-1.0, -w0 / 2 - 1.0, end + 1.0, w0 / 2 + 1.0),
                       np.zeros((0, 2)), _walls(walls), (x0 / 2, 0.0, heading),
                       {"start_au": start_au, "end_au": end_au, "length_au": length_au,
                        "entry_au": entry_au, "seed": seed}, exit_x=end)


def generate_environment(kind: str, seed: int = 0, **kw) -> Environment:
    """Dispatch by name: ``clutter(density)``, ``corridor(width_au)``, ``gap_arena(w_var_au)``..."""
    if kind == "clutter":
        return clutter(kw.pop("density"), seed, **kw)
    if kind == "corridor":
        return corridor(kw.pop("width_au"), seed, **kw)
    if kind == "gap_arena":
        return gap_arena(kw.pop("w_var_au"), seed, **kw)
    if kind == "empty_box":
        return empty_box(seed, **kw)
    if kind == "narrowing_corridor":
        return narrowing_corridor(seed, **kw)
    raise ConfigError(f"unknown environment kind {kind!r}; expected one of {KINDS}")
