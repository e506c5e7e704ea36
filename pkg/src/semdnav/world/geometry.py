"""Collision, clearance and density geometry.

Obstacles are axis-aligned 1 m squares given by their centres; walls are
zero-thickness segments. The robot is a square of side ``size`` centred on
its pose and rotated by its heading.
"""

from __future__ import annotations

import numpy as np
from numba import njit

ROBOT_SIZE_M = 0.4
OBSTACLE_SIZE_M = 1.0


def robot_corners(x: float, y: float, heading: float, size: float = ROBOT_SIZE_M) -> np.ndarray:
    h = size / 2.0
    c, s = np.cos(heading), np.sin(heading)
    local = np.array([[h, h], [-h, h], [-h, -h], [h, -h]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([x, y])


def _axes(poly: np.ndarray) -> list[np.ndarray]:
    out = []
    n = len(poly)
    for k in range(n if n > 2 else 1):
        e = poly[(k + 1) % n] - poly[k]
        out.append(np.array([-e[1], e[0]]))
        if n == 2:
            out.append(e)
    return out


def polygons_intersect(a: np.ndarray, b: np.ndarray) -> bool:
    """Closed separating-axis test for convex polygons (segments allowed).

    Touching shapes (zero gap) count as intersecting.
    """
    for axis in _axes(a) + _axes(b):
        if not axis.any():
            continue
        pa = a @ axis
        pb = b @ axis
        if pa.max() < pb.min() or pb.max() < pa.min():
            return False
    return True


def square(cx: float, cy: float, side: float = OBSTACLE_SIZE_M) -> np.ndarray:
    h = side / 2.0
    return np.array([[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]])


@njit(cache=True)
def _robot_hits(corners, centres, half, walls):
    # axis-aligned obstacle squares: SAT with the two world axes plus the
    # robot's two edge normals
    for k in range(centres.shape[0]):
        cx = centres[k, 0]
        cy = centres[k, 1]
        if (corners[:, 0].max() < cx - half or corners[:, 0].min() > cx + half
                or corners[:, 1].max() < cy - half or corners[:, 1].min() > cy + half):
            continue
        sep = False
        for e in range(2):
            ax = corners[e + 1, 1] - corners[e, 1]
            ay = -(corners[e + 1, 0] - corners[e, 0])
            pr = corners[:, 0] * ax + corners[:, 1] * ay
            lo = np.inf
            hi = -np.inf
            for sx in (-half, half):
                for sy in (-half, half):
                    v = (cx + sx) * ax + (cy + sy) * ay
                    lo = min(lo, v)
                    hi = max(hi, v)
            if pr.max() < lo or hi < pr.min():
                sep = True
                break
        if not sep:
            return True
    for k in range(walls.shape[0]):
        x0, y0, x1, y1 = walls[k, 0], walls[k, 1], walls[k, 2], walls[k, 3]
        sep = False
        # segment normal, segment direction, robot edge normals
        for a in range(4):
            if a == 0:
                ax, ay = -(y1 - y0), x1 - x0
            elif a == 1:
                ax, ay = x1 - x0, y1 - y0
            else:
                e = a - 2
                ax = corners[e + 1, 1] - corners[e, 1]
                ay = -(corners[e + 1, 0] - corners[e, 0])
            pr = corners[:, 0] * ax + corners[:, 1] * ay
            p0 = x0 * ax + y0 * ay
            p1 = x1 * ax + y1 * ay
            if pr.max() < min(p0, p1) or max(p0, p1) < pr.min():
                sep = True
                break
        if not sep:
            return True
    return False


def robot_collides(x: float, y: float, heading: float, centres: np.ndarray,
                   walls: np.ndarray, size: float = ROBOT_SIZE_M,
                   obstacle_size: float = OBSTACLE_SIZE_M) -> bool:
    corners = robot_corners(x, y, heading, size)
    return bool(_robot_hits(corners, np.asarray(centres, dtype=np.float64).reshape(-1, 2),
                            obstacle_size / 2.0,
                            np.asarray(walls, dtype=np.float64).reshape(-1, 4)))


def point_segment_distance(px: np.ndarray, py: np.ndarray, seg: np.ndarray) -> np.ndarray:
    """Distance from points to the nearest of several segments (vectorised)."""
    px = np.asarray(px, dtype=np.float64)[..., None]
    py = np.asarray(py, dtype=np.float64)[..., None]
    x0, y0, x1, y1 = (seg[:, k] for k in range(4))
    ex, ey = x1 - x0, y1 - y0
    ll = ex * ex + ey * ey
    t = np.where(ll > 0, ((px - x0) * ex + (py - y0) * ey) / np.where(ll > 0, ll, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    dx = px - (x0 + t * ex)
    dy = py - (y0 + t * ey)
    return np.sqrt(dx * dx + dy * dy).min(axis=-1)


def clearance(px: np.ndarray, py: np.ndarray, centres: np.ndarray,
              walls: np.ndarray) -> np.ndarray:
    """Distance (m) to the centre of the closest obstacle or the nearest wall point."""
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    best = np.full(px.shape, np.inf)
    centres = np.asarray(centres, dtype=np.float64).reshape(-1, 2)
    walls = np.asarray(walls, dtype=np.float64).reshape(-1, 4)
    if centres.shape[0]:
        d = np.hypot(px[..., None] - centres[:, 0], py[..., None] - centres[:, 1])
        best = np.minimum(best, d.min(axis=-1))
    if walls.shape[0]:
        best = np.minimum(best, point_segment_distance(px, py, walls))
    return best


def occupancy_density(bounds: tuple[float, float, float, float], centres: np.ndarray,
                      px_per_m: int = 100, obstacle_size: float = OBSTACLE_SIZE_M) -> float:
    """Percentage of the arena covered by obstacles, counted on a raster."""
    x0, y0, x1, y1 = bounds
    nx = int(round((x1 - x0) * px_per_m))
    ny = int(round((y1 - y0) * px_per_m))
    if nx <= 0 or ny <= 0:
        raise ValueError("arena must have positive area")
    grid = np.zeros((ny, nx), dtype=bool)
    h = obstacle_size / 2.0
    for cx, cy in np.asarray(centres, dtype=np.float64).reshape(-1, 2):
        # pixel centres inside the closed square
        i0 = max(0, int(np.ceil((cx - h - x0) * px_per_m - 0.5)))
        i1 = min(nx, int(np.floor((cx + h - x0) * px_per_m - 0.5)) + 1)
        j0 = max(0, int(np.ceil((cy - h - y0) * px_per_m - 0.5)))
        j1 = min(ny, int(np.floor((cy + h - y0) * px_per_m - 0.5)) + 1)
        if i1 > i0 and j1 > j0:
            grid[j0:j1, i0:i1] = True
    return 100.0 * grid.mean()
