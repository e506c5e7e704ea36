"""Episode grids run in a worker pool and folded into per-cell summaries."""

from __future__ import annotations

import csv
import io
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..avoidance.config import NetConfig
from ..world.environment import generate_environment
from ..world.episode import COLLIDED, EpisodeConfig, run_episode

GRID_PARAM = {"clutter": "density", "corridor": "width_au", "gap_arena": "w_var_au",
              "narrowing_corridor": "n_connect"}
GRID_COLUMN = {"clutter": "density_pct", "corridor": "width_au", "gap_arena": "w_var_au",
               "narrowing_corridor": "n_connect"}
METRIC_COLUMNS = ("outcome", "collision_time_s", "duration_s", "n_poses", "density_pct",
                  "mean_clearance_au", "mean_intersaccade_velocity_au", "max_distance_au",
                  "lateral_mean_au", "lateral_std_au", "penetration_au", "crossings_fixed",
                  "crossings_variable")
SUMMARY_COLUMNS = ("grid", "value", "velocity", "n_runs", "n_errors", "n_success",
                   "success_rate", "mean_clearance_au", "mean_intersaccade_velocity_au",
                   "lateral_mean_au", "lateral_std_au", "mean_penetration_au",
                   "crossings_fixed", "crossings_variable", "entry_probability")


@dataclass(frozen=True, order=True)
class BatchTask:
    grid: str
    value: float
    seed: int
    adaptive: bool = True
    budget_s: float = 600.0

    @property
    def velocity(self) -> str:
        return "adaptive" if self.adaptive else "fixed"


@dataclass
class BatchResult:
    task: BatchTask
    row: dict = field(default_factory=dict)
    error: str = ""
    lateral: tuple[float, float, int] | None = None  # (sum y, sum y^2, n) in a.u.


def _run_task(args: tuple[BatchTask, NetConfig, EpisodeConfig, dict]) -> BatchResult:
    task, net_config, episode, env_extra = args
    try:
        if task.grid == "narrowing_corridor":
            env = generate_environment(task.grid, task.seed, **env_extra)
            net_config = net_config.with_(n_connect=int(task.value))
        else:
            env = generate_environment(task.grid, task.seed,
                                       **{GRID_PARAM[task.grid]: task.value, **env_extra})
        cfg = EpisodeConfig(**{**episode.__dict__, "adaptive_velocity": task.adaptive,
                               "budget_s": task.budget_s})
        res = run_episode(env, net_config, seed=task.seed, config=cfg, raster_pops=())
    except Exception as exc:  # recorded per cell; the batch carries on
        last = traceback.format_exception_only(type(exc), exc)[-1].strip()
        return BatchResult(task, error=last)
    row = res.summary_row()
    row["n_poses"] = len(res.trajectory)
    lat = None
    if task.grid in ("corridor", "narrowing_corridor"):
        y = res.lateral_series_au
        lat = (float(y.sum()), float((y * y).sum()), int(y.size))
    return BatchResult(task, row, "", lat)


def run_batch(tasks: Sequence[BatchTask], parallelism: int = 1,
              net_config: NetConfig | None = None, episode: EpisodeConfig = EpisodeConfig(),
              env_extra: dict | None = None) -> list[BatchResult]:
    """Run every task; the result list is sorted by task, whatever the worker count."""
    net_config = net_config or NetConfig()
    jobs = [(t, net_config, episode, dict(env_extra or {})) for t in sorted(tasks)]
    if parallelism <= 1 or len(jobs) <= 1:
        results = [_run_task(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_run_task, jobs))
    return sorted(results, key=lambda r: r.task)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def runs_csv(results: Iterable[BatchResult], header_lines: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for h in header_lines:
        buf.write(f"# {h}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("grid", "value", "seed", "velocity") + METRIC_COLUMNS + ("error",))
    for r in results:
        t = r.task
        w.writerow([t.grid, _fmt(t.value), t.seed, t.velocity]
                   + [_fmt(r.row.get(c, "")) for c in METRIC_COLUMNS] + [r.error])
    return buf.getvalue()


@dataclass(frozen=True)
class CellSummary:
    grid: str
    value: float | str
    velocity: str
    n_runs: int
    n_errors: int
    n_success: int
    mean_clearance_au: float
    mean_velocity_au: float
    lateral_mean_au: float
    lateral_std_au: float
    mean_penetration_au: float
    crossings_fixed: int
    crossings_variable: int

    @property
    def success_rate(self) -> float:
        done = self.n_runs - self.n_errors
        return self.n_success / done if done else math.nan

    @property
    def entry_probability(self) -> float:
        """Share of gap crossings that went through the variable gap."""
        total = self.crossings_fixed + self.crossings_variable
        return self.crossings_variable / total if total else math.nan

    def values(self) -> list:
        return [self.grid, self.value, self.velocity, self.n_runs, self.n_errors,
                self.n_success, self.success_rate, self.mean_clearance_au,
                self.mean_velocity_au, self.lateral_mean_au, self.lateral_std_au,
                self.mean_penetration_au, self.crossings_fixed, self.crossings_variable,
                self.entry_probability]


def _mean(xs: list[float]) -> float:
    xs = [x for x in xs if isinstance(x, (int, float)) and not math.isnan(x)]
    return sum(xs) / len(xs) if xs else math.nan


def summarise(results: Sequence[BatchResult]) -> list[CellSummary]:
    """One summary per (value, velocity) cell plus one per velocity over all cells.

    Lateral statistics pool every pose of every run in the cell.
    """
    groups: dict[tuple, list[BatchResult]] = {}
    for r in results:
        groups.setdefault((r.task.grid, r.task.value, r.task.velocity), []).append(r)
        groups.setdefault((r.task.grid, "all", r.task.velocity), []).append(r)

    def key(k):
        return (k[0], k[1] == "all", 0.0 if k[1] == "all" else k[1], k[2])

    out = []
    for k in sorted(groups, key=key):
        rs = groups[k]
        ok = [r for r in rs if not r.error]
        lat = [r.lateral for r in ok if r.lateral]
        n = sum(x[2] for x in lat)
        if n:
            m = sum(x[0] for x in lat) / n
            var = max(0.0, sum(x[1] for x in lat) / n - m * m)
            lat_m, lat_s = m, math.sqrt(var)
        else:
            lat_m = lat_s = math.nan
        out.append(CellSummary(
            k[0], k[1], k[2], len(rs), len(rs) - len(ok),
            sum(1 for r in ok if r.row["outcome"] != COLLIDED),
            _mean([r.row["mean_clearance_au"] for r in ok]),
            _mean([r.row["mean_intersaccade_velocity_au"] for r in ok]),
            lat_m, lat_s, _mean([r.row["penetration_au"] for r in ok]),
            sum(int(r.row.get("crossings_fixed", 0)) for r in ok),
            sum(int(r.row.get("crossings_variable", 0)) for r in ok)))
    return out


def summary_csv(results: Sequence[BatchResult], header_lines: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for h in header_lines:
        buf.write(f"# {h}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for s in summarise(results):
        w.writerow([_fmt(v) for v in s.values()])
    return buf.getvalue()


def grid_tasks(grid: str, values: Sequence[float], seeds: Sequence[int], budget_s: float,
               compare_fixed: bool = False) -> list[BatchTask]:
    modes = (True, False) if compare_fixed else (True,)
    return [BatchTask(grid, float(v), int(s), a, budget_s)
            for v in values for s in seeds for a in modes]
