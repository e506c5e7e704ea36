"""Acceptance criteria at their stated scale and tolerance.

Each test prints one ``PASS``/``FAIL`` line (collected again in the pytest
terminal summary). Runs shared between criteria are computed once. The
closed-loop criteria take hours on one core; deselect them with
``-m "not slow"``. Run this file directly to print the lines without pytest.
"""

from __future__ import annotations

import functools
import math
import os
import time

import numpy as np
import pytest

from semdnav.avoidance import NetConfig, assemble, gap_min
from semdnav.characterize import (NULL, PREFERRED, TABLE_CONTRASTS, TABLE_FREQUENCIES_HZ,
                                  contrast_response, run_grid, tuning_curves)
from semdnav.cli.batch import grid_tasks, run_batch, summarise
from semdnav.validation import check_ode_oracle, check_tde_monotonic, run_all

RESULTS: dict[int, str] = {}
WORKERS = os.cpu_count() or 1

CORRIDOR_WIDTHS = (11.25, 12.5, 15.0)
CORRIDOR_SEEDS = (0, 1, 2)
CORRIDOR_BUDGET_S = 300.0
REFERENCE_SPEEDS = {11.25: 0.79, 12.5: 0.75, 15.0: 0.72}
GAP_WIDTHS = (5.0, 8.0, 10.0, 13.0)
GAP_MIN_CROSSINGS = 20
GAP_MAX_SEEDS = 10
GAP_BUDGET_S = 600.0
GAP_PLATEAU_TOL = 0.1
CLUTTER_DENSITIES = (5.0, 15.0, 25.0)
CLUTTER_SEEDS = tuple(range(10))
CLUTTER_BUDGET_S = 600.0
N_CONNECT = (0, 2, 4, 8)
NARROW_SEEDS = (0, 1, 2)
NARROW_BUDGET_S = 300.0


def report(n: int, name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d} {name}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def _fmt(xs) -> str:
    return "[" + ", ".join("nan" if math.isnan(x) else f"{x:.3g}" for x in xs) + "]"


# ---- shared runs ----------------------------------------------------------

@functools.cache
def tuning_run():
    return _timed(run_grid, TABLE_FREQUENCIES_HZ, (1.0,), (PREFERRED, NULL))


@functools.cache
def contrast_run():
    return _timed(run_grid, (5.0,), TABLE_CONTRASTS, (PREFERRED,))


@functools.cache
def corridor_runs():
    tasks = grid_tasks("corridor", CORRIDOR_WIDTHS, CORRIDOR_SEEDS, CORRIDOR_BUDGET_S)
    return _timed(run_batch, tasks, WORKERS)


@functools.cache
def clutter_runs():
    tasks = grid_tasks("clutter", CLUTTER_DENSITIES, CLUTTER_SEEDS, CLUTTER_BUDGET_S,
                       compare_fixed=True)
    return _timed(run_batch, tasks, WORKERS)


def _cells(results):
    return {(c.value, c.velocity): c for c in summarise(results)}


# ---- criteria -------------------------------------------------------------

def test_01_velocity_tuning_peak():
    rows, secs = tuning_run()
    pref = tuning_curves(rows, 1.0)[PREFERRED]
    ok = (pref.peak_frequency_hz == 5.0 and pref.value(10.0) < pref.value(5.0)
          and secs < 300)
    report(1, "velocity tuning peak", ok,
           f"preferred curve over {list(TABLE_FREQUENCIES_HZ)} Hz = {_fmt(pref.mean_norm)}, "
           f"peak at {pref.peak_frequency_hz:g} Hz (need 5 Hz, R(10) < R(5)); {secs:.0f} s")


def test_02_direction_selectivity():
    rows, secs = tuning_run()
    null = tuning_curves(rows, 1.0)[NULL]
    peak = float(null.mean_norm.max())
    report(2, "direction selectivity", peak <= 0.25,
           f"normalised null maximum {peak:.3f} (need <= 0.25); null curve {_fmt(null.mean_norm)}")


def test_03_contrast_half_response():
    rows, secs = contrast_run()
    cr = contrast_response(rows, 5.0)
    c50 = cr.half_crossing()
    ok = 0.25 <= c50 <= 0.45 and secs < 300
    report(3, "contrast half-response", ok,
           f"50% crossing at Michelson {c50:.3f} (need [0.25, 0.45]); response "
           f"{_fmt(cr.mean_norm)} at Michelson {_fmt(cr.michelson)}; {secs:.0f} s")


def test_04_kernel_fidelity():
    res, secs = _timed(check_ode_oracle, 50, 0.1)
    report(4, "kernel fidelity", res.passed and secs < 60, f"{res.detail}; {secs:.1f} s")


def test_05_tde_monotonicity():
    res, secs = _timed(check_tde_monotonic)
    report(5, "TDE monotonicity", res.passed, f"{res.detail}; {secs:.1f} s")


@pytest.mark.slow
def test_06_corridor_centering():
    results, secs = corridor_runs()
    cells = _cells(results)
    std = [cells[(w, "adaptive")].lateral_std_au for w in CORRIDOR_WIDTHS]
    mean = [cells[(w, "adaptive")].lateral_mean_au for w in CORRIDOR_WIDTHS]
    increasing = all(a < b for a, b in zip(std, std[1:]))
    centred = all(abs(m) <= 0.1 * w for m, w in zip(mean, CORRIDOR_WIDTHS))
    outcomes = [r.row.get("outcome", r.error) for r in results]
    report(6, "corridor centering", increasing and centred and secs < 1800,
           f"widths {list(CORRIDOR_WIDTHS)} a.u.: lateral std {_fmt(std)} (need strictly "
           f"increasing), mean {_fmt(mean)} (need |mean| <= 10% of width); outcomes "
           f"{outcomes}; {secs:.0f} s")


@pytest.mark.slow
def test_07_speed_width_relation():
    results, secs = corridor_runs()
    cells = _cells(results)
    v = [cells[(w, "adaptive")].mean_velocity_au for w in CORRIDOR_WIDTHS]
    increasing = all(a < b for a, b in zip(v, v[1:]))
    band = ["in" if abs(x - REFERENCE_SPEEDS[w]) <= 0.15 else "out"
            for x, w in zip(v, CORRIDOR_WIDTHS)]
    report(7, "speed-width relation", increasing,
           f"mean intersaccade speed {_fmt(v)} a.u./s over widths {list(CORRIDOR_WIDTHS)} "
           f"(need strictly increasing); reference band +-0.15: {band}")


@pytest.mark.slow
def test_08_gap_preference():
    t0 = time.perf_counter()
    seeds = {w: 0 for w in GAP_WIDTHS}
    results = []
    crossings = {w: 0 for w in GAP_WIDTHS}
    first = True
    while True:
        todo = [w for w in GAP_WIDTHS
                if crossings[w] < GAP_MIN_CROSSINGS and seeds[w] < GAP_MAX_SEEDS]
        if not todo:
            break
        tasks = []
        for w in todo:
            n_new = 3 if first else 1
            tasks += grid_tasks("gap_arena", [w], range(seeds[w], seeds[w] + n_new),
                                GAP_BUDGET_S)
            seeds[w] += n_new
        first = False
        results += run_batch(tasks, WORKERS)
        for c in summarise(results):
            if c.value != "all":
                crossings[c.value] = c.crossings_fixed + c.crossings_variable
    secs = time.perf_counter() - t0
    cells = _cells(results)
    p = [cells[(w, "adaptive")].entry_probability for w in GAP_WIDTHS]
    enough = all(crossings[w] >= GAP_MIN_CROSSINGS for w in GAP_WIDTHS)
    nondecr = all(a <= b for a, b in zip(p, p[1:]))
    k10 = GAP_WIDTHS.index(10.0)
    plateau = all(abs(x - p[k10]) <= GAP_PLATEAU_TOL for x in p[k10:])
    ok = enough and nondecr and plateau and secs < 7200
    report(8, "gap preference", ok,
           f"variable-gap entry probability {_fmt(p)} over w_var {list(GAP_WIDTHS)} a.u. "
           f"(need non-decreasing, within {GAP_PLATEAU_TOL} of the 10 a.u. value beyond it); "
           f"crossings {[crossings[w] for w in GAP_WIDTHS]} from seeds "
           f"{[seeds[w] for w in GAP_WIDTHS]} (need >= {GAP_MIN_CROSSINGS}); {secs:.0f} s")


@pytest.mark.slow
def test_09_clutter_success():
    results, secs = clutter_runs()
    cells = _cells(results)
    adaptive = cells[("all", "adaptive")]
    fixed = cells[("all", "fixed")]
    per = {d: (cells[(d, "adaptive")].success_rate, cells[(d, "fixed")].success_rate)
           for d in CLUTTER_DENSITIES}
    ok = (adaptive.success_rate >= 0.6 and adaptive.success_rate >= fixed.success_rate
          and secs < 3 * 3600)
    report(9, "clutter success", ok,
           f"adaptive {adaptive.success_rate:.0%} (need >= 60%), fixed "
           f"{fixed.success_rate:.0%} (need adaptive >= fixed); per density "
           f"{ {d: f'{a:.0%}/{f:.0%}' for d, (a, f) in per.items()} }; {secs:.0f} s")


@pytest.mark.slow
def test_10_velocity_density_trend():
    results, _ = clutter_runs()
    cells = _cells(results)
    v = [cells[(d, "adaptive")].mean_velocity_au for d in CLUTTER_DENSITIES]
    ok = all(a >= b for a, b in zip(v, v[1:]))
    report(10, "velocity-density trend", ok,
           f"adaptive mean intersaccade speed {_fmt(v)} a.u./s over densities "
           f"{list(CLUTTER_DENSITIES)}% (need non-increasing)")


def _realised_gap_deg(n_connect: int) -> float:
    net = assemble(NetConfig(n_connect=n_connect))
    srcs = {a for s, a, d, b, *_ in net.wiring() if s == "INT_LR" and d == "WTA" and b == 32}
    return len(srcs) * 140.0 / 64


@pytest.mark.slow
def test_11_connectivity_gap_law():
    tasks = grid_tasks("narrowing_corridor", N_CONNECT, NARROW_SEEDS, NARROW_BUDGET_S)
    results, secs = _timed(run_batch, tasks, WORKERS)
    cells = _cells(results)
    pen = [cells[(float(n), "adaptive")].mean_penetration_au for n in N_CONNECT]
    nonincr = all(a >= b for a, b in zip(pen, pen[1:]))
    exact = all(gap_min(n) == (2 * n + 1) * 140.0 / 64
                and math.isclose(_realised_gap_deg(n), gap_min(n)) for n in N_CONNECT)
    report(11, "connectivity/gap law", nonincr and exact and secs < 1800,
           f"mean penetration {_fmt(pen)} a.u. over n_connect {list(N_CONNECT)} (need "
           f"non-increasing); gap_min exact and equal to the wired footprint: {exact}; "
           f"{secs:.0f} s")


def test_12_structural_invariants():
    res, secs = _timed(run_all)
    failed = [r.name for r in res if not r.passed]
    detail = "; ".join(r.line() for r in res)
    report(12, "structural invariants", not failed and secs < 300,
           f"failed {failed or 'none'}; {secs:.0f} s | {detail}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        try:
            t()
        except AssertionError:
            pass
    print("\n".join(RESULTS[k] for k in sorted(RESULTS)))
