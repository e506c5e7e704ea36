"""Velocity tuning and contrast response of the motion-detector front end."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..avoidance.assemble import assemble, events_to_input
from ..avoidance.config import SPTC_COLS, SPTC_ROWS, NetConfig, motion_only_sizes
from ..snn.params import DT_MS
from ..vision.camera import CameraModel
from ..vision.eventio import load_events
from .grating import (NULL, PREFERRED, TABLE_CONTRASTS, TABLE_FREQUENCIES_HZ, GratingSpec,
                      michelson_contrast, synth_grating_events)

REPS = 3
DEFAULT_SAMPLING = "area"
# the left-to-right detectors are the preferred-direction population
PREFERRED_POP = "TDE_LR"
NULL_POP = "TDE_RL"

CURVE_HEADER = "frequency_hz,contrast,direction,mean_norm,std_norm,n_reps"
RUN_HEADER = "frequency_hz,contrast,direction,rep,phase,n_events,rate_lr_hz,rate_rl_hz,degenerate"


@dataclass(frozen=True)
class Response:
    """Mean rate per neuron (spikes/neuron/s) of both detector populations."""

    rate_lr: float
    rate_rl: float
    n_events: int
    duration_s: float


@dataclass(frozen=True)
class RunRow:
    frequency_hz: float
    contrast: float
    direction: str
    rep: int
    phase: float
    response: Response
    degenerate: bool

    @property
    def rate(self) -> float:
        """Rate of the preferred-direction population."""
        return self.response.rate_lr


@dataclass
class TuningCurve:
    """Per-frequency mean and std for one direction at one printed contrast.

    Values are normalised by the maximum of the preferred-direction mean at
    the same contrast; ``degenerate`` marks points whose stimulus produced no
    events although it had contrast.
    """

    direction: str
    contrast: float
    frequencies_hz: np.ndarray
    mean_norm: np.ndarray
    std_norm: np.ndarray
    n_reps: np.ndarray
    degenerate: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def peak_frequency_hz(self) -> float:
        return float(self.frequencies_hz[int(np.argmax(self.mean_norm))])

    def value(self, f_hz: float) -> float:
        k = int(np.nonzero(np.isclose(self.frequencies_hz, f_hz))[0][0])
        return float(self.mean_norm[k])


def _interior(index: np.ndarray) -> np.ndarray:
    # the first column has no left neighbour and never sees a coincidence
    return index % SPTC_COLS != 0


def population_response(events: np.ndarray, duration_s: float,
                        net_config: NetConfig | None = None) -> Response:
    """Feed events through SPTC and both TDE layers; edge columns are left out."""
    cfg = (net_config or NetConfig()).with_(sizes=motion_only_sizes())
    net = assemble(cfg)
    n_ticks = int(round(duration_s * 1000.0 / DT_MS))
    inp, _ = events_to_input(events, 0, n_ticks)
    rec = net.run(n_ticks, {"DVS": inp})
    n_neurons = (SPTC_COLS - 1) * SPTC_ROWS
    rates = []
    for pop in (PREFERRED_POP, NULL_POP):
        _, idx = rec.of(pop)
        rates.append(float(np.count_nonzero(_interior(idx))) / n_neurons / duration_s)
    return Response(rates[0], rates[1], int(events.shape[0]), duration_s)


def rep_phase(seed: int, frequency_hz: float, contrast: float, direction: str, rep: int) -> float:
    """Seeded grating phase of one repetition, independent of grid order."""
    key = [seed, int(round(frequency_hz * 1000)), int(round(contrast * 1000)),
           0 if direction == PREFERRED else 1, rep]
    return float(np.random.default_rng(np.random.SeedSequence(key)).uniform())


def run_point(spec: GratingSpec, net_config: NetConfig | None = None,
              cam: CameraModel = CameraModel()) -> Response:
    return population_response(synth_grating_events(spec, cam), spec.duration_s, net_config)


def run_grid(frequencies: Sequence[float] = TABLE_FREQUENCIES_HZ,
             contrasts: Sequence[float] = TABLE_CONTRASTS,
             directions: Sequence[str] = (PREFERRED, NULL), reps: int = REPS, seed: int = 0,
             net_config: NetConfig | None = None, cam: CameraModel = CameraModel(),
             duration_s: float = 4.0, sampling: str = DEFAULT_SAMPLING) -> list[RunRow]:
    """Every repetition of every grid point, in grid order."""
    if reps < 1:
        raise ValueError("at least one repetition is needed")
    rows = []
    for f in frequencies:
        for c in contrasts:
            for d in directions:
                for r in range(reps):
                    phase = rep_phase(seed, f, c, d, r)
                    spec = GratingSpec(f, c, d, duration_s=duration_s, phase=phase,
                                       sampling=sampling)
                    resp = run_point(spec, net_config, cam)
                    rows.append(RunRow(f, c, d, r, phase, resp,
                                       resp.n_events == 0 and c > 0))
    return rows


def ingest_rows(paths: Iterable[tuple[float, float, str, str | Path]],
                net_config: NetConfig | None = None, cam: CameraModel = CameraModel(),
                duration_s: float = 4.0) -> list[RunRow]:
    """Rows from recorded event files, given as ``(frequency, contrast, direction, path)``.

    Repetitions are numbered in the order files appear for the same point.
    """
    rows = []
    seen: dict[tuple[float, float, str], int] = {}
    for f, c, d, path in paths:
        key = (float(f), float(c), d)
        rep = seen.get(key, 0)
        seen[key] = rep + 1
        ev = load_events(path, cam)
        ev = ev.copy()
        if ev.size:
            ev["t"] -= ev["t"][0]
        resp = population_response(ev, duration_s, net_config)
        rows.append(RunRow(key[0], key[1], d, rep, math.nan, resp, resp.n_events == 0 and c > 0))
    return rows


def tuning_curves(rows: Sequence[RunRow], contrast: float = 1.0) -> dict[str, TuningCurve]:
    """Preferred and null curves at one contrast, normalised to the preferred maximum."""
    sel = [r for r in rows if math.isclose(r.contrast, contrast)]
    if not sel:
        raise ValueError(f"no rows at contrast {contrast}")
    freqs = np.array(sorted({r.frequency_hz for r in sel}))
    stats = {}
    for d in (PREFERRED, NULL):
        mean = np.zeros(freqs.size)
        std = np.zeros(freqs.size)
        n = np.zeros(freqs.size, dtype=np.int64)
        deg = np.zeros(freqs.size, dtype=bool)
        for k, f in enumerate(freqs):
            vals = [r.rate for r in sel if r.direction == d and math.isclose(r.frequency_hz, f)]
            if vals:
                mean[k] = np.mean(vals)
                std[k] = np.std(vals)
                n[k] = len(vals)
            deg[k] = any(r.degenerate for r in sel
                         if r.direction == d and math.isclose(r.frequency_hz, f))
        stats[d] = (mean, std, n, deg)
    top = stats[PREFERRED][0].max()
    scale = 1.0 / top if top > 0 else 0.0
    return {d: TuningCurve(d, contrast, freqs, m * scale, s * scale, n, deg)
            for d, (m, s, n, deg) in stats.items()}


@dataclass(frozen=True)
class ContrastResponse:
    """Preferred-direction response over contrast at one frequency, max = 1."""

    frequency_hz: float
    michelson: np.ndarray
    mean_norm: np.ndarray
    std_norm: np.ndarray

    def half_crossing(self) -> float:
        """Michelson contrast where the response first reaches 0.5 (linear interpolation)."""
        m, r = self.michelson, self.mean_norm
        for k in range(m.size):
            if r[k] >= 0.5:
                if k == 0:
                    return float(m[0])
                return float(m[k - 1] + (0.5 - r[k - 1]) * (m[k] - m[k - 1]) / (r[k] - r[k - 1]))
        return math.nan


def contrast_response(rows: Sequence[RunRow], frequency_hz: float = 5.0) -> ContrastResponse:
    sel = [r for r in rows if math.isclose(r.frequency_hz, frequency_hz)
           and r.direction == PREFERRED]
    if not sel:
        raise ValueError(f"no preferred-direction rows at {frequency_hz} Hz")
    cs = sorted({r.contrast for r in sel})
    mean = np.array([np.mean([r.rate for r in sel if r.contrast == c]) for c in cs])
    std = np.array([np.std([r.rate for r in sel if r.contrast == c]) for c in cs])
    top = mean.max()
    scale = 1.0 / top if top > 0 else 0.0
    return ContrastResponse(frequency_hz, np.array([michelson_contrast(c) for c in cs]),
                            mean * scale, std * scale)


def curve_table(rows: Sequence[RunRow]) -> list[tuple[float, float, str, float, float, int]]:
    """Aggregated rows for every (frequency, contrast, direction), grid order."""
    out = []
    for c in sorted({r.contrast for r in rows}):
        curves = tuning_curves(rows, c)
        for k, f in enumerate(curves[PREFERRED].frequencies_hz):
            for d in (PREFERRED, NULL):
                cv = curves[d]
                out.append((float(f), c, d, float(cv.mean_norm[k]), float(cv.std_norm[k]),
                            int(cv.n_reps[k])))
    out.sort(key=lambda t: (t[0], t[1], t[2] != PREFERRED))
    return out


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def curves_csv(rows: Sequence[RunRow], header_lines: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for h in header_lines:
        buf.write(f"# {h}\n")
    degenerate = sorted({(r.frequency_hz, r.contrast, r.direction) for r in rows if r.degenerate})
    for f, c, d in degenerate:
        buf.write(f"# degenerate: frequency_hz={_fmt(f)} contrast={_fmt(c)} direction={d} "
                  "(no events)\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER.split(","))
    for f, c, d, m, s, n in curve_table(rows):
        w.writerow([_fmt(f), _fmt(c), d, _fmt(m), _fmt(s), n])
    return buf.getvalue()


def runs_csv(rows: Sequence[RunRow], header_lines: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for h in header_lines:
        buf.write(f"# {h}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_HEADER.split(","))
    for r in rows:
        w.writerow([_fmt(r.frequency_hz), _fmt(r.contrast), r.direction, r.rep,
                    "" if math.isnan(r.phase) else f"{r.phase:.6f}", r.response.n_events,
                    _fmt(r.response.rate_lr), _fmt(r.response.rate_rl), int(r.degenerate)])
    return buf.getvalue()
