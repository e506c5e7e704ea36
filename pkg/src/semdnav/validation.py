"""Release-gate checks of structural invariants.

Each check returns a ``CheckResult``; ``run_all`` executes the suite.
``inject`` names a deliberate fault used to prove that a check can fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .avoidance.assemble import assemble
from .avoidance.config import DEFAULT_SIZES, NetConfig
from .snn.network import Population, Projection, build_network
from .snn.params import DT_MS, TABLE4, LifParams
from .vision.camera import CameraModel, generate_events
from .vision.render import render_frame

FAULTS = ("tde-decay-sign", "no-mot-wta")
TDE_DT_GRID_MS = (1, 2, 5, 10, 20, 50, 100)
CENSUS_NEURONS = 4000
CENSUS_SYNAPSES = 300_000
CENSUS_TOLERANCE = 0.2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


# ---- kernel fidelity ---------------------------------------------------

def _oracle_trace(p: LifParams, arrivals: list[tuple[float, float]], t_end_ms: float,
                  sample_ms: np.ndarray) -> np.ndarray:
    """Membrane potential from an adaptive-step ODE solve.

    ``arrivals`` are ``(time_ms, weight_nA)``; each one steps the excitatory
    or inhibitory current. Integration restarts at every arrival.
    """
    def rhs(_t, y):
        v, ie, ii = y
        return [-(v - p.E_L) / p.tau_m + 1000.0 * (ie + ii + p.I_offset) / p.C_m,
                -ie / p.tau_syn_exc, -ii / p.tau_syn_inh]

    y = np.array([p.V_init, 0.0, 0.0])
    t = 0.0
    out = np.empty(sample_ms.shape[0])
    for tb in sorted({ta for ta, _ in arrivals} | {t_end_ms}):
        if tb > t:
            sol = solve_ivp(rhs, (t, tb), y, method="RK45", rtol=1e-10, atol=1e-10,
                            dense_output=True)
            sel = (sample_ms > t) & (sample_ms <= tb)
            out[sel] = sol.sol(sample_ms[sel])[0]
            y = sol.y[:, -1].copy()
            t = tb
        for ta, w in arrivals:
            if ta == tb:
                y[1 if w >= 0 else 2] += w
    return out


def lif_trace_error(seed: int, duration_ms: float = 100.0, n_inputs: int = 20) -> float:
    """Largest gap between the kernel and the ODE oracle for one random input sequence."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
    base = TABLE4["INT"]
    # subthreshold so the trace is smooth; reset behaviour is covered elsewhere
    p = base.with_(V_th=1e6, I_offset=float(rng.uniform(0.0, 0.2)))
    n_ticks = int(round(duration_ms / DT_MS))
    ticks = np.sort(rng.integers(0, n_ticks - 1, size=n_inputs))
    weights = rng.uniform(-2.0, 2.0, size=n_inputs)
    pops = [Population("IN", n_inputs, "input"), Population("N", 1, "lif", p)]
    exc = weights >= 0
    prs = [Projection("exc", "IN", "N", np.nonzero(exc)[0], np.zeros(exc.sum(), np.int64),
                      weights[exc], 1, "excitatory"),
           Projection("inh", "IN", "N", np.nonzero(~exc)[0], np.zeros((~exc).sum(), np.int64),
                      weights[~exc], 1, "inhibitory")]
    net = build_network(pops, [q for q in prs if len(q)])
    _, trace = net.run(n_ticks, {"IN": (ticks, np.arange(n_inputs))}, probe=[("N", 0)])
    # an input at tick s with delay 1 lands at tick s + 1, i.e. at time (s + 1) dt
    arrivals = [((int(s) + 1) * DT_MS, float(w)) for s, w in zip(ticks, weights)]
    sample = (np.arange(n_ticks) + 1) * DT_MS
    oracle = _oracle_trace(p, arrivals, n_ticks * DT_MS, sample)
    return float(np.max(np.abs(trace[:, 0] - oracle)))


def check_ode_oracle(n_sequences: int = 50, tol_mv: float = 0.1) -> CheckResult:
    errs = [lif_trace_error(s) for s in range(n_sequences)]
    worst = max(errs)
    return CheckResult("lif_ode_oracle", worst <= tol_mv,
                       f"max |V_kernel - V_ode| = {worst:.2e} mV over {n_sequences} "
                       f"sequences (tol {tol_mv} mV)")


# ---- TDE ----------------------------------------------------------------

def tde_burst(dt_ms: float, tau_fac_ms: float = NetConfig.tau_fac_ms, weight_na: float = 4.0,
              window_ms: float = 300.0) -> int:
    """Output spikes of one TDE for a facilitation/trigger pair ``dt_ms`` apart.

    Negative ``dt_ms`` puts the trigger first.
    """
    pops = [Population("FAC", 1, "input"), Population("TRIG", 1, "input"),
            Population("TDE", 1, "tde", TABLE4["TDE"], tau_fac_ms=tau_fac_ms)]
    prs = [Projection("fac", "FAC", "TDE", [0], [0], weight_na, 1, "facilitatory"),
           Projection("trig", "TRIG", "TDE", [0], [0], weight_na, 1, "trigger")]
    net = build_network(pops, prs)
    n = int(round(window_ms / DT_MS))
    t0 = 50
    lag = int(round(dt_ms / DT_MS))
    t_fac, t_trig = (t0, t0 + lag) if lag >= 0 else (t0 - lag, t0)
    rec = net.run(n, {"FAC": (np.array([t_fac]), np.array([0])),
                      "TRIG": (np.array([t_trig]), np.array([0]))})
    return rec.count("TDE")


def check_tde_monotonic(tau_fac_ms: float = NetConfig.tau_fac_ms) -> CheckResult:
    counts = [tde_burst(d, tau_fac_ms) for d in TDE_DT_GRID_MS]
    negative = [tde_burst(-d, tau_fac_ms) for d in (1, 5, 20)]
    mono = all(a >= b for a, b in zip(counts, counts[1:]))
    ok = mono and not any(negative) and counts[0] > counts[-1]
    return CheckResult("tde_monotonicity", ok,
                       f"bursts over dt {list(TDE_DT_GRID_MS)} ms = {counts}; "
                       f"dt < 0 -> {negative}")


# ---- decision and motor layers ------------------------------------------

def _decision_motor_config(seed: int, drop_mot_wta: bool = False) -> NetConfig:
    keep = ("WTA", "GI", "ET", "POIS1", "POIS2", "MOT1", "MOT2")
    sizes = {k: (v if k in keep else 0) for k, v in DEFAULT_SIZES.items()}
    weights = {"mot_wta": 0.0} if drop_mot_wta else {}
    return NetConfig(sizes=sizes, seed=seed, weights=weights)


def mot_intervals(ticks: np.ndarray, gap_ticks: int) -> list[tuple[int, int]]:
    """Group sorted motor spike ticks into waves separated by more than ``gap_ticks``."""
    out: list[tuple[int, int]] = []
    for t in np.sort(ticks).tolist():
        if out and t - out[-1][1] <= gap_ticks:
            out[-1] = (out[-1][0], t)
        else:
            out.append((t, t))
    return out


def decision_motor_activity(duration_ms: float, seed: int):
    cfg = _decision_motor_config(seed)
    net = assemble(cfg)
    rec = net.run(int(round(duration_ms / DT_MS)))
    hop = int(round(cfg.mot_hop_ms / DT_MS))
    return rec, hop


def check_saccadic_suppression(drop_mot_wta: bool = False, n_waves: int = 12,
                               seed: int = 3) -> CheckResult:
    """Full-length left turns are forced repeatedly; the WTA must stay silent
    while either motor chain is active."""
    cfg = _decision_motor_config(seed, drop_mot_wta)
    net = assemble(cfg)
    hop = int(round(cfg.mot_hop_ms / DT_MS))
    rec = net.run(int(round(300 / DT_MS)))
    for _ in range(n_waves):
        net.state_of("MOT1")["V_m"][0] = 0.0  # above threshold: a full wave starts
        rec = rec.concat(net.run(int(round(1300 / DT_MS))))
    mot_t = np.concatenate([rec.of("MOT1")[0], rec.of("MOT2")[0]])
    waves = mot_intervals(mot_t, hop + hop // 2)
    wta_t = rec.of("WTA")[0]
    inside = sum(int(np.count_nonzero((wta_t > a) & (wta_t <= b))) for a, b in waves)
    active = sum(b - a for a, b in waves) * DT_MS / 1000.0
    return CheckResult("saccadic_suppression", inside == 0 and len(waves) > 0,
                       f"{inside} WTA spikes during {len(waves)} motor waves "
                       f"({active:.1f} s of motor activity, {wta_t.size} WTA spikes in total)")


def check_motor_exclusivity(seeds: Sequence[int] = (1, 2, 3, 4, 5),
                            duration_ms: float = 100_000.0,
                            window_ms: float = 50.0) -> CheckResult:
    """No left-chain spike has a right-chain spike within ``window_ms``."""
    conflicts = 0
    coincident = 0
    n_waves = 0
    for seed in seeds:
        rec, hop = decision_motor_activity(duration_ms, seed)
        t1, t2 = rec.of("MOT1")[0], rec.of("MOT2")[0]
        n_waves += len(mot_intervals(t1, hop + hop // 2)) + len(mot_intervals(t2, hop + hop // 2))
        w = int(round(window_ms / DT_MS))
        conflicts += sum(1 for t in t1.tolist() if np.any(np.abs(t2 - t) < w))
        # winners on both sides in one tick cannot be separated by any delayed synapse
        t, i = rec.of("WTA")
        for tt in np.unique(t).tolist():
            side = i[t == tt] < 32
            coincident += bool(side.any() and (~side).any())
    return CheckResult("motor_exclusivity", conflicts == 0 and n_waves > 0,
                       f"{conflicts} left spikes with a right spike within {window_ms:g} ms "
                       f"over {len(seeds)} x {duration_ms / 1000:g} s ({n_waves} waves); "
                       f"{coincident} same-tick winners on both sides")


def check_mot_wave_timing(tolerance_ticks: int = 1) -> CheckResult:
    cfg = _decision_motor_config(seed=1).with_(poisson_rate_hz=0.0)
    net = assemble(cfg)
    net.state_of("MOT1")["V_m"][0] = 0.0  # above threshold: fires on the next tick
    rec = net.run(int(round(1500 / DT_MS)))
    t, i = rec.of("MOT1")
    first = {}
    for tt, ii in zip(t.tolist(), i.tolist()):
        first.setdefault(ii, tt)
    idx = sorted(first)
    hop = int(round(cfg.mot_hop_ms / DT_MS))
    complete = idx == list(range(DEFAULT_SIZES["MOT1"]))
    gaps = np.diff([first[k] for k in idx])
    worst = int(np.max(np.abs(gaps - hop))) if gaps.size else -1
    ok = complete and 0 <= worst <= tolerance_ticks
    return CheckResult("mot_wave_timing", ok,
                       f"{len(idx)} of {DEFAULT_SIZES['MOT1']} motor neurons reached; "
                       f"hop {hop} ticks, worst deviation {worst} ticks")


# ---- camera and census --------------------------------------------------

def check_event_cap() -> CheckResult:
    from .world.environment import clutter

    cam = CameraModel(threshold=0.02)
    env = clutter(25.0, seed=4)
    scene = env.scene()
    worst = 0
    capped = 0
    rng = np.random.default_rng(11)
    for _ in range(10):
        a = render_frame(scene, (0.0, 0.0, float(rng.uniform(-np.pi, np.pi))), cam)
        b = render_frame(scene, (0.0, 0.0, float(rng.uniform(-np.pi, np.pi))), cam)
        n = generate_events(a, b, 0, cam).shape[0]
        worst = max(worst, n)
        capped += n == cam.event_cap
    ok = worst <= cam.event_cap and capped > 0
    return CheckResult("event_cap", ok,
                       f"max {worst} events per cycle (cap {cam.event_cap}); "
                       f"{capped} of 10 frame pairs hit the cap")


def check_census() -> CheckResult:
    c = assemble().census()
    n_ok = abs(c["neurons"] - CENSUS_NEURONS) <= CENSUS_TOLERANCE * CENSUS_NEURONS
    s_ok = abs(c["synapses"] - CENSUS_SYNAPSES) <= CENSUS_TOLERANCE * CENSUS_SYNAPSES
    return CheckResult("network_census", n_ok and s_ok,
                       f"{c['neurons']} neurons, {c['synapses']} synapses "
                       f"(targets ~{CENSUS_NEURONS} / ~{CENSUS_SYNAPSES}, "
                       f"±{CENSUS_TOLERANCE:.0%})")


# ---- determinism --------------------------------------------------------

def check_episode_determinism(budget_s: float = 2.0) -> CheckResult:
    from .world.environment import clutter
    from .world.episode import run_episode

    runs = [run_episode(clutter(15.0, seed=2), seed=2, budget_s=budget_s) for _ in range(2)]
    a, b = runs
    same = (a.outcome == b.outcome and a.raster.equals(b.raster)
            and all(np.array_equal(getattr(a.trajectory, f), getattr(b.trajectory, f))
                    for f in ("t_s", "x", "y", "heading", "mode")))
    return CheckResult("episode_determinism", same,
                       f"two {budget_s:g} s runs: {len(a.trajectory)} poses, "
                       f"{len(a.raster)} raster spikes, identical={same}")


def check_batch_determinism(budget_s: float = 1.0) -> CheckResult:
    from .cli.batch import BatchTask, run_batch, summary_csv, runs_csv

    tasks = [BatchTask("clutter", v, s, True, budget_s) for v in (5.0, 25.0) for s in (0, 1)]
    out = []
    for par in (1, 2):
        res = run_batch(tasks, parallelism=par)
        out.append(runs_csv(res) + summary_csv(res))
    same = out[0] == out[1]
    return CheckResult("batch_determinism", same,
                       f"{len(tasks)} episodes at parallelism 1 and 2, identical output={same}")


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "lif_ode_oracle": check_ode_oracle,
    "tde_monotonicity": check_tde_monotonic,
    "saccadic_suppression": check_saccadic_suppression,
    "motor_exclusivity": check_motor_exclusivity,
    "mot_wave_timing": check_mot_wave_timing,
    "event_cap": check_event_cap,
    "network_census": check_census,
    "episode_determinism": check_episode_determinism,
    "batch_determinism": check_batch_determinism,
}


def run_all(inject: str | None = None, only: Sequence[str] | None = None) -> list[CheckResult]:
    if inject is not None and inject not in FAULTS:
        raise ValueError(f"unknown fault {inject!r}; expected one of {FAULTS}")
    results = []
    for name, fn in CHECKS.items():
        if only and name not in only:
            continue
        if name == "tde_monotonicity" and inject == "tde-decay-sign":
            results.append(check_tde_monotonic(tau_fac_ms=-10.0))
        elif name == "saccadic_suppression" and inject == "no-mot-wta":
            results.append(check_saccadic_suppression(drop_mot_wta=True))
        else:
            results.append(fn())
    return results
