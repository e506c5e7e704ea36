"""Single-neuron step functions mirroring the kernel, for tests and tooling."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .params import DT_MS, LifParams, Propagator, SimulationIntegrityError


@dataclass(frozen=True)
class SimClock:
    tick: int = 0
    dt: float = DT_MS

    def advance(self, n: int = 1) -> "SimClock":
        if n < 0:
            raise ValueError("the clock never moves backwards")
        return replace(self, tick=self.tick + n)

    @property
    def time_ms(self) -> float:
        return self.tick * self.dt


@dataclass(frozen=True)
class LifState:
    V_m: float
    I_exc: float = 0.0
    I_inh: float = 0.0
    refractory_until: int = 0
    tick: int = 0

    @classmethod
    def initial(cls, params: LifParams) -> "LifState":
        return cls(V_m=params.V_init)


@dataclass(frozen=True)
class TdeState:
    lif: LifState
    tau_fac: float = 10.0
    last_fac_tick: int = -1

    def gain(self, tick: int, dt: float = DT_MS) -> float:
        if self.last_fac_tick < 0:
            return 0.0
        return math.exp(-(tick - self.last_fac_tick) * dt / self.tau_fac)


def lif_step(state: LifState, params: LifParams,
             arrivals: Sequence[tuple[float, str]] = (),
             dt: float = DT_MS) -> tuple[LifState, bool]:
    """Advance one tick. ``arrivals`` are ``(weight_nA, kind)`` pairs due now."""
    prop = Propagator.from_params(params, dt)
    ie, ii = state.I_exc, state.I_inh
    for w, kind in arrivals:
        if kind == "inhibitory":
            ii += min(w, 0.0)
        else:
            ie += max(w, 0.0)
    t = state.tick
    refractory = t < state.refractory_until
    if refractory:
        v = params.V_reset
    else:
        v = (params.E_L + (state.V_m - params.E_L) * prop.P22 + ie * prop.P21_exc
             + ii * prop.P21_inh + params.I_offset * prop.P20)
    ie *= prop.P11_exc
    ii *= prop.P11_inh
    if not all(math.isfinite(x) for x in (v, ie, ii)):
        raise SimulationIntegrityError(f"non-finite LIF state at tick {t}")
    spiked = not refractory and v >= params.V_th
    ref = state.refractory_until
    if spiked:
        v = params.V_reset
        ref = t + prop.ref_ticks
    return LifState(v, ie, ii, ref, t + 1), spiked


def tde_step(state: TdeState, params: LifParams, fac_arrival: bool,
             trig_arrivals: Sequence[float] = (), dt: float = DT_MS
             ) -> tuple[TdeState, bool]:
    """Facilitation re-arms the gain to 1; triggers inject ``w * gain``."""
    t = state.lif.tick
    if fac_arrival:
        state = replace(state, last_fac_tick=t)
    g = state.gain(t, dt)
    current = sum(trig_arrivals) * g
    arrivals = [(current, "excitatory")] if current > 0 else []
    lif, spiked = lif_step(state.lif, params, arrivals, dt)
    return replace(state, lif=lif), spiked
