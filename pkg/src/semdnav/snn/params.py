"""Neuron parameter sets and exact-propagator coefficients.

Units throughout the kernel: mV, ms, pF, nA. A current of 1 nA into 1 pF
charges the membrane at 1000 mV/ms, hence the factor 1000 below.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

DT_MS = 0.1


class ConfigError(ValueError):
    """Invalid network, population or connection configuration."""


class SimulationIntegrityError(RuntimeError):
    """The simulation produced a non-finite state or overflowed a bound."""


@dataclass(frozen=True)
class LifParams:
    E_L: float
    C_m: float
    tau_m: float
    t_ref: float
    tau_syn_exc: float
    tau_syn_inh: float
    V_th: float
    V_reset: float
    V_init: float
    I_offset: float = 0.0

    def __post_init__(self) -> None:
        for name in ("C_m", "tau_m", "tau_syn_exc", "tau_syn_inh"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be strictly positive, got {value}")
        if self.t_ref < 0:
            raise ConfigError(f"t_ref must be non-negative, got {self.t_ref}")
        if not self.V_reset < self.V_th:
            raise ConfigError(f"V_reset ({self.V_reset}) must be below V_th ({self.V_th})")

    def with_(self, **changes: float) -> "LifParams":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


# Neuron parameter table of the NEST network used in closed loop.
TABLE4: dict[str, LifParams] = {
    "SPTC": LifParams(E_L=-60.5, C_m=25.0, tau_m=20.0, t_ref=1.0, tau_syn_exc=10.0,
                      tau_syn_inh=10.0, V_th=-60.0, V_reset=-60.5, V_init=-60.5),
    "TDE": LifParams(E_L=-60.0, C_m=250.0, tau_m=10.0, t_ref=1.0, tau_syn_exc=10.0,
                     tau_syn_inh=10.0, V_th=-30.0, V_reset=-85.0, V_init=-60.0),
    "INT": LifParams(E_L=-70.0, C_m=250.0, tau_m=20.0, t_ref=1.0, tau_syn_exc=5.0,
                     tau_syn_inh=5.0, V_th=-40.0, V_reset=-70.0, V_init=-65.0),
    "WTA": LifParams(E_L=-65.0, C_m=250.0, tau_m=20.0, t_ref=1.0, tau_syn_exc=5.0,
                     tau_syn_inh=80.0, V_th=-50.0, V_reset=-68.0, V_init=-65.0),
    "MOT": LifParams(E_L=-65.0, C_m=250.0, tau_m=20.0, t_ref=2.0, tau_syn_exc=5.0,
                     tau_syn_inh=5.0, V_th=-50.0, V_reset=-68.0, V_init=-65.0),
    "GI": LifParams(E_L=-65.0, C_m=250.0, tau_m=30.0, t_ref=2.0, tau_syn_exc=40.0,
                    tau_syn_inh=5.0, V_th=-50.0, V_reset=-68.0, V_init=-65.0),
    "OFI": LifParams(E_L=-80.0, C_m=250.0, tau_m=200.0, t_ref=1.0, tau_syn_exc=100.0,
                     tau_syn_inh=30.0, V_th=-40.0, V_reset=-80.0, V_init=-75.0),
    "ET": LifParams(E_L=-65.0, C_m=250.0, tau_m=20.0, t_ref=1.0, tau_syn_exc=5.0,
                    tau_syn_inh=80.0, V_th=-50.0, V_reset=-68.0, V_init=-65.0),
}

POISSON_RATE_HZ = 100.0


def psc_to_voltage(tau_syn: float, tau_m: float, C_m: float, h: float) -> float:
    """Voltage change after ``h`` ms caused by a unit (1 nA) exponential PSC.

    Stable for ``tau_syn == tau_m`` where the closed form degenerates to
    ``h * exp(-h / tau) / C``.
    """
    a = 1.0 / tau_syn - 1.0 / tau_m
    if abs(a * h) < 1e-12:
        shape = h
    else:
        shape = -math.expm1(-h * a) / a
    return 1000.0 / C_m * math.exp(-h / tau_m) * shape


@dataclass(frozen=True)
class Propagator:
    """Per-tick coefficients of the exact solution of the linear subsystem."""

    P22: float
    P11_exc: float
    P11_inh: float
    P21_exc: float
    P21_inh: float
    P20: float
    ref_ticks: int

    @classmethod
    def from_params(cls, p: LifParams, dt: float = DT_MS) -> "Propagator":
        P22 = math.exp(-dt / p.tau_m)
        return cls(
            P22=P22,
            P11_exc=math.exp(-dt / p.tau_syn_exc),
            P11_inh=math.exp(-dt / p.tau_syn_inh),
            P21_exc=psc_to_voltage(p.tau_syn_exc, p.tau_m, p.C_m, dt),
            P21_inh=psc_to_voltage(p.tau_syn_inh, p.tau_m, p.C_m, dt),
            P20=1000.0 * p.tau_m / p.C_m * (1.0 - P22),
            ref_ticks=int(round(p.t_ref / dt)),
        )
