"""Deterministic fixed-timestep spiking network kernel."""

from .network import (Connection, Network, Population, Projection, SpikeRecord,
                      build_network)
from .neuron import LifState, SimClock, TdeState, lif_step, tde_step
from .params import (DT_MS, TABLE4, ConfigError, LifParams, Propagator,
                     SimulationIntegrityError)

__all__ = [
    "Connection", "Network", "Population", "Projection", "SpikeRecord", "build_network",
    "LifState", "SimClock", "TdeState", "lif_step", "tde_step",
    "DT_MS", "TABLE4", "ConfigError", "LifParams", "Propagator", "SimulationIntegrityError",
]
