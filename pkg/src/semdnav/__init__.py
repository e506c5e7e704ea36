"""Event-driven spiking collision avoidance: camera, motion detectors, decision layer."""

__version__ = "0.1.0"
