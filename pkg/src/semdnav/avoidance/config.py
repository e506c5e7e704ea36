"""Network configuration with the tabulated defaults."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

from ..snn.params import POISSON_RATE_HZ, TABLE4, ConfigError, LifParams

SPTC_COLS = 64
SPTC_ROWS = 20
DVS_W = 128
DVS_H = 40

DEFAULT_SIZES: dict[str, int] = {
    "DVS": DVS_W * DVS_H,
    "SPTC": SPTC_COLS * SPTC_ROWS,
    "TDE_LR": SPTC_COLS * SPTC_ROWS,
    "TDE_RL": SPTC_COLS * SPTC_ROWS,
    "INT_LR": SPTC_COLS,
    "INT_RL": SPTC_COLS,
    "WTA": 64,
    "GI": 1,
    "ET": 1,
    "OFI": 1,
    "MOT1": 96,
    "MOT2": 96,
    "POIS1": 64,
    "POIS2": 1,
}

# Population -> parameter-table row.
PARAM_ROW = {"SPTC": "SPTC", "TDE_LR": "TDE", "TDE_RL": "TDE", "INT_LR": "INT",
             "INT_RL": "INT", "WTA": "WTA", "GI": "GI", "ET": "ET", "OFI": "OFI",
             "MOT1": "MOT", "MOT2": "MOT"}

# INT -> WTA inhibition by distance from the obstacle column.
NEIGHBOUR_WEIGHTS = (-5.0, -3.0, -2.0, -1.5)

DEFAULT_WEIGHTS: dict[str, float] = {
    "sptc_tde": 4.0,
    "tde_int": 1.0,
    "int_ofi": 1e-4,
    "wta_mot": 10.0,
    "wta_gi": 10.0,
    "et_mot": 10.0,
    "et_gi": 10.0,
    "gi_et": -10.0,
    "gi_wta": -10.0,
    "mot_wta": -30.0,
    "mot_et": -30.0,
    "mot_mot": -10.0,
    "mot_sensors": -30.0,
    "mot_wave": 10.0,
    "mot_self": -10.0,
    "pois1_wta": 1.0,
    "pois2_et": 0.3,
}


def _default_params() -> dict[str, LifParams]:
    return {name: TABLE4[row] for name, row in PARAM_ROW.items()}


@dataclass
class NetConfig:
    """Everything needed to assemble the avoidance network.

    Defaults reproduce the tabulated network; the fields below the table
    defaults are the free choices the tables leave open.
    """

    sizes: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SIZES))
    params: dict[str, LifParams] = field(default_factory=_default_params)
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    n_connect: int = 4
    poisson_rate_hz: float = POISSON_RATE_HZ
    seed: int = 1

    sptc_input_weight: float = 0.001
    tau_fac_ms: float = 7.0
    pois2_weight_scale: float = 1.0
    ofi_weight_scale: float = 3000.0
    wta_recurrent_weight: float = 0.5
    wta_recurrent_delay_ms: float = 1.0
    mot_hop_ms: float = 10.0
    compensate_hop_latency: bool = True
    mot2_mapping: str = "mirror"
    sensor_delay_ms: float = 0.1

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for name, n in self.sizes.items():
            if name not in DEFAULT_SIZES:
                raise ConfigError(f"sizes.{name}: unknown population")
            if n not in (0, DEFAULT_SIZES[name]):
                raise ConfigError(f"sizes.{name}: must be 0 or {DEFAULT_SIZES[name]}, got {n}")
        for key in self.weights:
            if key not in DEFAULT_WEIGHTS:
                raise ConfigError(f"weights.{key}: unknown weight")
        if self.n_connect < 0:
            raise ConfigError("n_connect must be >= 0")
        if self.mot2_mapping not in ("mirror", "literal"):
            raise ConfigError("mot2_mapping must be 'mirror' or 'literal'")
        if self.poisson_rate_hz < 0:
            raise ConfigError("poisson_rate_hz must be >= 0")
        if self.mot_hop_ms <= 0:
            raise ConfigError("mot_hop_ms must be positive")
        if self.tau_fac_ms <= 0:
            raise ConfigError("tau_fac_ms must be positive")
        if self.sptc_input_weight < 0 or self.ofi_weight_scale < 0 or self.pois2_weight_scale < 0:
            raise ConfigError("input weight and weight scales must be >= 0")

    def size(self, name: str) -> int:
        return self.sizes.get(name, DEFAULT_SIZES[name])

    def weight(self, key: str) -> float:
        return self.weights.get(key, DEFAULT_WEIGHTS[key])

    def with_(self, **changes: Any) -> "NetConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["params"] = {k: v.to_dict() for k, v in self.params.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "NetConfig":
        known = {f.name for f in fields(cls)}
        for key in d:
            if key not in known:
                raise ConfigError(f"network.{key}: unknown field")
        d = dict(d)
        if "params" in d:
            params = _default_params()
            for pop, over in d["params"].items():
                if pop not in params:
                    raise ConfigError(f"network.params.{pop}: unknown population")
                try:
                    params[pop] = params[pop].with_(**over)
                except TypeError as exc:
                    raise ConfigError(f"network.params.{pop}: {exc}") from None
            d["params"] = params
        if "sizes" in d:
            d["sizes"] = {**DEFAULT_SIZES, **d["sizes"]}
        if "weights" in d:
            d["weights"] = {**DEFAULT_WEIGHTS, **d["weights"]}
        return cls(**d)


def decision_only_sizes() -> dict[str, int]:
    """Sizes for a free-running decision layer: WTA, GI and POIS1 only."""
    return {k: (v if k in ("WTA", "GI", "POIS1") else 0) for k, v in DEFAULT_SIZES.items()}


def motion_only_sizes() -> dict[str, int]:
    """Camera, SPTC and both TDE layers (the motion-detector front end)."""
    keep = ("DVS", "SPTC", "TDE_LR", "TDE_RL")
    return {k: (v if k in keep else 0) for k, v in DEFAULT_SIZES.items()}
