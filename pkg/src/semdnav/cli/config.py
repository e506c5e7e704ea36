"""Run configuration: a hierarchical YAML file whose keys carry their units.

Omitted keys take the package defaults. ``resolve`` turns the file into
typed objects; ``to_tree`` turns them back into the same key layout so the
fully resolved configuration can be echoed next to every result.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import yaml

from ..avoidance.config import DEFAULT_SIZES, DEFAULT_WEIGHTS, NetConfig
from ..characterize.grating import NULL, PREFERRED, TABLE_CONTRASTS, TABLE_FREQUENCIES_HZ
from ..characterize.tuning import DEFAULT_SAMPLING, REPS
from ..snn.params import ConfigError, LifParams
from ..vision.camera import CameraModel
from ..world.environment import KINDS
from ..world.episode import EpisodeConfig

# config key -> NetConfig field
NETWORK_KEYS = {
    "n_connect": "n_connect",
    "poisson_rate_hz": "poisson_rate_hz",
    "sptc_input_weight_na": "sptc_input_weight",
    "tau_fac_ms": "tau_fac_ms",
    "pois2_weight_scale": "pois2_weight_scale",
    "ofi_weight_scale": "ofi_weight_scale",
    "wta_recurrent_weight_na": "wta_recurrent_weight",
    "wta_recurrent_delay_ms": "wta_recurrent_delay_ms",
    "mot_hop_ms": "mot_hop_ms",
    "compensate_hop_latency": "compensate_hop_latency",
    "mot2_mapping": "mot2_mapping",
    "sensor_delay_ms": "sensor_delay_ms",
}
PARAM_KEYS = {
    "E_L_mv": "E_L", "C_m_pf": "C_m", "tau_m_ms": "tau_m", "t_ref_ms": "t_ref",
    "tau_syn_exc_ms": "tau_syn_exc", "tau_syn_inh_ms": "tau_syn_inh", "V_th_mv": "V_th",
    "V_reset_mv": "V_reset", "V_init_mv": "V_init", "I_offset_na": "I_offset",
}
CAMERA_KEYS = {
    "width_px": "width", "height_px": "height", "fov_deg": "fov_deg", "rate_hz": "rate_hz",
    "event_cap": "event_cap", "threshold": "threshold",
}
EPISODE_KEYS = {
    "budget_s": "budget_s", "adaptive_velocity": "adaptive_velocity",
    "fixed_velocity_au_per_s": "fixed_velocity_au", "omega_deg_per_s": "omega_deg",
    "samples_per_pixel": "samples_per_pixel", "texture_filter": "texture_filter",
}
# environment key -> generator keyword, per kind
ENV_KEYS = {
    "clutter": {"density_pct": "density", "arena_m": "arena_m"},
    "corridor": {"width_au": "width_au", "length_au": "length_au", "start_au": "start_au"},
    "gap_arena": {"w_var_au": "w_var_au", "fixed_au": "fixed_au", "half_m": "half_m"},
    "empty_box": {"side_m": "side_m"},
    "narrowing_corridor": {"start_width_au": "start_au", "end_width_au": "end_au",
                           "length_au": "length_au", "entry_au": "entry_au"},
}
ENV_DEFAULTS = {"clutter": {"density_pct": 15.0}, "corridor": {"width_au": 15.0},
                "gap_arena": {"w_var_au": 10.0}, "empty_box": {}, "narrowing_corridor": {}}
BATCH_GRIDS = ("clutter", "corridor", "gap_arena", "narrowing_corridor")


@dataclass(frozen=True)
class CharacterizeConfig:
    frequencies_hz: tuple[float, ...] = TABLE_FREQUENCIES_HZ
    contrasts: tuple[float, ...] = TABLE_CONTRASTS
    directions: tuple[str, ...] = (PREFERRED, NULL)
    reps: int = REPS
    duration_s: float = 4.0
    sampling: str = DEFAULT_SAMPLING
    camera: CameraModel = CameraModel()


@dataclass(frozen=True)
class BatchConfig:
    grid: str = "clutter"
    values: tuple[float, ...] = (5.0, 15.0, 25.0)
    seeds: tuple[int, ...] = tuple(range(10))
    compare_fixed_velocity: bool = False
    parallelism: int = 1


@dataclass
class RunConfig:
    network: NetConfig = field(default_factory=NetConfig)
    episode: EpisodeConfig = EpisodeConfig()
    environment_kind: str = "clutter"
    environment: dict[str, float] = field(default_factory=lambda: {"density": 15.0})
    env_seed: int = 0
    net_seed: int = 1
    characterize: CharacterizeConfig = CharacterizeConfig()
    batch: BatchConfig = BatchConfig()
    out_dir: str = "out"

    def with_seed(self, seed: int) -> "RunConfig":
        """Use ``seed`` for both the environment and the network."""
        return replace(self, env_seed=seed, net_seed=seed,
                       network=self.network.with_(seed=seed))

    def digest(self) -> str:
        return config_hash(to_tree(self))


def _path(prefix: str, key: str) -> str:
    return f"{prefix}.{key}" if prefix else key


def _check_keys(tree: Any, allowed: set[str], prefix: str) -> dict:
    if tree is None:
        return {}
    if not isinstance(tree, dict):
        raise ConfigError(f"{prefix}: expected a mapping, got {type(tree).__name__}")
    for key in tree:
        if key not in allowed:
            raise ConfigError(f"{_path(prefix, str(key))}: unknown key "
                              f"(allowed: {', '.join(sorted(allowed))})")
    return tree


def _typed(value: Any, kind: Callable, path: str) -> Any:
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    raise AssertionError(kind)


def _as_kind(default: Any) -> Callable:
    if isinstance(default, bool):
        return bool
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    return str


def _camera(tree: Any, base: CameraModel, prefix: str) -> CameraModel:
    tree = _check_keys(tree, set(CAMERA_KEYS), prefix)
    changes = {}
    for key, attr in CAMERA_KEYS.items():
        if key in tree:
            changes[attr] = _typed(tree[key], _as_kind(getattr(base, attr)), _path(prefix, key))
    cam = replace(base, **changes)
    if cam.width <= 0 or cam.height <= 0 or cam.rate_hz <= 0 or cam.fov_deg <= 0:
        raise ConfigError(f"{prefix}: sizes, field of view and rate must be positive")
    if cam.threshold <= 0:
        raise ConfigError(f"{_path(prefix, 'threshold')}: must be positive")
    if cam.event_cap < 0:
        raise ConfigError(f"{_path(prefix, 'event_cap')}: must be >= 0")
    return cam


def _network(tree: Any) -> NetConfig:
    allowed = set(NETWORK_KEYS) | {"sizes", "weights", "params"}
    tree = _check_keys(tree, allowed, "network")
    base = NetConfig()
    kw: dict[str, Any] = {}
    for key, attr in NETWORK_KEYS.items():
        if key in tree:
            kw[attr] = _typed(tree[key], _as_kind(getattr(base, attr)), f"network.{key}")
    sizes = _check_keys(tree.get("sizes"), set(DEFAULT_SIZES), "network.sizes")
    if sizes:
        kw["sizes"] = {**DEFAULT_SIZES,
                       **{k: _typed(v, int, f"network.sizes.{k}") for k, v in sizes.items()}}
    wkeys = {f"{k}_na": k for k in DEFAULT_WEIGHTS}
    weights = _check_keys(tree.get("weights"), set(wkeys), "network.weights")
    if weights:
        kw["weights"] = {**DEFAULT_WEIGHTS, **{wkeys[k]: _typed(v, float, f"network.weights.{k}")
                                               for k, v in weights.items()}}
    params = _check_keys(tree.get("params"), set(base.params), "network.params")
    if params:
        merged = dict(base.params)
        for pop, over in params.items():
            over = _check_keys(over, set(PARAM_KEYS), f"network.params.{pop}")
            ch = {PARAM_KEYS[k]: _typed(v, float, f"network.params.{pop}.{k}")
                  for k, v in over.items()}
            try:
                merged[pop] = merged[pop].with_(**ch)
            except ConfigError as exc:
                raise ConfigError(f"network.params.{pop}: {exc}") from None
        kw["params"] = merged
    try:
        return NetConfig(**kw)
    except ConfigError as exc:
        raise ConfigError(f"network: {exc}") from None


def _episode(tree: Any) -> EpisodeConfig:
    tree = _check_keys(tree, set(EPISODE_KEYS) | {"camera"}, "episode")
    base = EpisodeConfig()
    kw: dict[str, Any] = {}
    for key, attr in EPISODE_KEYS.items():
        if key in tree:
            kw[attr] = _typed(tree[key], _as_kind(getattr(base, attr)), f"episode.{key}")
    kw["camera"] = _camera(tree.get("camera"), base.camera, "episode.camera")
    try:
        return EpisodeConfig(**kw)
    except ConfigError as exc:
        raise ConfigError(f"episode: {exc}") from None


def _environment(tree: Any) -> tuple[str, dict[str, float]]:
    all_keys = {"kind"} | {k for m in ENV_KEYS.values() for k in m}
    tree = _check_keys(tree, all_keys, "environment")
    kind = _typed(tree.get("kind", "clutter"), str, "environment.kind")
    if kind not in KINDS:
        raise ConfigError(f"environment.kind: {kind!r} is not one of {', '.join(KINDS)}")
    allowed = ENV_KEYS[kind]
    params = dict(ENV_DEFAULTS[kind])
    for key, value in tree.items():
        if key == "kind":
            continue
        if key not in allowed:
            raise ConfigError(f"environment.{key}: not a parameter of kind {kind!r}")
        params[key] = _typed(value, float, f"environment.{key}")
    return kind, {allowed[k]: v for k, v in params.items()}


def _float_list(value: Any, path: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{path}: expected a non-empty list")
    return tuple(_typed(v, float, f"{path}[{i}]") for i, v in enumerate(value))


def _characterize(tree: Any) -> CharacterizeConfig:
    keys = {"frequencies_hz", "contrasts", "directions", "reps", "duration_s", "sampling",
            "camera"}
    tree = _check_keys(tree, keys, "characterize")
    base = CharacterizeConfig()
    kw: dict[str, Any] = {}
    if "frequencies_hz" in tree:
        kw["frequencies_hz"] = _float_list(tree["frequencies_hz"], "characterize.frequencies_hz")
        if any(f < 0 for f in kw["frequencies_hz"]):
            raise ConfigError("characterize.frequencies_hz: frequencies must be >= 0")
    if "contrasts" in tree:
        kw["contrasts"] = _float_list(tree["contrasts"], "characterize.contrasts")
        if any(not 0 <= c <= 1 for c in kw["contrasts"]):
            raise ConfigError("characterize.contrasts: printed contrast must lie in [0, 1]")
    if "directions" in tree:
        d = tree["directions"]
        if not isinstance(d, list) or not d or any(x not in (PREFERRED, NULL) for x in d):
            raise ConfigError(f"characterize.directions: list of {PREFERRED!r}/{NULL!r}")
        kw["directions"] = tuple(d)
    if "reps" in tree:
        kw["reps"] = _typed(tree["reps"], int, "characterize.reps")
        if kw["reps"] < 1:
            raise ConfigError("characterize.reps: must be >= 1")
    if "duration_s" in tree:
        kw["duration_s"] = _typed(tree["duration_s"], float, "characterize.duration_s")
        if kw["duration_s"] <= 0:
            raise ConfigError("characterize.duration_s: must be positive")
    if "sampling" in tree:
        kw["sampling"] = _typed(tree["sampling"], str, "characterize.sampling")
        if kw["sampling"] not in ("point", "area"):
            raise ConfigError("characterize.sampling: 'point' or 'area'")
    kw["camera"] = _camera(tree.get("camera"), base.camera, "characterize.camera")
    return replace(base, **kw)


def _batch(tree: Any) -> BatchConfig:
    tree = _check_keys(tree, {"grid", "values", "seeds", "compare_fixed_velocity",
                              "parallelism"}, "batch")
    base = BatchConfig()
    kw: dict[str, Any] = {}
    if "grid" in tree:
        kw["grid"] = _typed(tree["grid"], str, "batch.grid")
        if kw["grid"] not in BATCH_GRIDS:
            raise ConfigError(f"batch.grid: {kw['grid']!r} is not one of "
                              f"{', '.join(BATCH_GRIDS)}")
    if "values" in tree:
        kw["values"] = _float_list(tree["values"], "batch.values")
    if "seeds" in tree:
        s = tree["seeds"]
        if isinstance(s, int) and not isinstance(s, bool):
            if s < 1:
                raise ConfigError("batch.seeds: need at least one seed")
            kw["seeds"] = tuple(range(s))
        elif isinstance(s, list) and s:
            kw["seeds"] = tuple(_typed(v, int, f"batch.seeds[{i}]") for i, v in enumerate(s))
        else:
            raise ConfigError("batch.seeds: a seed count or a non-empty list of seeds")
    if "compare_fixed_velocity" in tree:
        kw["compare_fixed_velocity"] = _typed(tree["compare_fixed_velocity"], bool,
                                              "batch.compare_fixed_velocity")
    if "parallelism" in tree:
        kw["parallelism"] = _typed(tree["parallelism"], int, "batch.parallelism")
        if kw["parallelism"] < 1:
            raise ConfigError("batch.parallelism: must be >= 1")
    return replace(base, **kw)


def resolve(tree: dict | None) -> RunConfig:
    """Typed configuration from a parsed file; every error names its key path."""
    tree = _check_keys(tree or {}, {"network", "episode", "environment", "seeds",
                                    "characterize", "batch", "output"}, "")
    seeds = _check_keys(tree.get("seeds"), {"env", "network"}, "seeds")
    env_seed = _typed(seeds.get("env", 0), int, "seeds.env")
    net_seed = _typed(seeds.get("network", 1), int, "seeds.network")
    output = _check_keys(tree.get("output"), {"dir"}, "output")
    kind, env = _environment(tree.get("environment"))
    network = _network(tree.get("network")).with_(seed=net_seed)
    return RunConfig(network=network, episode=_episode(tree.get("episode")),
                     environment_kind=kind, environment=env, env_seed=env_seed,
                     net_seed=net_seed, characterize=_characterize(tree.get("characterize")),
                     batch=_batch(tree.get("batch")),
                     out_dir=_typed(output.get("dir", "out"), str, "output.dir"))


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return resolve({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        tree = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from None
    if tree is not None and not isinstance(tree, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return resolve(tree)


def _camera_tree(cam: CameraModel) -> dict:
    return {k: getattr(cam, a) for k, a in CAMERA_KEYS.items()}


def _lif_tree(p: LifParams) -> dict:
    return {k: getattr(p, a) for k, a in PARAM_KEYS.items()}


def to_tree(cfg: RunConfig) -> dict:
    """The resolved configuration in the file layout."""
    net = cfg.network
    env_keys = {v: k for k, v in ENV_KEYS[cfg.environment_kind].items()}
    ch = cfg.characterize
    return {
        "seeds": {"env": cfg.env_seed, "network": cfg.net_seed},
        "network": {
            **{k: getattr(net, a) for k, a in NETWORK_KEYS.items()},
            "sizes": {k: net.size(k) for k in DEFAULT_SIZES},
            "weights": {f"{k}_na": net.weight(k) for k in DEFAULT_WEIGHTS},
            "params": {pop: _lif_tree(p) for pop, p in sorted(net.params.items())},
        },
        "episode": {**{k: getattr(cfg.episode, a) for k, a in EPISODE_KEYS.items()},
                    "camera": _camera_tree(cfg.episode.camera)},
        "environment": {"kind": cfg.environment_kind,
                        **{env_keys[k]: v for k, v in cfg.environment.items()}},
        "characterize": {"frequencies_hz": list(ch.frequencies_hz),
                         "contrasts": list(ch.contrasts), "directions": list(ch.directions),
                         "reps": ch.reps, "duration_s": ch.duration_s, "sampling": ch.sampling,
                         "camera": _camera_tree(ch.camera)},
        "batch": {"grid": cfg.batch.grid, "values": list(cfg.batch.values),
                  "seeds": list(cfg.batch.seeds),
                  "compare_fixed_velocity": cfg.batch.compare_fixed_velocity,
                  "parallelism": cfg.batch.parallelism},
        "output": {"dir": cfg.out_dir},
    }


def dump_tree(tree: dict) -> str:
    return yaml.safe_dump(tree, sort_keys=True, default_flow_style=False)


def config_hash(tree: dict) -> str:
    """Digest of the resolved tree; parallelism and output location are left out
    so that they cannot change result headers."""
    t = {k: v for k, v in tree.items() if k != "output"}
    t["batch"] = {k: v for k, v in t.get("batch", {}).items() if k != "parallelism"}
    return hashlib.sha256(dump_tree(t).encode()).hexdigest()[:16]
