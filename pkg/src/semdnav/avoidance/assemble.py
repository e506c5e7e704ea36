"""Build the collision-avoidance network from the connection table."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..snn import Network, Population, Projection, build_network
from ..snn.neuron import LifState, lif_step
from ..snn.params import DT_MS, ConfigError
from .config import DVS_H, DVS_W, NEIGHBOUR_WEIGHTS, SPTC_COLS, SPTC_ROWS, NetConfig
from .motor import MOT_SIZE, mot_injection

ROW_DELAY_MS = 0.1


@dataclass(frozen=True)
class TableRow:
    label: str
    source: str
    target: str
    weight_key: str
    pattern: str
    kind: str
    delay_ms: float = ROW_DELAY_MS


# One entry per row of the wiring table (NRP variant). ``pattern`` names the
# index map realised by ``_PATTERNS``.
TABLE5: tuple[TableRow, ...] = (
    TableRow("DVS->SPTC", "DVS", "SPTC", "sptc_input", "macropixel", "excitatory"),
    TableRow("SPTC->TDE_LR trigger", "SPTC", "TDE_LR", "sptc_tde", "one_to_one_inner", "trigger"),
    TableRow("SPTC->TDE_LR facilitator", "SPTC", "TDE_LR", "sptc_tde", "i_to_i+1", "facilitatory"),
    TableRow("SPTC->TDE_RL facilitator", "SPTC", "TDE_RL", "sptc_tde", "one_to_one_inner", "facilitatory"),
    TableRow("SPTC->TDE_RL trigger", "SPTC", "TDE_RL", "sptc_tde", "i_to_i+1", "trigger"),
    TableRow("TDE_RL->INT_RL", "TDE_RL", "INT_RL", "tde_int", "column", "excitatory"),
    TableRow("TDE_LR->INT_LR", "TDE_LR", "INT_LR", "tde_int", "column", "excitatory"),
    TableRow("INT_RL->WTA", "INT_RL", "WTA", "int_wta", "neighbourhood", "inhibitory"),
    TableRow("INT_RL->OFI", "INT_RL", "OFI", "int_ofi", "all_to_all", "excitatory"),
    TableRow("INT_LR->WTA", "INT_LR", "WTA", "int_wta", "neighbourhood", "inhibitory"),
    TableRow("INT_LR->OFI", "INT_LR", "OFI", "int_ofi", "all_to_all", "excitatory"),
    TableRow("WTA(0-31)->MOT1", "WTA", "MOT1", "wta_mot", "wta_left", "excitatory"),
    TableRow("WTA(32-63)->MOT2", "WTA", "MOT2", "wta_mot", "wta_right", "excitatory"),
    TableRow("WTA->GI", "WTA", "GI", "wta_gi", "all_to_all", "excitatory"),
    TableRow("ET->MOT1", "ET", "MOT1", "et_mot", "first", "excitatory"),
    TableRow("ET->GI", "ET", "GI", "et_gi", "all_to_all", "excitatory"),
    TableRow("GI->ET", "GI", "ET", "gi_et", "all_to_all", "inhibitory"),
    TableRow("GI->WTA", "GI", "WTA", "gi_wta", "all_to_all", "inhibitory"),
    TableRow("MOT1->WTA", "MOT1", "WTA", "mot_wta", "all_to_all", "inhibitory"),
    TableRow("MOT1->ET", "MOT1", "ET", "mot_et", "all_to_all", "inhibitory"),
    TableRow("MOT1->MOT2", "MOT1", "MOT2", "mot_mot", "all_to_all", "inhibitory"),
    TableRow("MOT1->Sensors", "MOT1", "SPTC", "mot_sensors", "all_to_all", "inhibitory"),
    TableRow("MOT1->MOT1 wave", "MOT1", "MOT1", "mot_wave", "chain", "excitatory", 10.0),
    TableRow("MOT1->MOT1 self", "MOT1", "MOT1", "mot_self", "one_to_one", "inhibitory"),
    TableRow("MOT2->WTA", "MOT2", "WTA", "mot_wta", "all_to_all", "inhibitory"),
    TableRow("MOT2->ET", "MOT2", "ET", "mot_et", "all_to_all", "inhibitory"),
    TableRow("MOT2->MOT1", "MOT2", "MOT1", "mot_mot", "all_to_all", "inhibitory"),
    TableRow("MOT2->Sensors", "MOT2", "SPTC", "mot_sensors", "all_to_all", "inhibitory"),
    TableRow("MOT2->MOT2 wave", "MOT2", "MOT2", "mot_wave", "chain", "excitatory", 10.0),
    TableRow("MOT2->MOT2 self", "MOT2", "MOT2", "mot_self", "one_to_one", "inhibitory"),
    TableRow("POIS1->WTA", "POIS1", "WTA", "pois1_wta", "one_to_one", "excitatory"),
    TableRow("POIS2->ET", "POIS2", "ET", "pois2_et", "one_to_one", "excitatory"),
)

# Not in the table: local recurrent excitation of the decision layer.
WTA_RECURRENT = TableRow("WTA->WTA recurrent", "WTA", "WTA", "wta_rec", "self_and_neighbours",
                         "excitatory")


def macropixel_index(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (np.asarray(y) // 2) * SPTC_COLS + np.asarray(x) // 2


def _p_macropixel(cfg, n_src, n_dst):
    pix = np.arange(DVS_W * DVS_H)
    return pix, macropixel_index(pix % DVS_W, pix // DVS_W), None


def _p_one_to_one(cfg, n_src, n_dst):
    i = np.arange(min(n_src, n_dst))
    return i, i, None


def _p_one_to_one_inner(cfg, n_src, n_dst):
    # every SPTC cell whose left neighbour exists (column 0 has no partner)
    i = np.arange(n_src)
    i = i[i % SPTC_COLS >= 1]
    return i, i, None


def _p_i_to_i1(cfg, n_src, n_dst):
    # source (row, c) -> target (row, c + 1), never wrapping across rows
    i = np.arange(n_src)
    i = i[i % SPTC_COLS < SPTC_COLS - 1]
    return i, i + 1, None


def _p_column(cfg, n_src, n_dst):
    i = np.arange(n_src)
    return i, i % SPTC_COLS, None


def _p_all_to_all(cfg, n_src, n_dst):
    pre, post = np.meshgrid(np.arange(n_src), np.arange(n_dst), indexing="ij")
    return pre.ravel(), post.ravel(), None


def _p_neighbourhood(cfg, n_src, n_dst):
    pre, post, w = [], [], []
    for d in range(-cfg.n_connect, cfg.n_connect + 1):
        wd = NEIGHBOUR_WEIGHTS[min(abs(d), len(NEIGHBOUR_WEIGHTS) - 1)]
        i = np.arange(n_src)
        j = i + d
        ok = (j >= 0) & (j < n_dst)
        pre.append(i[ok])
        post.append(j[ok])
        w.append(np.full(ok.sum(), wd))
    return np.concatenate(pre), np.concatenate(post), np.concatenate(w)


def _p_wta(side):
    def build(cfg, n_src, n_dst):
        idx = range(0, 32) if side == "left" else range(32, 64)
        pre = np.fromiter(idx, dtype=np.int64)
        post = np.array([mot_injection(int(i), cfg.mot2_mapping)[1] for i in pre])
        return pre, post, None
    return build


def _p_first(cfg, n_src, n_dst):
    return np.array([0]), np.array([0]), None


def _p_chain(cfg, n_src, n_dst):
    i = np.arange(n_src - 1)
    return i, i + 1, None


def _p_self_and_neighbours(cfg, n_src, n_dst):
    pre, post = [], []
    for d in (-1, 0, 1):
        i = np.arange(n_src)
        j = i + d
        ok = (j >= 0) & (j < n_dst)
        pre.append(i[ok])
        post.append(j[ok])
    return np.concatenate(pre), np.concatenate(post), None


_PATTERNS: dict[str, Callable] = {
    "macropixel": _p_macropixel,
    "one_to_one": _p_one_to_one,
    "one_to_one_inner": _p_one_to_one_inner,
    "i_to_i+1": _p_i_to_i1,
    "column": _p_column,
    "all_to_all": _p_all_to_all,
    "neighbourhood": _p_neighbourhood,
    "wta_left": _p_wta("left"),
    "wta_right": _p_wta("right"),
    "first": _p_first,
    "chain": _p_chain,
    "self_and_neighbours": _p_self_and_neighbours,
}


def _ticks(ms: float) -> int:
    return max(1, int(round(ms / DT_MS)))


def hop_latency_ticks(cfg: NetConfig) -> int:
    """Ticks between a wave synapse arriving at a resting motor neuron and its spike."""
    p = cfg.params["MOT1"]
    st = LifState.initial(p)
    w = cfg.weight("mot_wave")
    for k in range(1000):
        st, spiked = lif_step(st, p, [(w, "excitatory")] if k == 0 else [])
        if spiked:
            return k
    raise ConfigError("motor wave weight never drives a motor neuron to threshold")


def _row_weight(row: TableRow, cfg: NetConfig) -> float:
    if row.weight_key == "sptc_input":
        return cfg.sptc_input_weight
    if row.weight_key == "int_wta":
        return 0.0  # per-synapse weights come from the pattern
    if row.weight_key == "wta_rec":
        return cfg.wta_recurrent_weight
    w = cfg.weight(row.weight_key)
    if row.weight_key == "pois2_et":
        w *= cfg.pois2_weight_scale
    if row.weight_key == "int_ofi":
        w *= cfg.ofi_weight_scale
    return w


def _row_delay(row: TableRow, cfg: NetConfig) -> int:
    if row.pattern == "chain":
        hop = _ticks(cfg.mot_hop_ms)
        if cfg.compensate_hop_latency:
            hop -= hop_latency_ticks(cfg)
        return max(1, hop)
    if row.label == "WTA->WTA recurrent":
        return _ticks(cfg.wta_recurrent_delay_ms)
    if row.source == "DVS":
        return _ticks(cfg.sensor_delay_ms)
    return _ticks(row.delay_ms)


def populations(cfg: NetConfig) -> list[Population]:
    pops = [Population("DVS", cfg.size("DVS"), "input")]
    for name in ("SPTC", "TDE_LR", "TDE_RL", "INT_LR", "INT_RL", "WTA", "GI", "ET", "OFI",
                 "MOT1", "MOT2"):
        kind = "tde" if name.startswith("TDE") else "lif"
        pops.append(Population(name, cfg.size(name), kind, cfg.params[name],
                               tau_fac_ms=cfg.tau_fac_ms))
    ss = np.random.SeedSequence(cfg.seed)
    s1, s2 = (int(s.generate_state(1, dtype=np.uint64)[0]) for s in ss.spawn(2))
    pops.append(Population("POIS1", cfg.size("POIS1"), "poisson",
                           rate_hz=cfg.poisson_rate_hz, seed=s1))
    pops.append(Population("POIS2", cfg.size("POIS2"), "poisson",
                           rate_hz=cfg.poisson_rate_hz, seed=s2))
    return pops


def realise_rows(cfg: NetConfig) -> list[Projection]:
    """One projection per table row (plus the recurrent row).

    Rows touching a population of size 0 are skipped; any other row that
    cannot be mapped raises.
    """
    projections = []
    for row in TABLE5 + (WTA_RECURRENT,):
        n_src, n_dst = cfg.size(row.source), cfg.size(row.target)
        if n_src == 0 or n_dst == 0:
            continue
        builder = _PATTERNS.get(row.pattern)
        if builder is None:
            raise ConfigError(f"table row {row.label!r}: no index map for {row.pattern!r}")
        pre, post, w = builder(cfg, n_src, n_dst)
        if w is None:
            w = _row_weight(row, cfg)
        if row.label == "WTA->WTA recurrent" and cfg.wta_recurrent_weight == 0:
            continue
        projections.append(Projection(row.label, row.source, row.target, pre, post, w,
                                      _row_delay(row, cfg), row.kind))
    return projections


def assemble(cfg: NetConfig | None = None) -> Network:
    cfg = cfg or NetConfig()
    return build_network(populations(cfg), realise_rows(cfg))


def wiring_rows(net: Network):
    """CSV rows ``src_pop,src_idx,dst_pop,dst_idx,weight_nA,delay_ms,kind``."""
    yield ("src_pop", "src_idx", "dst_pop", "dst_idx", "weight_nA", "delay_ms", "kind")
    for s, a, d, b, w, dl, k in net.wiring():
        yield (s, a, d, b, f"{w:.6g}", f"{dl:.6g}", k)


def events_to_input(events: np.ndarray, t0_us: int, n_ticks: int,
                    cam_w: int = DVS_W, cam_h: int = DVS_H
                    ) -> tuple[tuple[np.ndarray, np.ndarray], int]:
    """Camera events -> ``(tick_offsets, pixel_indices)`` for the DVS population.

    Returns the input tuple and the number of events rejected for lying
    outside the sensor or the run window.
    """
    x = events["x"].astype(np.int64)
    y = events["y"].astype(np.int64)
    off = (events["t"].astype(np.int64) - t0_us) // int(round(DT_MS * 1000))
    ok = (x >= 0) & (x < cam_w) & (y >= 0) & (y < cam_h) & (off >= 0) & (off < n_ticks)
    return (off[ok], (y * cam_w + x)[ok]), int((~ok).sum())


def map_events_to_sptc(events: np.ndarray) -> tuple[np.ndarray, int]:
    """Target SPTC index of every in-range event, and the count rejected."""
    x = events["x"].astype(np.int64)
    y = events["y"].astype(np.int64)
    ok = (x >= 0) & (x < DVS_W) & (y >= 0) & (y < DVS_H)
    return macropixel_index(x[ok], y[ok]), int((~ok).sum())
