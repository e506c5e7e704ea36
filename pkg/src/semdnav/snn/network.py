"""Populations, connections and the runnable :class:`Network`."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernel as K
from .params import DT_MS, ConfigError, LifParams, Propagator, SimulationIntegrityError

KINDS = ("excitatory", "inhibitory", "facilitatory", "trigger")
_KIND_CODE = {"excitatory": K.SYN_EXC, "inhibitory": K.SYN_INH,
              "facilitatory": K.SYN_FAC, "trigger": K.SYN_TRIG}
POP_KINDS = ("lif", "tde", "poisson", "input")


@dataclass(frozen=True)
class Population:
    """A homogeneous group of neurons or spike sources.

    ``kind`` is one of ``lif``, ``tde`` (LIF output neuron behind a
    facilitation/trigger synapse pair), ``poisson`` or ``input`` (spikes
    injected by the caller, e.g. camera pixels or a scheduled source).
    """

    name: str
    size: int
    kind: str = "lif"
    params: LifParams | None = None
    rate_hz: float = 0.0
    seed: int = 0
    tau_fac_ms: float = 10.0

    def __post_init__(self) -> None:
        if self.kind not in POP_KINDS:
            raise ConfigError(f"population {self.name!r}: unknown kind {self.kind!r}")
        if self.size < 0:
            raise ConfigError(f"population {self.name!r}: negative size")
        if self.kind in ("lif", "tde") and self.params is None:
            raise ConfigError(f"population {self.name!r}: neuron populations need params")
        if self.kind == "poisson" and not 0.0 <= self.rate_hz * DT_MS * 1e-3 <= 1.0:
            raise ConfigError(f"population {self.name!r}: rate {self.rate_hz} Hz not representable")

    @property
    def is_source(self) -> bool:
        return self.kind in ("poisson", "input")


@dataclass(frozen=True)
class Connection:
    """A single synapse ``source -> target``; weight in nA, delay in ticks."""

    source: tuple[str, int]
    target: tuple[str, int]
    weight: float
    delay: int
    kind: str = "excitatory"


@dataclass
class Projection:
    """A block of synapses between two populations, stored as index arrays."""

    label: str
    source: str
    target: str
    pre: np.ndarray
    post: np.ndarray
    weight: np.ndarray | float
    delay: int
    kind: str = "excitatory"

    def __post_init__(self) -> None:
        self.pre = np.asarray(self.pre, dtype=np.int64).ravel()
        self.post = np.asarray(self.post, dtype=np.int64).ravel()
        if self.pre.shape != self.post.shape:
            raise ConfigError(f"{self.label}: pre/post index arrays differ in length")
        w = np.asarray(self.weight, dtype=np.float64)
        self.weight = np.broadcast_to(w, self.pre.shape).copy()

    def __len__(self) -> int:
        return self.pre.shape[0]

    @classmethod
    def from_connection(cls, c: Connection, row: int) -> "Projection":
        return cls(f"connection[{row}]", c.source[0], c.target[0], [c.source[1]],
                   [c.target[1]], c.weight, c.delay, c.kind)


@dataclass
class SpikeRecord:
    """Spikes sorted by tick, then population, then index."""

    tick: np.ndarray
    pop: np.ndarray
    index: np.ndarray
    pop_names: tuple[str, ...]

    def __len__(self) -> int:
        return self.tick.shape[0]

    @classmethod
    def empty(cls, pop_names: Sequence[str] = ()) -> "SpikeRecord":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), z.copy(), tuple(pop_names))

    def of(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """(ticks, indices) of population ``name``."""
        m = self.pop == self.pop_names.index(name)
        return self.tick[m], self.index[m]

    def count(self, name: str) -> int:
        return int(np.count_nonzero(self.pop == self.pop_names.index(name)))

    def per_population(self) -> dict[str, list[tuple[int, int]]]:
        return {name: list(zip(*(a.tolist() for a in self.of(name))))
                for name in self.pop_names}

    def concat(self, other: "SpikeRecord") -> "SpikeRecord":
        return SpikeRecord(np.concatenate([self.tick, other.tick]),
                           np.concatenate([self.pop, other.pop]),
                           np.concatenate([self.index, other.index]),
                           self.pop_names or other.pop_names)

    def equals(self, other: "SpikeRecord") -> bool:
        return (self.pop_names == other.pop_names
                and np.array_equal(self.tick, other.tick)
                and np.array_equal(self.pop, other.pop)
                and np.array_equal(self.index, other.index))

    def to_csv(self, path: str | Path, header_lines: Iterable[str] = ()) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["tick", "population", "index"])
            names = self.pop_names
            for t, p, i in zip(self.tick.tolist(), self.pop.tolist(), self.index.tolist()):
                w.writerow([t, names[p], i])


class Network:
    """A built network plus its simulation state.

    Created by :func:`build_network`. ``run`` may be called repeatedly; the
    clock only moves forward.
    """

    def __init__(self, populations: list[Population], projections: list[Projection],
                 dt: float = DT_MS, pending_bound: int = 50_000_000):
        self.dt = dt
        self.populations = {p.name: p for p in populations}
        self.pop_names = tuple(p.name for p in populations)
        self.projections = projections
        self.tick = 0

        self.offset: dict[str, int] = {}
        gid = 0
        for p in populations:
            self.offset[p.name] = gid
            gid += p.size
        self.n_total = gid
        self._gid_pop = np.zeros(gid, dtype=np.int64)
        for k, p in enumerate(populations):
            self._gid_pop[self.offset[p.name]:self.offset[p.name] + p.size] = k

        # neuron-local index space (targets of synapses)
        param_sets: list[tuple[LifParams, float]] = []
        neuron_gid, ntype, pidx = [], [], []
        self.local_offset: dict[str, int] = {}
        n_local = 0
        for p in populations:
            if p.is_source:
                continue
            key = (p.params, p.tau_fac_ms if p.kind == "tde" else 0.0)
            if key not in param_sets:
                param_sets.append(key)
            self.local_offset[p.name] = n_local
            n_local += p.size
            base = self.offset[p.name]
            neuron_gid.extend(range(base, base + p.size))
            ntype.extend([K.NEURON_TDE if p.kind == "tde" else K.NEURON_LIF] * p.size)
            pidx.extend([param_sets.index(key)] * p.size)
        self.n_neurons = n_local
        self._neuron_gid = np.asarray(neuron_gid, dtype=np.int64)
        self._ntype = np.asarray(ntype, dtype=np.int8)
        self._pidx = np.asarray(pidx, dtype=np.int64)
        self._gid_to_local = np.full(self.n_total, -1, dtype=np.int64)
        self._gid_to_local[self._neuron_gid] = np.arange(n_local)

        # parameters are expanded per neuron so the update loop vectorises
        props = [Propagator.from_params(ps, dt) for ps, _ in param_sets]
        per = lambda xs, dtype=np.float64: np.asarray(xs, dtype=dtype)[self._pidx]  # noqa: E731
        self._E_L = per([ps.E_L for ps, _ in param_sets])
        self._V_th = per([ps.V_th for ps, _ in param_sets])
        self._V_reset = per([ps.V_reset for ps, _ in param_sets])
        self._P22 = per([q.P22 for q in props])
        self._P11e = per([q.P11_exc for q in props])
        self._P11i = per([q.P11_inh for q in props])
        self._P21e = per([q.P21_exc for q in props])
        self._P21i = per([q.P21_inh for q in props])
        self._I_drive = per([ps.I_offset * q.P20 for (ps, _), q in zip(param_sets, props)])
        self._ref = per([q.ref_ticks for q in props], np.int64)
        self._tau_fac = per([tf if tf != 0.0 else 1.0 for _, tf in param_sets])

        self.V = np.asarray([param_sets[k][0].V_init for k in self._pidx], dtype=np.float64)
        self.I_exc = np.zeros(n_local)
        self.I_inh = np.zeros(n_local)
        self.ref_until = np.zeros(n_local, dtype=np.int64)
        self.last_fac = np.full(n_local, -1, dtype=np.int64)

        self._build_csr()
        max_delay = int(self._delay.max()) if self._delay.size else 1
        self.D = max_delay + 1
        self._buf_exc = np.zeros((self.D, n_local))
        self._buf_inh = np.zeros((self.D, n_local))
        self._buf_trig = np.zeros((self.D, n_local))
        self._buf_fac = np.zeros((self.D, n_local), dtype=np.bool_)
        self._slot_count = np.zeros(self.D, dtype=np.int64)
        self._queued = np.zeros((self.D, n_local), dtype=np.bool_)
        self._slot_list = np.zeros((self.D, n_local), dtype=np.int64)
        self._slot_n = np.zeros(self.D, dtype=np.int64)
        self._spiked = np.zeros(n_local, dtype=np.bool_)
        self.pending_bound = pending_bound

        self._poisson = []
        for p in populations:
            if p.kind == "poisson" and p.size:
                rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(p.seed)))
                self._poisson.append((self.offset[p.name], p.size,
                                      p.rate_hz * dt * 1e-3, rng))
        self._rec_cap = 1 << 16

    # ---- construction -------------------------------------------------
    def _build_csr(self) -> None:
        n_syn = sum(len(pr) for pr in self.projections)
        src = np.empty(n_syn, dtype=np.int64)
        tgt = np.empty(n_syn, dtype=np.int64)
        w = np.empty(n_syn, dtype=np.float64)
        d = np.empty(n_syn, dtype=np.int64)
        kd = np.empty(n_syn, dtype=np.int8)
        pos = 0
        for pr in self.projections:
            n = len(pr)
            src[pos:pos + n] = self.offset[pr.source] + pr.pre
            tgt[pos:pos + n] = self._gid_to_local[self.offset[pr.target] + pr.post]
            w[pos:pos + n] = pr.weight
            d[pos:pos + n] = pr.delay
            kd[pos:pos + n] = _KIND_CODE[pr.kind]
            pos += n
        order = np.argsort(src, kind="stable")
        self._src = src[order]
        self._tgt = tgt[order]
        self._weight = w[order]
        self._delay = d[order]
        self._kind = kd[order]
        self._indptr = np.zeros(self.n_total + 1, dtype=np.int64)
        np.add.at(self._indptr, self._src + 1, 1)
        np.cumsum(self._indptr, out=self._indptr)

    # ---- queries -------------------------------------------------------
    @property
    def n_synapses(self) -> int:
        return int(self._tgt.shape[0])

    def census(self) -> dict[str, int]:
        neurons = sum(p.size for p in self.populations.values() if not p.is_source)
        return {"neurons": neurons, "synapses": self.n_synapses,
                "sources": self.n_total - neurons}

    def gid(self, pop: str, index: np.ndarray | int) -> np.ndarray | int:
        return self.offset[pop] + index

    def local(self, pop: str, index: np.ndarray | int) -> np.ndarray | int:
        return self.local_offset[pop] + index

    def state_of(self, pop: str) -> dict[str, np.ndarray]:
        """Live views of a population's state (edits take effect on the next run)."""
        lo = self.local_offset[pop]
        sl = slice(lo, lo + self.populations[pop].size)
        return {"V_m": self.V[sl], "I_exc": self.I_exc[sl], "I_inh": self.I_inh[sl]}

    def wiring(self) -> Iterable[tuple[str, int, str, int, float, float, str]]:
        """Every realised synapse, in projection order."""
        for pr in self.projections:
            for a, b, wt in zip(pr.pre.tolist(), pr.post.tolist(), pr.weight.tolist()):
                yield (pr.source, a, pr.target, b, wt, pr.delay * self.dt, pr.kind)

    # ---- simulation ---------------------------------------------------
    def _draw_poisson(self, t0: int, n_ticks: int) -> tuple[np.ndarray, np.ndarray]:
        ticks, gids = [], []
        for base, size, prob, rng in self._poisson:
            hits = rng.random((n_ticks, size)) < prob
            tt, ii = np.nonzero(hits)
            ticks.append(tt + t0)
            gids.append(ii + base)
        if not ticks:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        return np.concatenate(ticks), np.concatenate(gids)

    def run(self, n_ticks: int, inputs: dict[str, tuple[np.ndarray, np.ndarray]] | None = None,
            probe: Sequence[tuple[str, int]] = (), record: bool = True
            ) -> SpikeRecord | tuple[SpikeRecord, np.ndarray]:
        """Advance ``n_ticks`` and return the spikes emitted meanwhile.

        ``inputs`` maps an ``input`` population to ``(tick_offsets, indices)``
        relative to the current tick. ``probe`` lists neurons whose membrane
        potential is sampled at the end of every tick; when given, the
        return value is ``(record, traces)`` with traces shaped
        ``(n_ticks, len(probe))``.
        """
        if n_ticks < 0:
            raise ValueError("n_ticks must be >= 0")
        t0 = self.tick
        ext_t, ext_g = self._draw_poisson(t0, n_ticks)
        if inputs:
            tl, gl = [ext_t], [ext_g]
            for name, (offs, idx) in inputs.items():
                pop = self.populations.get(name)
                if pop is None or pop.kind != "input":
                    raise ConfigError(f"{name!r} is not an input population")
                offs = np.asarray(offs, dtype=np.int64)
                idx = np.asarray(idx, dtype=np.int64)
                if offs.size and (offs.min() < 0 or offs.max() >= n_ticks):
                    raise ValueError(f"input ticks for {name!r} outside run window")
                if idx.size and (idx.min() < 0 or idx.max() >= pop.size):
                    raise ValueError(f"input indices for {name!r} out of range")
                tl.append(offs + t0)
                gl.append(idx + self.offset[name])
            ext_t = np.concatenate(tl)
            ext_g = np.concatenate(gl)
        order = np.lexsort((ext_g, ext_t))
        ext_t = np.ascontiguousarray(ext_t[order])
        ext_g = np.ascontiguousarray(ext_g[order])

        probe_idx = np.asarray([self._gid_to_local[self.offset[p] + i] for p, i in probe],
                               dtype=np.int64)
        probe_out = np.zeros((n_ticks, probe_idx.shape[0]))

        out_t = np.empty(self._rec_cap, dtype=np.int64)
        out_g = np.empty(self._rec_cap, dtype=np.int64)
        n_out = 0
        done = 0
        while True:
            status, steps, n_out, pending = K.run_kernel(
                t0 + done, n_ticks - done, self.dt,
                self._neuron_gid, self._ntype,
                self._E_L, self._V_th, self._V_reset, self._P22, self._P11e, self._P11i,
                self._P21e, self._P21i, self._I_drive, self._ref, self._tau_fac,
                self.V, self.I_exc, self.I_inh, self.ref_until, self.last_fac, self._spiked,
                self._indptr, self._tgt, self._weight, self._delay, self._kind,
                self._buf_exc, self._buf_inh, self._buf_trig, self._buf_fac,
                self._slot_count, self._queued, self._slot_list, self._slot_n,
                self.pending_bound,
                ext_t, ext_g, probe_idx, probe_out[done:],
                out_t, out_g, n_out)
            done += steps
            if status == K.STATUS_RECORD_FULL:
                grow = max(2 * out_t.shape[0], n_out + self.n_neurons + ext_t.shape[0] + 1)
                out_t = np.concatenate([out_t[:n_out], np.empty(grow - n_out, np.int64)])
                out_g = np.concatenate([out_g[:n_out], np.empty(grow - n_out, np.int64)])
                self._rec_cap = grow
                continue
            if status == K.STATUS_NONFINITE:
                self.tick = t0 + done
                raise SimulationIntegrityError(f"non-finite neuron state at tick {t0 + done}")
            if status == K.STATUS_QUEUE_OVERFLOW:
                self.tick = t0 + done
                raise SimulationIntegrityError(
                    f"pending deliveries {pending} exceed bound {self.pending_bound}")
            break
        self.tick = t0 + n_ticks
        rec = SpikeRecord.empty(self.pop_names)
        if record and n_out:
            tt = out_t[:n_out]
            gg = out_g[:n_out]
            order = np.lexsort((gg, tt))
            tt, gg = tt[order], gg[order]
            pop = self._gid_pop[gg]
            base = np.asarray([self.offset[n] for n in self.pop_names], dtype=np.int64)
            rec = SpikeRecord(tt, pop, gg - base[pop], self.pop_names)
        if probe_idx.shape[0]:
            return rec, probe_out
        return rec


def build_network(populations: Sequence[Population],
                  connections: Sequence[Connection | Projection] = (),
                  dt: float = DT_MS, pending_bound: int = 50_000_000) -> Network:
    """Validate a population/connection spec and return a runnable network."""
    pops: dict[str, Population] = {}
    for p in populations:
        if p.name in pops:
            raise ConfigError(f"duplicate population {p.name!r}")
        pops[p.name] = p
    projections: list[Projection] = []
    for row, c in enumerate(connections):
        pr = Projection.from_connection(c, row) if isinstance(c, Connection) else c
        _validate_projection(pr, pops)
        projections.append(pr)
    return Network(list(pops.values()), projections, dt=dt, pending_bound=pending_bound)


def _validate_projection(pr: Projection, pops: dict[str, Population]) -> None:
    where = f"connection row {pr.label!r}"
    if pr.source not in pops:
        raise ConfigError(f"{where}: unknown source population {pr.source!r}")
    if pr.target not in pops:
        raise ConfigError(f"{where}: unknown target population {pr.target!r}")
    src, dst = pops[pr.source], pops[pr.target]
    if dst.is_source:
        raise ConfigError(f"{where}: target {dst.name!r} is a spike source")
    if pr.kind not in KINDS:
        raise ConfigError(f"{where}: unknown synapse kind {pr.kind!r}")
    if pr.kind in ("facilitatory", "trigger") and dst.kind != "tde":
        raise ConfigError(f"{where}: {pr.kind} synapse onto non-TDE population {dst.name!r}")
    if int(pr.delay) != pr.delay or pr.delay < 1:
        raise ConfigError(f"{where}: delay must be an integer >= 1 tick, got {pr.delay}")
    if len(pr):
        if pr.pre.min() < 0 or pr.pre.max() >= src.size:
            raise ConfigError(f"{where}: dangling source index into {src.name!r}")
        if pr.post.min() < 0 or pr.post.max() >= dst.size:
            raise ConfigError(f"{where}: dangling target index into {dst.name!r}")
        w = pr.weight
        if pr.kind in ("excitatory", "trigger") and (w < 0).any():
            raise ConfigError(f"{where}: {pr.kind} weights must be >= 0")
        if pr.kind == "inhibitory" and (w > 0).any():
            raise ConfigError(f"{where}: inhibitory weights must be <= 0")
    if not np.all(np.isfinite(pr.weight)):
        raise ConfigError(f"{where}: non-finite weight")
