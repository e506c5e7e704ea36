"""Fixed-timestep spike propagation kernel (numba).

All arrays are flat; the owning :class:`~semdnav.snn.network.Network` keeps
them alive between calls so a run can be split into chunks without changing
the result.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NEURON_LIF = 0
NEURON_TDE = 1

SYN_EXC = 0
SYN_INH = 1
SYN_FAC = 2
SYN_TRIG = 3

STATUS_OK = 0
STATUS_RECORD_FULL = 1
STATUS_NONFINITE = 2
STATUS_QUEUE_OVERFLOW = 3

# Decaying currents below this magnitude are flushed to zero. This keeps the
# arithmetic out of the denormal range; the induced voltage error is < 1e-4 mV.
I_SNAP = 1e-7


@njit(cache=True, nogil=True)
def _enqueue(src, t, indptr, tgt, weight, delay, kind, buf_exc, buf_inh,
             buf_trig, buf_fac, slot_count, queued, slot_list, slot_n, D):
    added = 0
    for k in range(indptr[src], indptr[src + 1]):
        slot = (t + delay[k]) % D
        j = tgt[k]
        kd = kind[k]
        if kd == SYN_EXC:
            buf_exc[slot, j] += weight[k]
        elif kd == SYN_INH:
            buf_inh[slot, j] += weight[k]
        else:
            if kd == SYN_FAC:
                buf_fac[slot, j] = True
            else:
                buf_trig[slot, j] += weight[k]
            # TDE deliveries are rare: list them so the tick need not scan
            if not queued[slot, j]:
                queued[slot, j] = True
                slot_list[slot, slot_n[slot]] = j
                slot_n[slot] += 1
        slot_count[slot] += 1
        added += 1
    return added


@njit(cache=True, nogil=True)
def _integrate(t, V, I_exc, I_inh, ref_until, be, bi,
               E_L, V_th, V_reset, P22, P11e, P11i, P21e, P21i, I_drive, spiked):
    # Branch-free so LLVM can vectorise it; returns False on a non-finite state.
    ok = True
    for j in range(V.shape[0]):
        ie = I_exc[j] + be[j]
        ii = I_inh[j] + bi[j]
        be[j] = 0.0
        bi[j] = 0.0
        el = E_L[j]
        refr = t < ref_until[j]
        v_free = el + (V[j] - el) * P22[j] + ie * P21e[j] + ii * P21i[j] + I_drive[j]
        fire = (not refr) and v_free >= V_th[j]
        v_new = V_reset[j] if (refr or fire) else v_free
        ie *= P11e[j]
        ii *= P11i[j]
        ie = 0.0 if abs(ie) < I_SNAP else ie
        ii = 0.0 if abs(ii) < I_SNAP else ii
        ok &= (abs(v_free) < math.inf) & (abs(ie) < math.inf) & (abs(ii) < math.inf)
        V[j] = v_new
        I_exc[j] = ie
        I_inh[j] = ii
        spiked[j] = fire
    return ok


@njit(cache=True, nogil=True)
def run_kernel(t0, n_ticks, dt,
               neuron_gid, ntype,
               E_L, V_th, V_reset, P22, P11e, P11i, P21e, P21i, I_drive,
               ref_ticks, tau_fac,
               V, I_exc, I_inh, ref_until, last_fac, spiked,
               indptr, tgt, weight, delay, kind,
               buf_exc, buf_inh, buf_trig, buf_fac, slot_count,
               queued, slot_list, slot_n, pending_bound,
               ext_tick, ext_gid,
               probe, probe_out,
               out_tick, out_gid, n_out):
    """Advance the network ``n_ticks`` starting at absolute tick ``t0``.

    Neuron parameters are per-neuron arrays; ``I_drive`` is the constant
    offset current already multiplied by its propagator. Returns
    ``(status, ticks_done, n_out, pending)``. On ``STATUS_RECORD_FULL`` the
    state is consistent at ``t0 + ticks_done`` and the caller may resume.
    """
    D = buf_exc.shape[0]
    n_neurons = V.shape[0]
    cap = out_tick.shape[0]
    n_probe = probe.shape[0]
    pending = 0
    for s in range(D):
        pending += slot_count[s]
    e_ptr = 0
    n_ext = ext_tick.shape[0]
    for step in range(n_ticks):
        t = t0 + step
        slot = t % D
        if n_out + n_neurons + n_ext > cap:
            return STATUS_RECORD_FULL, step, n_out, pending
        pending -= slot_count[slot]
        slot_count[slot] = 0

        # sources: externally scheduled and pre-drawn Poisson spikes
        while e_ptr < n_ext and ext_tick[e_ptr] < t:
            e_ptr += 1
        while e_ptr < n_ext and ext_tick[e_ptr] == t:
            g = ext_gid[e_ptr]
            pending += _enqueue(g, t, indptr, tgt, weight, delay, kind, buf_exc,
                                buf_inh, buf_trig, buf_fac, slot_count,
                                queued, slot_list, slot_n, D)
            out_tick[n_out] = t
            out_gid[n_out] = g
            n_out += 1
            e_ptr += 1

        # TDE: facilitation stamps first, then gain-scaled trigger current
        for i in range(slot_n[slot]):
            j = slot_list[slot, i]
            queued[slot, j] = False
            if buf_fac[slot, j]:
                buf_fac[slot, j] = False
                last_fac[j] = t
            a = buf_trig[slot, j]
            if a != 0.0:
                buf_trig[slot, j] = 0.0
                if last_fac[j] >= 0:
                    I_exc[j] += a * math.exp(-(t - last_fac[j]) * dt / tau_fac[j])
        slot_n[slot] = 0

        if not _integrate(t, V, I_exc, I_inh, ref_until, buf_exc[slot], buf_inh[slot],
                          E_L, V_th, V_reset, P22, P11e, P11i, P21e, P21i, I_drive,
                          spiked):
            return STATUS_NONFINITE, step, n_out, pending

        for j in range(n_neurons):
            if spiked[j]:
                ref_until[j] = t + ref_ticks[j]
                g = neuron_gid[j]
                pending += _enqueue(g, t, indptr, tgt, weight, delay, kind, buf_exc,
                                    buf_inh, buf_trig, buf_fac, slot_count,
                                    queued, slot_list, slot_n, D)
                out_tick[n_out] = t
                out_gid[n_out] = g
                n_out += 1
        if pending > pending_bound:
            return STATUS_QUEUE_OVERFLOW, step + 1, n_out, pending
        for k in range(n_probe):
            probe_out[step, k] = V[probe[k]]
    return STATUS_OK, n_ticks, n_out, pending
