"""Pure-numpy residence simulation loop.

Vectorized across customers, sequential in time. Every arithmetic step
matches ``_kernel.pyx`` so the two backends agree bit for bit.
"""

from __future__ import annotations

import math

import numpy as np

CHUNK_STEPS = 4096


def _interval_overlap_chunk(ptr, starts, ends, T0, T1, dt, m):
    ov = np.zeros((T1 - T0, m))
    for c in range(m):
        for q in range(ptr[c], ptr[c + 1]):
            s = starts[q]
            e = ends[q]
            if e <= T0 * dt or s >= T1 * dt:
                continue
            k_lo = max(T0, int(math.floor(s / dt)) - 1)
            k_hi = min(T1, int(math.ceil(e / dt)) + 1)
            for k in range(k_lo, k_hi):
                a = max(s, k * dt)
                b = min(e, (k + 1) * dt)
                if b - a > 0.0:
                    ov[k - T0, c] = ov[k - T0, c] + (b - a)
    return ov


def _availability_chunk(ptr, k0, k1, T0, T1, m):
    up = np.ones((T1 - T0, m), dtype=bool)
    for c in range(m):
        for q in range(ptr[c], ptr[c + 1]):
            lo = max(int(k0[q]), T0)
            hi = min(int(k1[q]), T1)
            if hi > lo:
                up[lo - T0 : hi - T0, c] = False
    return up


def simulate_block(
    load_shape, ghi_shape, n_steps, dt,
    peak, pv_cap, es_cap, ch_max, d_max,
    derate, eta_c, eta_d, soc_min, soc_max, soc_init,
    lp_ptr, lp_start, lp_end,
    pv_ptr, pv_k0, pv_k1,
    es_ptr, es_k0, es_k1,
):
    load_shape = np.asarray(load_shape, dtype=np.float64)
    ghi_shape = np.asarray(ghi_shape, dtype=np.float64)
    peak = np.asarray(peak, dtype=np.float64)
    m = peak.size
    n_prof = load_shape.size
    cap = np.asarray(es_cap, dtype=np.float64)
    safe_cap = np.where(cap > 0.0, cap, 1.0)
    has_es = cap > 0.0
    chm = np.asarray(ch_max, dtype=np.float64) * dt
    dmx = np.asarray(d_max, dtype=np.float64) * dt
    pvc = np.asarray(pv_cap, dtype=np.float64) * derate

    soc = np.full(m, float(soc_init))
    events = np.zeros(m, dtype=np.int64)
    dsum = np.zeros(m)
    esum = np.zeros(m)
    prev = np.ones(m, dtype=bool)

    for T0 in range(0, n_steps, CHUNK_STEPS):
        T1 = min(n_steps, T0 + CHUNK_STEPS)
        ov_chunk = _interval_overlap_chunk(lp_ptr, lp_start, lp_end, T0, T1, dt, m)
        pv_up_chunk = _availability_chunk(pv_ptr, pv_k0, pv_k1, T0, T1, m)
        es_up_chunk = _availability_chunk(es_ptr, es_k0, es_k1, T0, T1, m)
        for t in range(T0, T1):
            j = t % n_prof
            row = t - T0
            load_e = peak * load_shape[j] * dt
            pv_e = np.where(pv_up_chunk[row], pvc * ghi_shape[j] * dt, 0.0)
            direct = np.minimum(load_e, pv_e)
            surplus = pv_e - direct
            deficit = load_e - direct
            active = es_up_chunk[row] & has_es
            charging = active & (surplus > 0.0)
            discharging = active & ~(surplus > 0.0) & (deficit > 0.0)
            room = (soc_max - soc) * cap / eta_c
            ch = np.where(charging, np.maximum(np.minimum(np.minimum(surplus, chm), room), 0.0), 0.0)
            avail = (soc - soc_min) * cap * eta_d
            dis = np.where(discharging, np.maximum(np.minimum(np.minimum(deficit, dmx), avail), 0.0), 0.0)
            new_soc = soc + (eta_c * ch - dis / eta_d) / safe_cap
            new_soc = np.maximum(soc_min, np.minimum(soc_max, new_soc))
            soc = np.where(active, new_soc, soc)
            net = deficit - dis
            s_n = net <= 0.0

            ov = ov_chunk[row]
            down = ov > 0.0
            s_r = np.where(down, s_n, True)
            unserved = down & ~s_n
            dsum = np.where(unserved, dsum + ov, dsum)
            esum = np.where(unserved, esum + net * (ov / dt), esum)
            if t > 0:
                events += prev & ~s_r
            prev = s_r

    return events, dsum, esum
