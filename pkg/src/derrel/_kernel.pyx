# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled residence simulation loop.

Arithmetic mirrors ``derrel._kernel_py`` operation for operation; both
backends must return bit-identical results.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _min(double a, double b) nogil:
    return a if a < b else b


cdef inline double _max(double a, double b) nogil:
    return a if a > b else b


def simulate_block(
    const double[::1] load_shape,
    const double[::1] ghi_shape,
    Py_ssize_t n_steps,
    double dt,
    const double[::1] peak,
    const double[::1] pv_cap,
    const double[::1] es_cap,
    const double[::1] ch_max,
    const double[::1] d_max,
    double derate,
    double eta_c,
    double eta_d,
    double soc_min,
    double soc_max,
    double soc_init,
    const cnp.int64_t[::1] lp_ptr,
    const double[::1] lp_start,
    const double[::1] lp_end,
    const cnp.int64_t[::1] pv_ptr,
    const cnp.int64_t[::1] pv_k0,
    const cnp.int64_t[::1] pv_k1,
    const cnp.int64_t[::1] es_ptr,
    const cnp.int64_t[::1] es_k0,
    const cnp.int64_t[::1] es_k1,
):
    cdef Py_ssize_t m = peak.shape[0]
    cdef Py_ssize_t n_prof = load_shape.shape[0]
    events_arr = np.zeros(m, dtype=np.int64)
    down_arr = np.zeros(m, dtype=np.float64)
    ens_arr = np.zeros(m, dtype=np.float64)
    cdef cnp.int64_t[::1] events = events_arr
    cdef double[::1] downtime = down_arr
    cdef double[::1] ens = ens_arr

    cdef Py_ssize_t c, t, j, q, lp_i, lp_hi, pv_i, pv_hi, es_i, es_hi
    cdef double soc, load_e, pv_e, direct, surplus, deficit, ch, dis, net, room, avail
    cdef double t0, t1, ov, a, b, cap, chm, dmx, pk, pvc
    cdef int pv_up, es_up, s_n, s_r, prev
    cdef cnp.int64_t n_ev
    cdef double dsum, esum

    with nogil:
        for c in range(m):
            soc = soc_init
            cap = es_cap[c]
            chm = ch_max[c] * dt
            dmx = d_max[c] * dt
            pk = peak[c]
            pvc = pv_cap[c] * derate
            lp_i = lp_ptr[c]
            lp_hi = lp_ptr[c + 1]
            pv_i = pv_ptr[c]
            pv_hi = pv_ptr[c + 1]
            es_i = es_ptr[c]
            es_hi = es_ptr[c + 1]
            n_ev = 0
            dsum = 0.0
            esum = 0.0
            prev = 1
            j = 0
            for t in range(n_steps):
                while pv_i < pv_hi and pv_k1[pv_i] <= t:
                    pv_i += 1
                pv_up = not (pv_i < pv_hi and pv_k0[pv_i] <= t)
                while es_i < es_hi and es_k1[es_i] <= t:
                    es_i += 1
                es_up = not (es_i < es_hi and es_k0[es_i] <= t)

                load_e = pk * load_shape[j] * dt
                if pv_up:
                    pv_e = pvc * ghi_shape[j] * dt
                else:
                    pv_e = 0.0
                direct = _min(load_e, pv_e)
                surplus = pv_e - direct
                deficit = load_e - direct
                ch = 0.0
                dis = 0.0
                if es_up and cap > 0.0:
                    if surplus > 0.0:
                        room = (soc_max - soc) * cap / eta_c
                        ch = _max(_min(_min(surplus, chm), room), 0.0)
                    elif deficit > 0.0:
                        avail = (soc - soc_min) * cap * eta_d
                        dis = _max(_min(_min(deficit, dmx), avail), 0.0)
                    soc = soc + (eta_c * ch - dis / eta_d) / cap
                    soc = _max(soc_min, _min(soc_max, soc))
                net = deficit - dis
                s_n = 1 if net <= 0.0 else 0

                t0 = t * dt
                t1 = (t + 1) * dt
                while lp_i < lp_hi and lp_end[lp_i] <= t0:
                    lp_i += 1
                ov = 0.0
                q = lp_i
                while q < lp_hi and lp_start[q] < t1:
                    a = _max(lp_start[q], t0)
                    b = _min(lp_end[q], t1)
                    if b - a > 0.0:
                        ov = ov + (b - a)
                    q += 1

                if ov > 0.0:
                    s_r = s_n
                    if s_n == 0:
                        dsum = dsum + ov
                        esum = esum + net * (ov / dt)
                else:
                    s_r = 1
                if t > 0 and prev == 1 and s_r == 0:
                    n_ev += 1
                prev = s_r

                j += 1
                if j == n_prof:
                    j = 0
            events[c] = n_ev
            downtime[c] = dsum
            ens[c] = esum

    return events_arr, down_arr, ens_arr
