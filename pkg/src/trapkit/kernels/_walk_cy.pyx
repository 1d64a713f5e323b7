# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled walk kernel.

Mirrors trapkit.kernels._walk_py bit-for-bit: same RNG streams, same
discovery order, same floating-point operation order.  The hot loop runs
without the GIL so replicas can be driven from a thread pool.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, log

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t tk_mix64(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    """
    cnp.uint64_t tk_mix64(cnp.uint64_t z) nogil

cdef cnp.uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef cnp.uint64_t ENV_DOMAIN = 0x5851F42D4C957F2DULL
cdef double INV53 = 1.0 / 9007199254740992.0

cdef enum:
    MAXD = 8
    NOFFMAX = 17  # 2*MAXD + 1

cdef enum:
    VAR_BOUCHAUD = 0
    VAR_METROPOLIS = 1
    VAR_HEATBATH = 2

VARIANT_BOUCHAUD = 0
VARIANT_METROPOLIS = 1
VARIANT_HEATBATH = 2


cdef inline double splitmix_uniform(cnp.uint64_t *state) nogil:
    state[0] = state[0] + GOLDEN
    cdef cnp.uint64_t h = tk_mix64(state[0])
    return (<double> ((h >> 11) + 1ULL)) * INV53


cdef inline cnp.uint64_t table_hash_c(cnp.int64_t *site, int d) nogil:
    cdef cnp.uint64_t h = 0xD6E8FEB86659FD93ULL
    cdef int j
    for j in range(d):
        h = tk_mix64(h ^ (<cnp.uint64_t> site[j]))
    return h


def _grow(Py_ssize_t cap, occ_np, keys_np, tau_np, tpow_np, deep_np, int d):
    """Quadruple the table capacity and rehash; returns the new arrays."""
    cdef Py_ssize_t new_cap = cap * 4
    occ2_np = np.zeros(new_cap, dtype=np.uint8)
    keys2_np = np.empty((new_cap, d), dtype=np.int64)
    tau2_np = np.empty(new_cap, dtype=np.float64)
    tpow2_np = np.empty(new_cap, dtype=np.float64)
    deep2_np = np.empty(new_cap, dtype=np.int32)
    cdef cnp.uint8_t[::1] occ = occ_np
    cdef cnp.int64_t[:, ::1] keys = keys_np
    cdef cnp.float64_t[::1] tau_tab = tau_np
    cdef cnp.float64_t[::1] tpow_tab = tpow_np
    cdef cnp.int32_t[::1] deep_tab = deep_np
    cdef cnp.uint8_t[::1] occ2 = occ2_np
    cdef cnp.int64_t[:, ::1] keys2 = keys2_np
    cdef cnp.float64_t[::1] tau2 = tau2_np
    cdef cnp.float64_t[::1] tpow2 = tpow2_np
    cdef cnp.int32_t[::1] deep2 = deep2_np
    cdef Py_ssize_t s, hpos
    cdef cnp.int64_t site[MAXD]
    cdef int j
    for s in range(cap):
        if not occ[s]:
            continue
        for j in range(d):
            site[j] = keys[s, j]
        hpos = table_hash_c(site, d) & (new_cap - 1)
        while occ2[hpos]:
            hpos = (hpos + 1) & (new_cap - 1)
        occ2[hpos] = 1
        for j in range(d):
            keys2[hpos, j] = keys[s, j]
        tau2[hpos] = tau_tab[s]
        tpow2[hpos] = tpow_tab[s]
        deep2[hpos] = deep_tab[s]
    return new_cap, occ2_np, keys2_np, tau2_np, tpow2_np, deep2_np


def simulate(
    int d,
    env_seed,
    origin,
    double alpha,
    int variant,
    double a,
    bint time_change,
    max_steps,
    double max_time,
    hold_seed,
    move_seed,
    double deep_threshold=INFINITY,
    int max_deep=0,
    int intervals_traps=0,
    int max_intervals=0,
    max_depths=0,
    clock_queries=None,
    xtime_queries=None,
    bint record_path=False,
    int kill_radius=-1,
):
    if d < 1 or d > MAXD:
        raise ValueError(f"dimension must be in 1..{MAXD}")

    cdef cnp.int64_t n_max_steps = int(max_steps)
    cdef cnp.int64_t n_max_depths = int(max_depths)
    cdef cnp.uint64_t env_base = tk_mix64(
        (<cnp.uint64_t> (int(env_seed) & 0xFFFFFFFFFFFFFFFF)) ^ ENV_DOMAIN)
    cdef cnp.uint64_t hold_state = int(hold_seed) & 0xFFFFFFFFFFFFFFFF
    cdef cnp.uint64_t move_state = int(move_seed) & 0xFFFFFFFFFFFFFFFF
    cdef double inv_alpha = -1.0 / alpha

    cdef cnp.int64_t[::1] origin_v = np.ascontiguousarray(origin, dtype=np.int64)

    cdef cnp.float64_t[::1] clock_q = np.ascontiguousarray(
        clock_queries if clock_queries is not None else [], dtype=np.float64)
    cdef cnp.float64_t[::1] xtime_q = np.ascontiguousarray(
        xtime_queries if xtime_queries is not None else [], dtype=np.float64)
    cdef Py_ssize_t nq = clock_q.shape[0]
    cdef Py_ssize_t nxq = xtime_q.shape[0]

    # closed 1-neighbourhood offsets in lexicographic order; unit moves in
    # axis-major (-,+) order -- both must match the python kernel
    offs = sorted([(0,) * d] + [
        tuple((1 if j == k else 0) * s for j in range(d))
        for k in range(d) for s in (-1, 1)
    ])
    mvs = [tuple((1 if j == k else 0) * s for j in range(d))
           for k in range(d) for s in (-1, 1)]
    cdef cnp.int64_t[:, ::1] offsets = np.asarray(offs, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] moves = np.asarray(mvs, dtype=np.int64)
    cdef cnp.int64_t[::1] move_off = np.asarray(
        [offs.index(mv) for mv in mvs], dtype=np.int64)
    cdef int center_idx = offs.index((0,) * d)
    cdef int n_off = offsets.shape[0]
    cdef int n_mv = moves.shape[0]

    # open-addressing table over discovered sites
    cdef Py_ssize_t cap = 1 << 14
    occ_np = np.zeros(cap, dtype=np.uint8)
    keys_np = np.empty((cap, d), dtype=np.int64)
    tau_np = np.empty(cap, dtype=np.float64)
    tpow_np = np.empty(cap, dtype=np.float64)
    deep_np = np.empty(cap, dtype=np.int32)
    cdef cnp.uint8_t[::1] occ = occ_np
    cdef cnp.int64_t[:, ::1] keys = keys_np
    cdef cnp.float64_t[::1] tau_tab = tau_np
    cdef cnp.float64_t[::1] tpow_tab = tpow_np
    cdef cnp.int32_t[::1] deep_tab = deep_np
    cdef Py_ssize_t n_used = 0

    # outputs
    cdef cnp.float64_t[::1] clock_at = np.zeros(nq, dtype=np.float64)
    cdef cnp.int64_t[::1] range_at = np.zeros(nq, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] pos_at = np.zeros((max(nq, 1), d), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] xpos_at = np.zeros((max(nxq, 1), d), dtype=np.int64)

    cdef cnp.float64_t[::1] depths = np.empty(max(n_max_depths, 1), dtype=np.float64)
    cdef cnp.int64_t[:, ::1] deep_site = np.empty((max(max_deep, 1), d), dtype=np.int64)
    cdef cnp.float64_t[::1] deep_tau = np.empty(max(max_deep, 1), dtype=np.float64)
    cdef cnp.float64_t[::1] deep_T = np.empty(max(max_deep, 1), dtype=np.float64)
    cdef cnp.float64_t[::1] deep_ltime = np.zeros(max(max_deep, 1), dtype=np.float64)
    cdef cnp.uint8_t[::1] deep_visited = np.zeros(max(max_deep, 1), dtype=np.uint8)
    cdef cnp.int64_t[::1] iv_counts = np.zeros(max(intervals_traps, 1), dtype=np.int64)
    cdef cnp.float64_t[:, :, ::1] iv_times = np.empty(
        (max(intervals_traps, 1), max(max_intervals, 1), 2), dtype=np.float64)
    cdef cnp.uint8_t[::1] iv_trunc = np.zeros(max(intervals_traps, 1), dtype=np.uint8)

    cdef cnp.float64_t[::1] path_times
    cdef cnp.int64_t[:, ::1] path_sites
    cdef cnp.float64_t[::1] path_taus
    if record_path:
        path_times = np.empty(n_max_steps + 1, dtype=np.float64)
        path_sites = np.empty((n_max_steps + 1, d), dtype=np.int64)
        path_taus = np.empty(n_max_steps + 1, dtype=np.float64)
    else:
        path_times = np.empty(1, dtype=np.float64)
        path_sites = np.empty((1, d), dtype=np.int64)
        path_taus = np.empty(1, dtype=np.float64)

    cdef cnp.int64_t x[MAXD]
    cdef cnp.int64_t y[MAXD]
    cdef cnp.int64_t org[MAXD]
    cdef double ws[2 * MAXD]
    cdef Py_ssize_t nb_slot[NOFFMAX]
    cdef int j, i, pick, mvi
    for j in range(d):
        x[j] = 0
        org[j] = origin_v[j]

    cdef double t = 0.0
    cdef double A = 0.0
    cdef double origin_time = 0.0
    cdef cnp.int64_t steps = 0
    cdef cnp.int64_t n_disc = 0
    cdef cnp.int64_t n_depths = 0
    cdef int ndeep = 0
    cdef Py_ssize_t qi = 0
    cdef Py_ssize_t xqi = 0
    cdef int stop_code = 0  # 0 steps, 1 time, 2 kill

    cdef double tau_x, tpow_x, W, w, ty, tpy, rate, dt, t_next, A_next, tq
    cdef double target, acc, u, logtau
    cdef int dix
    cdef bint truncated
    cdef bint at_origin
    cdef bint matched
    cdef Py_ssize_t slot, cur_slot, hpos
    cdef cnp.uint64_t h

    with nogil:
        # --- initial discovery around the start site (t == 0) ---
        for i in range(n_off):
            for j in range(d):
                y[j] = x[j] + offsets[i, j]
            hpos = table_hash_c(y, d) & (cap - 1)
            while True:
                if not occ[hpos]:
                    slot = hpos
                    occ[slot] = 1
                    for j in range(d):
                        keys[slot, j] = y[j]
                    h = env_base
                    for j in range(d):
                        h = tk_mix64(h ^ (<cnp.uint64_t> (y[j] + org[j])))
                    u = (<double> ((h >> 11) + 1ULL)) * INV53
                    logtau = log(u) * inv_alpha
                    ty = exp(logtau)
                    tau_tab[slot] = ty
                    tpow_tab[slot] = exp(a * logtau) if variant == VAR_BOUCHAUD else ty
                    deep_tab[slot] = -1
                    if ty >= deep_threshold and ndeep < max_deep:
                        deep_tab[slot] = ndeep
                        for j in range(d):
                            deep_site[ndeep, j] = y[j]
                        deep_tau[ndeep] = ty
                        deep_T[ndeep] = t
                        ndeep += 1
                    n_disc += 1
                    if n_depths < n_max_depths:
                        depths[n_depths] = ty
                        n_depths += 1
                    n_used += 1
                    break
                matched = 1
                for j in range(d):
                    if keys[hpos, j] != y[j]:
                        matched = 0
                        break
                if matched:
                    slot = hpos
                    break
                hpos = (hpos + 1) & (cap - 1)
            nb_slot[i] = slot

        cur_slot = nb_slot[center_idx]
        if deep_tab[cur_slot] >= 0:
            deep_visited[deep_tab[cur_slot]] = 1
        if record_path:
            path_times[0] = 0.0
            for j in range(d):
                path_sites[0, j] = x[j]
            path_taus[0] = tau_tab[cur_slot]

        # --- main loop ---
        while True:
            if steps >= n_max_steps:
                stop_code = 0
                break
            tau_x = tau_tab[cur_slot]
            tpow_x = tpow_tab[cur_slot]
            dix = deep_tab[cur_slot]

            W = 0.0
            for mvi in range(n_mv):
                slot = nb_slot[move_off[mvi]]
                ty = tau_tab[slot]
                tpy = tpow_tab[slot]
                if variant == VAR_BOUCHAUD:
                    w = tpow_x * tpy
                elif variant == VAR_METROPOLIS:
                    w = tau_x if tau_x < ty else ty
                else:
                    w = tau_x * ty / (tau_x + ty)
                ws[mvi] = w
                W += w

            rate = W if time_change else W / tau_x
            dt = -log(splitmix_uniform(&hold_state)) / rate
            t_next = t + dt
            truncated = t_next >= max_time
            if truncated:
                dt = max_time - t
                t_next = max_time

            A_next = A + tau_x * dt if time_change else A
            while qi < nq and (clock_q[qi] < t_next or (truncated and clock_q[qi] <= t_next)):
                tq = clock_q[qi]
                clock_at[qi] = A + tau_x * (tq - t) if time_change else 0.0
                range_at[qi] = n_disc
                for j in range(d):
                    pos_at[qi, j] = x[j]
                qi += 1
            if time_change:
                while xqi < nxq and (xtime_q[xqi] < A_next or (truncated and xtime_q[xqi] <= A_next)):
                    for j in range(d):
                        xpos_at[xqi, j] = x[j]
                    xqi += 1
            A = A_next
            if dix >= 0:
                deep_ltime[dix] += dt
                if dix < intervals_traps:
                    if iv_counts[dix] < max_intervals:
                        iv_times[dix, iv_counts[dix], 0] = t
                        iv_times[dix, iv_counts[dix], 1] = t_next
                        iv_counts[dix] += 1
                    else:
                        iv_trunc[dix] = 1
            at_origin = 1
            for j in range(d):
                if x[j] != 0:
                    at_origin = 0
                    break
            if at_origin:
                origin_time += dt
            t = t_next
            if truncated:
                stop_code = 1
                break

            # jump
            target = splitmix_uniform(&move_state) * W
            acc = 0.0
            pick = n_mv - 1
            for i in range(n_mv):
                acc += ws[i]
                if acc >= target:
                    pick = i
                    break
            for j in range(d):
                x[j] = x[j] + moves[pick, j]
            steps += 1

            # grow before the discovery pass so cached slots stay valid
            if (n_used + NOFFMAX) * 10 >= cap * 6:
                with gil:
                    cap, occ_np, keys_np, tau_np, tpow_np, deep_np = _grow(
                        cap, occ_np, keys_np, tau_np, tpow_np, deep_np, d)
                    occ = occ_np
                    keys = keys_np
                    tau_tab = tau_np
                    tpow_tab = tpow_np
                    deep_tab = deep_np

            # discovery at the new position
            for i in range(n_off):
                for j in range(d):
                    y[j] = x[j] + offsets[i, j]
                hpos = table_hash_c(y, d) & (cap - 1)
                while True:
                    if not occ[hpos]:
                        slot = hpos
                        occ[slot] = 1
                        for j in range(d):
                            keys[slot, j] = y[j]
                        h = env_base
                        for j in range(d):
                            h = tk_mix64(h ^ (<cnp.uint64_t> (y[j] + org[j])))
                        u = (<double> ((h >> 11) + 1ULL)) * INV53
                        logtau = log(u) * inv_alpha
                        ty = exp(logtau)
                        tau_tab[slot] = ty
                        tpow_tab[slot] = exp(a * logtau) if variant == VAR_BOUCHAUD else ty
                        deep_tab[slot] = -1
                        if ty >= deep_threshold and ndeep < max_deep:
                            deep_tab[slot] = ndeep
                            for j in range(d):
                                deep_site[ndeep, j] = y[j]
                            deep_tau[ndeep] = ty
                            deep_T[ndeep] = t
                            ndeep += 1
                        n_disc += 1
                        if n_depths < n_max_depths:
                            depths[n_depths] = ty
                            n_depths += 1
                        n_used += 1
                        break
                    matched = 1
                    for j in range(d):
                        if keys[hpos, j] != y[j]:
                            matched = 0
                            break
                    if matched:
                        slot = hpos
                        break
                    hpos = (hpos + 1) & (cap - 1)
                nb_slot[i] = slot

            cur_slot = nb_slot[center_idx]
            if deep_tab[cur_slot] >= 0 and not deep_visited[deep_tab[cur_slot]]:
                deep_visited[deep_tab[cur_slot]] = 1
            if record_path:
                path_times[steps] = t
                for j in range(d):
                    path_sites[steps, j] = x[j]
                path_taus[steps] = tau_tab[cur_slot]
            if kill_radius >= 0:
                for j in range(d):
                    if x[j] > kill_radius or x[j] < -kill_radius:
                        stop_code = 2
                        break
                if stop_code == 2:
                    break

        # flush any queries beyond the stop point with the final state
        while qi < nq:
            clock_at[qi] = A
            range_at[qi] = n_disc
            for j in range(d):
                pos_at[qi, j] = x[j]
            qi += 1
        while xqi < nxq:
            for j in range(d):
                xpos_at[xqi, j] = x[j]
            xqi += 1

    out = {
        "steps": int(steps),
        "time": float(t),
        "clock": float(A),
        "origin_time": float(origin_time),
        "n_discovered": int(n_disc),
        "stopped_by": ("steps", "time", "kill")[stop_code],
        "clock_at": np.asarray(clock_at),
        "range_at": np.asarray(range_at),
        "pos_at": np.asarray(pos_at)[:nq],
        "xpos_at": np.asarray(xpos_at)[:nxq],
        "depths": np.asarray(depths)[:n_depths].copy(),
        "deep_site": np.asarray(deep_site)[:ndeep].copy(),
        "deep_tau": np.asarray(deep_tau)[:ndeep].copy(),
        "deep_T": np.asarray(deep_T)[:ndeep].copy(),
        "deep_ltime": np.asarray(deep_ltime)[:ndeep].copy(),
        "deep_visited": np.asarray(deep_visited)[:ndeep].astype(bool),
        "iv_times": [np.asarray(iv_times)[k, :iv_counts[k]].copy()
                     for k in range(intervals_traps)],
        "iv_truncated": np.asarray(iv_trunc)[:intervals_traps].astype(bool),
    }
    if record_path:
        n = int(steps) + 1
        out["path_times"] = np.asarray(path_times)[:n].copy()
        out["path_sites"] = np.asarray(path_sites)[:n].copy()
        out["path_taus"] = np.asarray(path_taus)[:n].copy()
    return out
