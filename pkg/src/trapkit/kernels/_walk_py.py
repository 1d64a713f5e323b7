"""Pure-Python walk kernel.

Reference semantics for the compiled core: identical RNG streams, identical
enumeration order for discovery, and the same floating-point operation
order, so both backends produce bit-identical trajectories.  Used when the
Cython extension is unavailable; roughly two orders of magnitude slower.
"""

from __future__ import annotations

import math

import numpy as np

from ..env import GOLDEN64, MASK64, mix64

_INV53 = 1.0 / 9007199254740992.0

VARIANT_BOUCHAUD = 0
VARIANT_METROPOLIS = 1
VARIANT_HEATBATH = 2


def _uniform(h: int) -> float:
    return ((h >> 11) + 1) * _INV53


class _SplitMix:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_uniform(self) -> float:
        self.state = (self.state + GOLDEN64) & MASK64
        return _uniform(mix64(self.state))


def simulate(
    d: int,
    env_seed: int,
    origin: np.ndarray,
    alpha: float,
    variant: int,
    a: float,
    time_change: bool,
    max_steps: int,
    max_time: float,
    hold_seed: int,
    move_seed: int,
    deep_threshold: float = math.inf,
    max_deep: int = 0,
    intervals_traps: int = 0,
    max_intervals: int = 0,
    max_depths: int = 0,
    clock_queries: np.ndarray | None = None,
    xtime_queries: np.ndarray | None = None,
    record_path: bool = False,
    kill_radius: int = -1,
) -> dict:
    origin = [int(c) for c in np.asarray(origin, dtype=np.int64)]
    clock_q = np.asarray(clock_queries if clock_queries is not None else [], dtype=float)
    xtime_q = np.asarray(xtime_queries if xtime_queries is not None else [], dtype=float)
    nq, nxq = clock_q.size, xtime_q.size
    inv_alpha = -1.0 / alpha
    env_base = mix64(env_seed ^ 0x5851F42D4C957F2D)

    hold = _SplitMix(hold_seed)
    move = _SplitMix(move_seed)

    # closed 1-neighbourhood offsets in lexicographic order; unit moves in
    # axis-major (-,+) order; each move is one of the offsets
    offsets = sorted([(0,) * d] + [
        tuple((1 if j == k else 0) * s for j in range(d))
        for k in range(d) for s in (-1, 1)
    ])
    moves = [tuple((1 if j == k else 0) * s for j in range(d))
             for k in range(d) for s in (-1, 1)]
    center_idx = offsets.index((0,) * d)
    move_off_idx = [offsets.index(mv) for mv in moves]

    exp, log = math.exp, math.log

    table: dict[tuple, list] = {}  # site -> [tau, tpow, deep_idx]
    n_disc = 0

    deep_site, deep_tau, deep_T = [], [], []
    deep_ltime, deep_visited = [], []
    iv_times = [[] for _ in range(intervals_traps)]
    iv_trunc = [False] * intervals_traps
    depths = []

    clock_at = np.zeros(nq)
    range_at = np.zeros(nq, dtype=np.int64)
    pos_at = np.zeros((nq, d), dtype=np.int64)
    xpos_at = np.zeros((nxq, d), dtype=np.int64)

    path_times, path_sites, path_taus = [], [], []

    def discover(site, now):
        """Insert the 1-neighbourhood; returns records in offset order."""
        nonlocal n_disc
        recs = []
        for off in offsets:
            y = tuple(site[j] + off[j] for j in range(d))
            rec = table.get(y)
            if rec is None:
                h = env_base
                for j in range(d):
                    h = mix64(h ^ ((y[j] + origin[j]) & MASK64))
                logtau = log(_uniform(h)) * inv_alpha
                ty = exp(logtau)
                tp = exp(a * logtau) if variant == VARIANT_BOUCHAUD else ty
                rec = [ty, tp, -1]
                if ty >= deep_threshold and len(deep_tau) < max_deep:
                    rec[2] = len(deep_tau)
                    deep_site.append(y)
                    deep_tau.append(ty)
                    deep_T.append(now)
                    deep_ltime.append(0.0)
                    deep_visited.append(False)
                table[y] = rec
                n_disc += 1
                if len(depths) < max_depths:
                    depths.append(ty)
            recs.append(rec)
        return recs

    x = (0,) * d
    t = 0.0
    A = 0.0
    steps = 0
    origin_time = 0.0
    qi = 0
    xqi = 0

    nb = discover(x, 0.0)
    cur = nb[center_idx]
    if cur[2] >= 0:
        deep_visited[cur[2]] = True
    if record_path:
        path_times.append(0.0)
        path_sites.append(x)
        path_taus.append(cur[0])

    stopped_by = "steps"
    while True:
        if steps >= max_steps:
            stopped_by = "steps"
            break
        tau_x, tpow_x, dix = cur
        # neighbour conductances, axis-major (-,+) order
        ws = []
        W = 0.0
        for mvi in range(2 * d):
            ty, tpy, _ = nb[move_off_idx[mvi]]
            if variant == VARIANT_BOUCHAUD:
                w = tpow_x * tpy
            elif variant == VARIANT_METROPOLIS:
                w = tau_x if tau_x < ty else ty
            else:
                w = tau_x * ty / (tau_x + ty)
            ws.append(w)
            W += w
        rate = W if time_change else W / tau_x
        dt = -log(hold.next_uniform()) / rate
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
            pos_at[qi] = x
            qi += 1
        if time_change:
            while xqi < nxq and (xtime_q[xqi] < A_next or (truncated and xtime_q[xqi] <= A_next)):
                xpos_at[xqi] = x
                xqi += 1
        A = A_next
        if dix >= 0:
            deep_ltime[dix] += dt
            if dix < intervals_traps:
                if len(iv_times[dix]) < max_intervals:
                    iv_times[dix].append((t, t_next))
                else:
                    iv_trunc[dix] = True
        if x == (0,) * d:
            origin_time += dt
        t = t_next
        if truncated:
            stopped_by = "time"
            break

        # jump
        target = move.next_uniform() * W
        acc = 0.0
        pick = 2 * d - 1
        for i in range(2 * d):
            acc += ws[i]
            if acc >= target:
                pick = i
                break
        mv = moves[pick]
        x = tuple(x[j] + mv[j] for j in range(d))
        steps += 1
        nb = discover(x, t)
        cur = nb[center_idx]
        if cur[2] >= 0 and not deep_visited[cur[2]]:
            deep_visited[cur[2]] = True
        if record_path:
            path_times.append(t)
            path_sites.append(x)
            path_taus.append(cur[0])
        if kill_radius >= 0 and max(abs(c) for c in x) > kill_radius:
            stopped_by = "kill"
            break

    # any queries past the stop point get the final state
    while qi < nq:
        clock_at[qi] = A
        range_at[qi] = n_disc
        pos_at[qi] = x
        qi += 1
    while xqi < nxq:
        xpos_at[xqi] = x
        xqi += 1

    out = {
        "steps": steps,
        "time": t,
        "clock": A,
        "origin_time": origin_time,
        "n_discovered": n_disc,
        "stopped_by": stopped_by,
        "clock_at": clock_at,
        "range_at": range_at,
        "pos_at": pos_at,
        "xpos_at": xpos_at,
        "depths": np.asarray(depths, dtype=float),
        "deep_site": np.asarray(deep_site, dtype=np.int64).reshape(len(deep_tau), d),
        "deep_tau": np.asarray(deep_tau, dtype=float),
        "deep_T": np.asarray(deep_T, dtype=float),
        "deep_ltime": np.asarray(deep_ltime, dtype=float),
        "deep_visited": np.asarray(deep_visited, dtype=bool),
        "iv_times": [np.asarray(iv, dtype=float).reshape(len(iv), 2) for iv in iv_times],
        "iv_truncated": np.asarray(iv_trunc, dtype=bool),
    }
    if record_path:
        out["path_times"] = np.asarray(path_times, dtype=float)
        out["path_sites"] = np.asarray(path_sites, dtype=np.int64).reshape(len(path_times), d)
        out["path_taus"] = np.asarray(path_taus, dtype=float)
    return out
