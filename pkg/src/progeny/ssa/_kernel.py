"""Numba-compiled simulation kernel for the built-in rate models.

The kernel inlines the xoshiro256++ generator from progeny.rng using native
uint64 arithmetic; the backend cross-tests assert that it reproduces the
pure-Python engine draw for draw and event for event.  Custom
(expression-based) models cannot be compiled and always run on the Python
engine instead.

Status codes: 0 absorbed, 1 event-cap truncation, 2 time-cap truncation,
3 stalled (total rate zero with z > 0; only reachable for degenerate
models with b = d = 0).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# model_id -> (pa, pb, pc) packing used by _rates:
#   1: Model1    pa=lam, pb=mu
#   2: Model2    pa=lam, pb=alpha, pc=mu
#   3: SIR       pa=beta, pb=gamma, pc=n_pop
#   4: LinearBDP pa=b, pb=d

_U = np.uint64


@njit(cache=True, nogil=True)
def _next_u64(s):
    s0 = s[0]
    tmp = s0 + s[3]
    result = ((tmp << _U(23)) | (tmp >> _U(41))) + s0
    t = s[1] << _U(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << _U(45)) | (s[3] >> _U(19))
    return result


@njit(cache=True, nogil=True)
def _uniform(s):
    return (_next_u64(s) >> _U(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, nogil=True)
def _sim_core(
    model_id,
    pa,
    pb,
    pc,
    z0,
    x0,
    t0,
    max_events,
    max_time,
    state,  # uint64[4], advanced in place
    grid,  # float64[:], strictly increasing (may be empty)
    lv,  # float64[eps_max] out: last time z entered level e at slot e-1
    gz,  # float64[n_grid] out: Z at grid times (NaN where undefined)
    gx,  # float64[n_grid] out: X at grid times
    rec_t,  # recording buffers; zero length disables recording
    rec_kind,
    rec_z,
    rec_x,
):
    z = z0
    x = x0
    t = t0
    n_events = 0
    z_max = z0
    t_first_max = t0
    t_last_birth = 0.0
    status = 0

    n_grid = grid.shape[0]
    gi = 0
    while gi < n_grid and grid[gi] < t0:
        gz[gi] = np.nan
        gx[gi] = np.nan
        gi += 1

    eps_max = lv.shape[0]
    for k in range(eps_max):
        lv[k] = np.nan
    if 1 <= z <= eps_max:
        lv[z - 1] = t

    rec_cap = rec_t.shape[0]

    while z > 0:
        if n_events >= max_events:
            status = 1
            break
        if model_id == 1:
            b = pa / x
            d = pb
        elif model_id == 2:
            b = pa * np.exp(-x / pb)
            d = pc
        elif model_id == 3:
            b = pa * (1.0 - x / pc)
            d = pb
        else:
            b = pa
            d = pb
        bd = b + d
        total = z * bd
        if not total > 0.0:
            status = 3
            break
        u1 = _uniform(state)
        dt = -np.log1p(-u1) / total
        if t + dt > max_time:
            status = 2
            break
        u2 = _uniform(state)
        t = t + dt
        while gi < n_grid and grid[gi] < t:
            gz[gi] = z
            gx[gi] = x
            gi += 1
        if u2 < b / bd:
            z += 1
            x += 1
            kind = 1
            t_last_birth = t
            if z > z_max:
                z_max = z
                t_first_max = t
        else:
            z -= 1
            kind = 0
        if n_events < rec_cap:
            rec_t[n_events] = t
            rec_kind[n_events] = kind
            rec_z[n_events] = z
            rec_x[n_events] = x
        n_events += 1
        if 1 <= z <= eps_max:
            lv[z - 1] = t

    if status == 0 or status == 1:
        t_end = t
    elif status == 2:
        t_end = max_time
    else:
        t_end = max_time if np.isfinite(max_time) else t

    if status == 0 or status == 3:
        # absorbed state (or a stalled one) persists forever
        while gi < n_grid:
            gz[gi] = z
            gx[gi] = x
            gi += 1
    else:
        while gi < n_grid and grid[gi] <= t_end:
            gz[gi] = z
            gx[gi] = x
            gi += 1
        while gi < n_grid:
            gz[gi] = np.nan
            gx[gi] = np.nan
            gi += 1

    return status, t_end, z, x, n_events, z_max, t_first_max, t_last_birth


@njit(cache=True, nogil=True)
def _sim_block(
    lo,
    hi,
    model_id,
    pa,
    pb,
    pc,
    z0,
    x0,
    t0,
    max_events,
    max_time,
    states,  # uint64[n_reps, 4]
    grid,
    out_status,
    out_t_end,
    out_z_end,
    out_x_end,
    out_n_events,
    out_z_max,
    out_t_first_max,
    out_t_last_birth,
    out_lv,  # float64[n_reps, eps_max]
    out_gz,  # float64[n_reps, n_grid]
    out_gx,
):
    no_rec_f = np.empty(0, np.float64)
    no_rec_k = np.empty(0, np.uint8)
    no_rec_i = np.empty(0, np.int64)
    for i in range(lo, hi):
        res = _sim_core(
            model_id,
            pa,
            pb,
            pc,
            z0,
            x0,
            t0,
            max_events,
            max_time,
            states[i],
            grid,
            out_lv[i],
            out_gz[i],
            out_gx[i],
            no_rec_f,
            no_rec_k,
            no_rec_i,
            no_rec_i,
        )
        out_status[i] = res[0]
        out_t_end[i] = res[1]
        out_z_end[i] = res[2]
        out_x_end[i] = res[3]
        out_n_events[i] = res[4]
        out_z_max[i] = res[5]
        out_t_first_max[i] = res[6]
        out_t_last_birth[i] = res[7]
