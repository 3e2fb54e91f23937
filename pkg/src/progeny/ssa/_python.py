"""Pure-Python simulation engine.

Mirrors ssa._kernel step for step (same RNG stream, same draw order, same
floating-point expressions) so that the two backends produce bit-identical
trajectories.  This is the fallback selected by PROGENY_BACKEND=numpy and
the only path for Custom (expression-based) models, whose rates are
arbitrary Python callables.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import SimulationError
from ..rng import Xoshiro256

STATUS_ABSORBED = 0
STATUS_EVENT_CAP = 1
STATUS_TIME_CAP = 2
STATUS_STALLED = 3


def sim_core_py(
    birth: Callable[[int], float],
    death: Callable[[int], float],
    z0: int,
    x0: int,
    t0: float,
    max_events: int,
    max_time: float,
    gen: Xoshiro256,
    grid: np.ndarray,
    lv: np.ndarray,
    gz: np.ndarray,
    gx: np.ndarray,
    rec_cap: int,
):
    """Simulate one replicate; returns the kernel's scalar tuple plus the
    recorded events as (t, kind, z_after, x_after) lists or None."""
    z = z0
    x = x0
    t = t0
    n_events = 0
    z_max = z0
    t_first_max = t0
    t_last_birth = 0.0
    status = STATUS_ABSORBED

    n_grid = grid.shape[0]
    gi = 0
    while gi < n_grid and grid[gi] < t0:
        gz[gi] = np.nan
        gx[gi] = np.nan
        gi += 1

    eps_max = lv.shape[0]
    lv[:] = np.nan
    if 1 <= z <= eps_max:
        lv[z - 1] = t

    record = rec_cap > 0
    ev_t: list[float] = []
    ev_kind: list[int] = []
    ev_z: list[int] = []
    ev_x: list[int] = []

    while z > 0:
        if n_events >= max_events:
            status = STATUS_EVENT_CAP
            break
        try:
            b = birth(x)
            d = death(x)
        except Exception as exc:
            raise SimulationError(
                f"rate evaluation failed at state (z={z}, x={x}, t={t}): {exc}"
            ) from exc
        bd = b + d
        total = z * bd
        if not total > 0.0:
            status = STATUS_STALLED
            break
        u1 = gen.uniform()
        dt = -math.log1p(-u1) / total
        if t + dt > max_time:
            status = STATUS_TIME_CAP
            break
        u2 = gen.uniform()
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
        if record and n_events < rec_cap:
            ev_t.append(t)
            ev_kind.append(kind)
            ev_z.append(z)
            ev_x.append(x)
        n_events += 1
        if 1 <= z <= eps_max:
            lv[z - 1] = t

    if status in (STATUS_ABSORBED, STATUS_EVENT_CAP):
        t_end = t
    elif status == STATUS_TIME_CAP:
        t_end = max_time
    else:
        t_end = max_time if math.isfinite(max_time) else t

    if status in (STATUS_ABSORBED, STATUS_STALLED):
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

    events = (ev_t, ev_kind, ev_z, ev_x) if record else None
    return status, t_end, z, x, n_events, z_max, t_first_max, t_last_birth, events


def sim_block_py(
    lo: int,
    hi: int,
    birth,
    death,
    z0,
    x0,
    t0,
    max_events,
    max_time,
    master_seed,
    grid,
    out_status,
    out_t_end,
    out_z_end,
    out_x_end,
    out_n_events,
    out_z_max,
    out_t_first_max,
    out_t_last_birth,
    out_lv,
    out_gz,
    out_gx,
):
    for i in range(lo, hi):
        gen = Xoshiro256(master_seed, i)
        try:
            res = sim_core_py(
                birth,
                death,
                z0,
                x0,
                t0,
                max_events,
                max_time,
                gen,
                grid,
                out_lv[i],
                out_gz[i],
                out_gx[i],
                0,
            )
        except SimulationError as exc:
            exc.replicate = i
            raise
        out_status[i] = res[0]
        out_t_end[i] = res[1]
        out_z_end[i] = res[2]
        out_x_end[i] = res[3]
        out_n_events[i] = res[4]
        out_z_max[i] = res[5]
        out_t_first_max[i] = res[6]
        out_t_last_birth[i] = res[7]
