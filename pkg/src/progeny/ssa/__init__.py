"""Exact event-driven simulation of total-progeny-dependent birth-and-death
processes.

The chain lives on states (z, x): a birth moves (z, x) -> (z+1, x+1) at rate
z*b(x), a death moves (z, x) -> (z-1, x) at rate z*d(x), and z = 0 absorbs.
Waiting times are exponential with the total rate, so trajectories are exact
samples of the jump chain.

Replicates are embarrassingly parallel: replicate i draws from an RNG
substream derived from (master_seed, i), results land in replicate-indexed
arrays, and reductions run in index order with exact (fsum) accumulation,
so ensembles are bit-reproducible at any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..models import (
    Custom,
    LinearBDP,
    Model1,
    Model2,
    RateModel,
    SIR,
    domain_max,
)
from ..rng import Xoshiro256, stream_state
from ._backend import numba_available, resolve_backend, resolve_workers
from ._python import sim_block_py, sim_core_py
from .discrete import GenerationSeries, simulate_discrete_generations

__all__ = [
    "PopState",
    "SimCaps",
    "EventRecord",
    "Trajectory",
    "PathStats",
    "StatSummary",
    "EnsembleSummary",
    "GenerationSeries",
    "simulate_trajectory",
    "trajectory_stats",
    "run_ensemble",
    "grid_average",
    "simulate_discrete_generations",
    "relative_difference",
    "numba_available",
]


@dataclass(frozen=True)
class PopState:
    """A point (z, x) of the chain at time t: z alive, x ever born."""

    z: int
    x: int
    t: float = 0.0

    def __post_init__(self):
        if self.z < 0:
            raise ValueError(f"population z must be >= 0, got {self.z}")
        if self.x < 1:
            raise ValueError(f"total progeny x must be >= 1, got {self.x}")
        if self.z > self.x:
            raise ValueError(f"z <= x violated: z={self.z}, x={self.x}")
        if self.t < 0:
            raise ValueError(f"time must be >= 0, got {self.t}")


@dataclass(frozen=True)
class SimCaps:
    """Stopping caps: a replicate is truncated when either cap is hit.

    store_events bounds full event storage only; longer trajectories are
    still simulated to absorption, keeping stats and grid samples.
    """

    max_events: int = 100_000_000
    max_time: float = math.inf
    store_events: int = 1_000_000

    def __post_init__(self):
        if self.max_events < 1:
            raise ValueError("max_events must be >= 1")
        if not self.max_time > 0:
            raise ValueError("max_time must be > 0")
        if self.store_events < 0:
            raise ValueError("store_events must be >= 0")


@dataclass(frozen=True)
class EventRecord:
    """Columnar event log: kind 1 is a birth, 0 a death."""

    times: np.ndarray
    kinds: np.ndarray
    z_after: np.ndarray
    x_after: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def as_tuples(self) -> list[tuple[float, str, int, int]]:
        return [
            (float(t), "birth" if k == 1 else "death", int(z), int(x))
            for t, k, z, x in zip(self.times, self.kinds, self.z_after, self.x_after)
        ]


@dataclass(frozen=True)
class PathStats:
    """Per-trajectory statistics.

    last_visit maps a level e to the last time z entered e; levels never
    visited are absent.  partial marks stats from a truncated path, whose
    t_ext is unknown (None) and whose other fields are lower bounds.
    """

    z_max: int
    t_first_max: float
    t_ext: float | None
    x_final: int
    t_last_birth: float
    last_visit: dict[int, float]
    partial: bool = False


@dataclass(frozen=True)
class Trajectory:
    """One exact path from `initial` to absorption or a cap.

    events is None when the path outgrew SimCaps.store_events; stats and
    grid samples are always present.  Exactly one of absorbed/truncated is
    set.  seed_path is (master_seed, replicate_index).
    """

    initial: PopState
    final: PopState
    events: EventRecord | None
    absorbed: bool
    truncated: bool
    seed_path: tuple[int, int]
    n_events: int
    stats: PathStats
    eps_tracked: tuple[int, ...]
    grid: np.ndarray | None = None
    grid_z: np.ndarray | None = None
    grid_x: np.ndarray | None = None


@dataclass(frozen=True)
class StatSummary:
    """Mean and standard error of one statistic over n contributing paths."""

    mean: float
    se: float
    n: int


@dataclass(frozen=True)
class EnsembleSummary:
    """Replicate-averaged statistics and grid-averaged mean curves."""

    n_reps: int
    master_seed: int
    n_absorbed: int
    n_truncated: int
    stats: dict[str, StatSummary]
    grid: np.ndarray | None = None
    mean_z: np.ndarray | None = None
    se_z: np.ndarray | None = None
    mean_x: np.ndarray | None = None
    se_x: np.ndarray | None = None

    def stat_rows(self) -> list[tuple[str, float, float, int]]:
        return [(k, v.mean, v.se, v.n) for k, v in self.stats.items()]


def _kernel_params(model: RateModel) -> tuple[int, float, float, float] | None:
    """(model_id, pa, pb, pc) for the compiled kernel; None for Custom."""
    if isinstance(model, Model1):
        return 1, model.lam, model.mu, 0.0
    if isinstance(model, Model2):
        return 2, model.lam, model.alpha, model.mu
    if isinstance(model, SIR):
        return 3, model.beta, model.gamma, float(model.n_pop)
    if isinstance(model, LinearBDP):
        return 4, model.b, model.d, 0.0
    return None


def _check_init(model: RateModel, init: PopState) -> None:
    if init.z < 1:
        raise DomainError(f"initial population must be >= 1, got {init.z}")
    if init.x > domain_max(model):
        raise DomainError(
            f"initial progeny {init.x} exceeds the model domain bound {domain_max(model):g}"
        )


def _as_grid(grid) -> np.ndarray:
    if grid is None:
        return np.empty(0, dtype=np.float64)
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1:
        raise ValueError("grid must be one-dimensional")
    if g.size > 1 and not np.all(np.diff(g) > 0):
        raise ValueError("grid times must be strictly increasing")
    return g


def _build_stats(
    absorbed: bool,
    t_end: float,
    x_end: int,
    z_max: int,
    t_first_max: float,
    t_last_birth: float,
    lv: np.ndarray,
    eps_list: tuple[int, ...],
) -> PathStats:
    visits = {e: float(lv[e - 1]) for e in eps_list if not math.isnan(lv[e - 1])}
    return PathStats(
        z_max=int(z_max),
        t_first_max=float(t_first_max),
        t_ext=float(t_end) if absorbed else None,
        x_final=int(x_end),
        t_last_birth=float(t_last_birth),
        last_visit=visits,
        partial=not absorbed,
    )


def simulate_trajectory(
    model: RateModel,
    init: PopState,
    seed_path: tuple[int, int],
    caps: SimCaps = SimCaps(),
    grid=None,
    eps_list: tuple[int, ...] = (1, 2),
    backend: str | None = None,
) -> Trajectory:
    """Simulate one exact trajectory.

    Output depends only on (model, init, seed_path), never on backend,
    platform threads or anything else.
    """
    _check_init(model, init)
    master_seed, rep_index = seed_path
    g = _as_grid(grid)
    eps_list = tuple(sorted(set(int(e) for e in eps_list)))
    if eps_list and eps_list[0] < 1:
        raise ValueError("eps levels must be positive integers")
    eps_max = eps_list[-1] if eps_list else 0
    lv = np.empty(eps_max, dtype=np.float64)
    gz = np.empty(g.size, dtype=np.float64)
    gx = np.empty(g.size, dtype=np.float64)
    rec_cap = min(caps.store_events, caps.max_events)

    params = _kernel_params(model)
    use_numba = params is not None and resolve_backend(backend) == "numba"
    if use_numba:
        from ._kernel import _sim_core

        model_id, pa, pb, pc = params
        state = np.array(stream_state(master_seed, rep_index), dtype=np.uint64)
        rec_t = np.empty(rec_cap, dtype=np.float64)
        rec_kind = np.empty(rec_cap, dtype=np.uint8)
        rec_z = np.empty(rec_cap, dtype=np.int64)
        rec_x = np.empty(rec_cap, dtype=np.int64)
        status, t_end, z_end, x_end, n_events, z_max, t_first_max, t_last_birth = _sim_core(
            model_id,
            pa,
            pb,
            pc,
            init.z,
            init.x,
            init.t,
            caps.max_events,
            caps.max_time,
            state,
            g,
            lv,
            gz,
            gx,
            rec_t,
            rec_kind,
            rec_z,
            rec_x,
        )
        events = None
        if rec_cap > 0 and n_events <= rec_cap:
            events = EventRecord(
                times=rec_t[:n_events].copy(),
                kinds=rec_kind[:n_events].copy(),
                z_after=rec_z[:n_events].copy(),
                x_after=rec_x[:n_events].copy(),
            )
    else:
        gen = Xoshiro256(master_seed, rep_index)
        status, t_end, z_end, x_end, n_events, z_max, t_first_max, t_last_birth, ev = sim_core_py(
            model.birth,
            model.death,
            init.z,
            init.x,
            init.t,
            caps.max_events,
            caps.max_time,
            gen,
            g,
            lv,
            gz,
            gx,
            rec_cap,
        )
        events = None
        if ev is not None and n_events <= rec_cap:
            ev_t, ev_kind, ev_z, ev_x = ev
            events = EventRecord(
                times=np.array(ev_t, dtype=np.float64),
                kinds=np.array(ev_kind, dtype=np.uint8),
                z_after=np.array(ev_z, dtype=np.int64),
                x_after=np.array(ev_x, dtype=np.int64),
            )

    absorbed = status == 0
    stats = _build_stats(
        absorbed, t_end, x_end, z_max, t_first_max, t_last_birth, lv, eps_list
    )
    return Trajectory(
        initial=init,
        final=PopState(int(z_end), int(x_end), float(t_end)),
        events=events,
        absorbed=absorbed,
        truncated=not absorbed,
        seed_path=(master_seed, rep_index),
        n_events=int(n_events),
        stats=stats,
        eps_tracked=eps_list,
        grid=g if g.size else None,
        grid_z=gz if g.size else None,
        grid_x=gx if g.size else None,
    )


def trajectory_stats(traj: Trajectory, eps_list) -> PathStats:
    """Per-path statistics for the requested small-population levels.

    Recomputed from the event log when it is stored; otherwise the levels
    must be a subset of those tracked during simulation.
    """
    eps_list = tuple(sorted(set(int(e) for e in eps_list)))
    if any(e < 1 for e in eps_list):
        raise ValueError("eps levels must be positive integers")
    if traj.events is None:
        missing = [e for e in eps_list if e not in traj.eps_tracked]
        if missing:
            raise ValueError(
                f"event log not stored and levels {missing} were not tracked"
            )
        visits = {e: t for e, t in traj.stats.last_visit.items() if e in eps_list}
        return PathStats(
            z_max=traj.stats.z_max,
            t_first_max=traj.stats.t_first_max,
            t_ext=traj.stats.t_ext,
            x_final=traj.stats.x_final,
            t_last_birth=traj.stats.t_last_birth,
            last_visit=visits,
            partial=traj.stats.partial,
        )

    eps_set = set(eps_list)
    z0, t0 = traj.initial.z, traj.initial.t
    z_max = z0
    t_first_max = t0
    t_last_birth = 0.0
    visits: dict[int, float] = {}
    if z0 in eps_set:
        visits[z0] = t0
    ev = traj.events
    for i in range(len(ev)):
        t = float(ev.times[i])
        z = int(ev.z_after[i])
        if ev.kinds[i] == 1:
            t_last_birth = t
            if z > z_max:
                z_max = z
                t_first_max = t
        if z in eps_set:
            visits[z] = t
    return PathStats(
        z_max=z_max,
        t_first_max=t_first_max,
        t_ext=traj.stats.t_ext,
        x_final=traj.stats.x_final,
        t_last_birth=t_last_birth,
        last_visit=visits,
        partial=traj.stats.partial,
    )


def _mean_se(values: np.ndarray) -> StatSummary:
    n = values.size
    if n == 0:
        return StatSummary(math.nan, math.nan, 0)
    mean = math.fsum(values) / n
    if n == 1:
        return StatSummary(mean, 0.0, 1)
    var = math.fsum((float(v) - mean) ** 2 for v in values) / (n - 1)
    return StatSummary(mean, math.sqrt(var / n), n)


def _column_mean_se(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """NaN-aware per-column mean and standard error, index-ordered."""
    n_cols = mat.shape[1]
    means = np.full(n_cols, np.nan)
    ses = np.full(n_cols, np.nan)
    for j in range(n_cols):
        col = mat[:, j]
        s = _mean_se(col[~np.isnan(col)])
        means[j] = s.mean
        ses[j] = s.se
    return means, ses


def run_ensemble(
    model: RateModel,
    init: PopState,
    n_reps: int,
    master_seed: int,
    caps: SimCaps = SimCaps(),
    grid=None,
    eps_list: tuple[int, ...] = (1, 2),
    n_workers: int | None = None,
    backend: str | None = None,
) -> EnsembleSummary:
    """Run n_reps independent replicates and reduce them deterministically.

    Replicate i uses the RNG substream (master_seed, i).  Path statistics
    are averaged over absorbed replicates only; truncated replicates are
    counted in n_truncated.  Grid curves average the right-continuous step
    functions (Z_t, X_t), with Z_t = 0 and X_t frozen after absorption.
    """
    _check_init(model, init)
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    g = _as_grid(grid)
    eps_list = tuple(sorted(set(int(e) for e in eps_list)))
    if eps_list and eps_list[0] < 1:
        raise ValueError("eps levels must be positive integers")
    eps_max = eps_list[-1] if eps_list else 0

    status = np.empty(n_reps, dtype=np.uint8)
    t_end = np.empty(n_reps, dtype=np.float64)
    z_end = np.empty(n_reps, dtype=np.int64)
    x_end = np.empty(n_reps, dtype=np.int64)
    n_events = np.empty(n_reps, dtype=np.int64)
    z_max = np.empty(n_reps, dtype=np.int64)
    t_first_max = np.empty(n_reps, dtype=np.float64)
    t_last_birth = np.empty(n_reps, dtype=np.float64)
    lv = np.empty((n_reps, eps_max), dtype=np.float64)
    gz = np.empty((n_reps, g.size), dtype=np.float64)
    gx = np.empty((n_reps, g.size), dtype=np.float64)

    params = _kernel_params(model)
    use_numba = params is not None and resolve_backend(backend) == "numba"
    workers = resolve_workers(n_workers)
    bounds = np.linspace(0, n_reps, min(workers, n_reps) + 1).astype(int)

    if use_numba:
        from ._kernel import _sim_block

        model_id, pa, pb, pc = params
        states = np.empty((n_reps, 4), dtype=np.uint64)
        for i in range(n_reps):
            states[i] = stream_state(master_seed, i)

        def work(lo: int, hi: int) -> None:
            _sim_block(
                lo, hi, model_id, pa, pb, pc,
                init.z, init.x, init.t, caps.max_events, caps.max_time,
                states, g,
                status, t_end, z_end, x_end, n_events,
                z_max, t_first_max, t_last_birth, lv, gz, gx,
            )

        if workers == 1:
            work(0, n_reps)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(work, int(lo), int(hi))
                    for lo, hi in zip(bounds[:-1], bounds[1:])
                    if hi > lo
                ]
                for f in futures:
                    f.result()
    else:
        sim_block_py(
            0, n_reps, model.birth, model.death,
            init.z, init.x, init.t, caps.max_events, caps.max_time,
            master_seed, g,
            status, t_end, z_end, x_end, n_events,
            z_max, t_first_max, t_last_birth, lv, gz, gx,
        )

    absorbed = status == 0
    n_absorbed = int(np.count_nonzero(absorbed))
    stats: dict[str, StatSummary] = {
        "z_max": _mean_se(z_max[absorbed].astype(np.float64)),
        "t_first_max": _mean_se(t_first_max[absorbed]),
        "t_ext": _mean_se(t_end[absorbed]),
        "x_final": _mean_se(x_end[absorbed].astype(np.float64)),
        "t_last_birth": _mean_se(t_last_birth[absorbed]),
    }
    for e in eps_list:
        col = lv[absorbed, e - 1]
        stats[f"last_visit_{e}"] = _mean_se(col[~np.isnan(col)])

    if g.size:
        mean_z, se_z = _column_mean_se(gz)
        mean_x, se_x = _column_mean_se(gx)
    else:
        mean_z = se_z = mean_x = se_x = None

    return EnsembleSummary(
        n_reps=n_reps,
        master_seed=master_seed,
        n_absorbed=n_absorbed,
        n_truncated=n_reps - n_absorbed,
        stats=stats,
        grid=g if g.size else None,
        mean_z=mean_z,
        se_z=se_z,
        mean_x=mean_x,
        se_x=se_x,
    )


def grid_average(trajs, grid) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise means of the step functions (Z_t, X_t) at the grid times.

    All trajectories must share the initial state and carry stored event
    logs; truncated paths must cover the whole grid.
    """
    trajs = list(trajs)
    if not trajs:
        raise ValueError("need at least one trajectory")
    init = trajs[0].initial
    g = _as_grid(grid)
    sum_z = np.zeros(g.size)
    sum_x = np.zeros(g.size)
    for traj in trajs:
        if traj.initial != init:
            raise ValueError("trajectories do not share an initial state")
        if traj.events is None:
            raise ValueError("trajectory lacks a stored event log")
        if np.any(g < init.t):
            raise ValueError("grid extends before the initial time")
        if traj.truncated and np.any(g > traj.final.t):
            raise ValueError("grid extends past a truncated trajectory")
        times = np.concatenate(([init.t], traj.events.times))
        zs = np.concatenate(([init.z], traj.events.z_after))
        xs = np.concatenate(([init.x], traj.events.x_after))
        idx = np.searchsorted(times, g, side="right") - 1
        sum_z += zs[idx]
        sum_x += xs[idx]
    return sum_z / len(trajs), sum_x / len(trajs)


def relative_difference(sim_mean: float, fluid_value: float) -> float:
    """Signed relative difference (sim - fluid) / sim."""
    if sim_mean == 0:
        raise DomainError("relative difference undefined for sim_mean == 0")
    return (sim_mean - fluid_value) / sim_mean
