"""Experiment orchestration behind the CLI subcommands.

Every command is deterministic end to end: identical configs produce
byte-identical output trees at any worker count.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .. import fluid
from ..errors import ConfigError, ProgenyError
from ..models import RateModel
from ..ssa import (
    EnsembleSummary,
    PopState,
    relative_difference,
    run_ensemble,
    simulate_discrete_generations,
    simulate_trajectory,
)
from .config import ExperimentConfig
from .output import Series, render_svg, write_csv

TRAJECTORY_SCHEMA = ("t", "z", "x")
GRID_SCHEMA = ("t", "mean_z", "se_z", "mean_x", "se_x")
COMPARISON_SCHEMA = ("param", "stat", "sim_mean", "sim_se", "fluid", "rel_diff")
MINIMIZE_SCHEMA = ("y2star", "lambda", "t_eps")
STATS_SCHEMA = ("stat", "mean", "se", "n")
RUN_SCHEMA = ("n_reps", "master_seed", "n_absorbed", "n_truncated")
EXTINCTION_SCHEMA = ("param", "method", "t_anchor", "y2_anchor", "pop_at_anchor", "tail_mean", "t_ext")


def _trajectory_rows(traj):
    yield (traj.initial.t, traj.initial.z, traj.initial.x)
    ev = traj.events
    for i in range(len(ev)):
        yield (float(ev.times[i]), int(ev.z_after[i]), int(ev.x_after[i]))


def _grid_rows(summary: EnsembleSummary):
    for i, t in enumerate(summary.grid):
        yield (
            float(t),
            float(summary.mean_z[i]),
            float(summary.se_z[i]),
            float(summary.mean_x[i]),
            float(summary.se_x[i]),
        )


def cmd_simulate(config: ExperimentConfig, out_dir: Path | None = None) -> int:
    """Run the configured ensemble; write stats, grid means, and the first
    replicate's event log."""
    out = Path(out_dir) if out_dir is not None else config.outputs.directory
    sim = config.sim
    summary = run_ensemble(
        config.model,
        PopState(1, 1),
        sim.replicates,
        sim.master_seed,
        caps=sim.caps,
        grid=sim.grid,
        eps_list=sim.eps_list,
    )
    if config.outputs.csv:
        write_csv(
            [(sim.replicates, sim.master_seed, summary.n_absorbed, summary.n_truncated)],
            RUN_SCHEMA,
            out / "run.csv",
        )
        write_csv(summary.stat_rows(), STATS_SCHEMA, out / "stats.csv")
        traj = simulate_trajectory(
            config.model, PopState(1, 1), (sim.master_seed, 0), caps=sim.caps,
            eps_list=sim.eps_list,
        )
        if traj.events is not None:
            write_csv(_trajectory_rows(traj), TRAJECTORY_SCHEMA, out / "trajectory.csv")
        if summary.grid is not None:
            write_csv(_grid_rows(summary), GRID_SCHEMA, out / "grid_means.csv")
    if config.outputs.svg and summary.grid is not None:
        render_svg(
            [
                Series("mean population", summary.grid, summary.mean_z),
                Series("mean total progeny", summary.grid, summary.mean_x),
            ],
            out / "grid_means.svg",
            title="Ensemble mean curves",
            xlabel="t",
            ylabel="count",
        )
    print(
        f"simulate: {sim.replicates} replicates, {summary.n_truncated} truncated; "
        f"outputs in {out}"
    )
    return 0


def cmd_fluid(model: RateModel, t_end: float | None, csv_path: Path, opts=None) -> int:
    """Integrate the fluid ODE system and write the (t, y1, y2) curve."""
    opts = opts or fluid.NumericOptions()
    summary = fluid.fluid_summary(model, opts)
    if t_end is None:
        # default horizon: a bit past the descent through one individual
        try:
            t_end = 1.25 * fluid.t_eps(model, 1.0, opts)[0]
        except ProgenyError:
            t_end = 10.0 / model.death(1.0)
    curve = fluid.integrate_fluid(model, t_end, opts)
    ts = np.linspace(0.0, t_end, 401)
    y1s, y2s = curve.at(ts)
    write_csv(
        ((float(t), float(a), float(b)) for t, a, b in zip(ts, y1s, y2s)),
        ("t", "y1", "y2"),
        csv_path,
    )
    print(f"fluid: y2(t_max)={summary.y2_tmax:.6g} y1(t_max)={summary.y1_tmax:.6g} "
          f"t_max={summary.t_max:.6g} y2(inf)={summary.y2_inf:.6g}")
    print(f"curve written to {csv_path}")
    return 0


_COMPARE_STATS = ("z_max", "x_final", "t_first_max", "t_ext_eps1", "t_ext_eps2", "t_ext_star")


def _fluid_targets(model: RateModel, eps_list, opts) -> dict[str, float]:
    """The fluid counterpart of every compared statistic."""
    targets = {
        "z_max": fluid.y1_at_tmax(model, opts),
        "x_final": fluid.y2_at_extinction(model, opts),
        "t_first_max": fluid.t_max(model, opts),
        "t_ext_eps1": fluid.t_ext_eps(model, 1, opts).t_ext,
        "t_ext_eps2": fluid.t_ext_eps(model, 2, opts).t_ext,
        "t_ext_star": fluid.t_ext_star(model, opts).t_ext,
    }
    for e in eps_list:
        targets[f"last_visit_{e}"] = fluid.t_eps(model, e, opts)[0]
    return targets


def cmd_compare(config: ExperimentConfig, out_dir: Path | None = None) -> int:
    """Sweep a model parameter; per swept value, compare ensemble means with
    their fluid counterparts.

    Failed sweep points degrade to rows in errors.csv; the sweep continues.
    """
    if config.sweep is None:
        raise ConfigError("compare requires a [sweep] section")
    out = Path(out_dir) if out_dir is not None else config.outputs.directory
    sim = config.sim
    rows: list[tuple] = []
    error_rows: list[tuple] = []
    curves: dict[str, list[tuple[float, float, float]]] = {}  # stat -> (param, sim, fluid)

    for value in config.sweep.values:
        model = config.model_at(value)
        try:
            targets = _fluid_targets(model, sim.eps_list, config.numeric)
            summary = run_ensemble(
                model,
                PopState(1, 1),
                sim.replicates,
                sim.master_seed,
                caps=sim.caps,
                grid=None,
                eps_list=sim.eps_list,
            )
        except ProgenyError as exc:
            error_rows.append((value, "*", str(exc)))
            continue
        sims = {
            "z_max": summary.stats["z_max"],
            "x_final": summary.stats["x_final"],
            "t_first_max": summary.stats["t_first_max"],
            "t_ext_eps1": summary.stats["t_ext"],
            "t_ext_eps2": summary.stats["t_ext"],
            "t_ext_star": summary.stats["t_ext"],
        }
        for e in sim.eps_list:
            sims[f"last_visit_{e}"] = summary.stats[f"last_visit_{e}"]
        for stat in (*_COMPARE_STATS, *(f"last_visit_{e}" for e in sim.eps_list)):
            s = sims[stat]
            f = targets[stat]
            try:
                rd = relative_difference(s.mean, f)
            except ProgenyError as exc:
                error_rows.append((value, stat, str(exc)))
                continue
            rows.append((value, stat, s.mean, s.se, f, rd))
            curves.setdefault(stat, []).append((value, s.mean, f))

    if config.outputs.csv:
        write_csv(rows, COMPARISON_SCHEMA, out / "comparison.csv")
        if error_rows:
            write_csv(error_rows, ("param", "stat", "error"), out / "errors.csv")
    if config.outputs.svg:
        for stat, pts in curves.items():
            arr = np.asarray(pts, dtype=float)
            render_svg(
                [
                    Series("simulation mean", arr[:, 0], arr[:, 1]),
                    Series("fluid", arr[:, 0], arr[:, 2]),
                ],
                out / f"compare_{stat}.svg",
                title=stat,
                xlabel=config.sweep.parameter,
                ylabel=stat,
            )
    print(
        f"compare: {len(config.sweep.values)} sweep points, "
        f"{len(error_rows)} errors; outputs in {out}"
    )
    return 0


_METHOD_RE = re.compile(r"^eps(\d+)$")


def cmd_extinction(config: ExperimentConfig, methods: list[str], out_dir: Path | None = None) -> int:
    """Tabulate the requested extinction estimators (with intermediates)
    for each swept value, or once for a sweep-less config."""
    out = Path(out_dir) if out_dir is not None else config.outputs.directory
    values = config.sweep.values if config.sweep is not None else (math.nan,)
    rows = []
    error_rows = []
    for value in values:
        model = config.model if config.sweep is None else config.model_at(value)
        for method in methods:
            try:
                if method == "star":
                    est = fluid.t_ext_star(model, config.numeric)
                else:
                    m = _METHOD_RE.match(method)
                    if not m:
                        raise ConfigError(
                            f"unknown method {method!r}: use epsN (e.g. eps1, eps2) or star"
                        )
                    est = fluid.t_ext_eps(model, int(m.group(1)), config.numeric)
            except ProgenyError as exc:
                error_rows.append((value, method, str(exc)))
                continue
            rows.append(
                (value, method, est.t_anchor, est.y2_anchor, est.pop_at_anchor,
                 est.tail_mean, est.t_ext)
            )
    write_csv(rows, EXTINCTION_SCHEMA, out / "extinction.csv")
    if error_rows:
        write_csv(error_rows, ("param", "method", "error"), out / "extinction_errors.csv")
    print(f"extinction: {len(rows)} estimates; outputs in {out}")
    return 0


def cmd_minimize(
    alpha: float,
    mu: float,
    eps: int,
    out_dir: Path = Path("out"),
    curve_points: int = 101,
    svg: bool = False,
    opts=None,
) -> int:
    """Minimize the extinction-time proxy over the anchor progeny y2*;
    write the sampled objective curve."""
    opts = opts or fluid.NumericOptions()
    res = fluid.minimize_t_eps(alpha, mu, eps, opts)
    if res.converged:
        print(
            f"minimize: t_eps minimal at y2*={res.y2star:.6g} "
            f"(lambda={res.lam:.6g}), t_eps={res.t_eps:.6g}"
        )
    else:
        print(
            f"minimize: objective monotone ({res.monotone}) over the search range; "
            f"best seen y2*={res.y2star:.6g} (lambda={res.lam:.6g}), t_eps={res.t_eps:.6g}"
        )
    edge = max(1.0, float(eps))
    lo = edge + 0.02 * alpha
    hi = max(2.5 * res.y2star, lo * 4.0)
    ys = np.linspace(lo, hi, curve_points)
    rows = [
        (float(y), fluid.lambda_of_y2star(alpha, mu, eps, float(y)),
         fluid.t_eps_of_y2star(alpha, mu, eps, float(y), opts))
        for y in ys
    ]
    write_csv(rows, MINIMIZE_SCHEMA, out_dir / "minimize_curve.csv")
    if svg:
        arr = np.asarray(rows, dtype=float)
        render_svg(
            [Series("t_eps", arr[:, 0], arr[:, 2])],
            out_dir / "minimize_curve.svg",
            title=f"extinction-time proxy, eps={eps}, alpha={alpha:g}, mu={mu:g}",
            xlabel="y2*",
            ylabel="t_eps",
        )
    return 0


def cmd_demo_discrete(
    mode: str,
    k_const: float,
    n_gens: int,
    seed: int,
    out_dir: Path = Path("out"),
    svg: bool = False,
) -> int:
    """Run the binary-splitting generation demo and write its series."""
    series = simulate_discrete_generations(mode, k_const, n_gens, seed)
    if mode == "progeny":
        schema = ("generation", "population", "progeny", "sqrt_progeny", "k")
        rows = [(g, z, x, math.sqrt(x), k_const) for g, z, x in series.generations]
    else:
        schema = ("generation", "population", "progeny")
        rows = list(series.generations)
    write_csv(rows, schema, out_dir / "generations.csv")
    if svg and series.generations:
        arr = np.asarray([(g, z, x) for g, z, x in series.generations], dtype=float)
        panels = [
            Series("population", arr[:, 0], arr[:, 1]),
            Series("total progeny", arr[:, 0], arr[:, 2]),
        ]
        if mode == "progeny":
            panels.append(Series("sqrt(progeny)", arr[:, 0], np.sqrt(arr[:, 2])))
            panels.append(Series("K", arr[:, 0], np.full(len(arr), k_const)))
        render_svg(
            panels,
            out_dir / "generations.svg",
            title=f"binary splitting, {mode} mode, K={k_const:g}",
            xlabel="generation",
            ylabel="count",
        )
    print(f"demo-discrete: {len(series.generations)} generations; outputs in {out_dir}")
    return 0
