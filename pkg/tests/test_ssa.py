import math

import numpy as np
import pytest

from progeny.errors import DomainError
from progeny.models import SIR, LinearBDP, Model1, Model2
from progeny.ssa import (
    EventRecord,
    PathStats,
    PopState,
    SimCaps,
    Trajectory,
    grid_average,
    relative_difference,
    run_ensemble,
    simulate_trajectory,
    trajectory_stats,
)


def make_traj(initial, events, absorbed=True):
    """Hand-built trajectory from (t, kind, z_after, x_after) tuples."""
    ev = EventRecord(
        times=np.array([e[0] for e in events], dtype=np.float64),
        kinds=np.array([1 if e[1] == "birth" else 0 for e in events], dtype=np.uint8),
        z_after=np.array([e[2] for e in events], dtype=np.int64),
        x_after=np.array([e[3] for e in events], dtype=np.int64),
    )
    final = PopState(events[-1][2], events[-1][3], events[-1][0]) if events else initial
    stats = PathStats(
        z_max=0, t_first_max=0.0, t_ext=final.t if absorbed else None,
        x_final=final.x, t_last_birth=0.0, last_visit={}, partial=not absorbed,
    )
    return Trajectory(
        initial=initial, final=final, events=ev, absorbed=absorbed,
        truncated=not absorbed, seed_path=(0, 0), n_events=len(events),
        stats=stats, eps_tracked=(),
    )


class TestSingleTrajectory:
    def test_pure_death_exact(self):
        traj = simulate_trajectory(LinearBDP(b=0.0, d=1.0), PopState(5, 5), (3, 0))
        assert traj.absorbed and not traj.truncated
        assert traj.n_events == 5
        assert all(k == 0 for k in traj.events.kinds)
        assert traj.stats.x_final == 5
        assert traj.stats.z_max == 5
        assert traj.stats.t_first_max == 0.0
        assert traj.stats.t_last_birth == 0.0

    def test_preconditions(self):
        with pytest.raises(ValueError):
            PopState(0, 0)
        with pytest.raises(DomainError):
            simulate_trajectory(Model1(10.0, 1.0), PopState(0, 1), (0, 0))
        with pytest.raises(ValueError):
            SimCaps(max_events=0)
        with pytest.raises(DomainError):
            simulate_trajectory(SIR(2.0, 1.0, 100), PopState(1, 101), (0, 0))

    def test_truncation_by_event_cap(self):
        traj = simulate_trajectory(
            LinearBDP(b=5.0, d=0.1), PopState(1, 1), (1, 0), caps=SimCaps(max_events=5)
        )
        assert traj.truncated and not traj.absorbed
        assert traj.n_events == 5
        assert traj.stats.partial
        assert traj.stats.t_ext is None

    def test_truncation_by_time_cap(self):
        traj = simulate_trajectory(
            LinearBDP(b=5.0, d=0.1), PopState(1, 1), (1, 0), caps=SimCaps(max_time=0.5)
        )
        assert traj.truncated
        assert traj.final.t == 0.5

    def test_event_storage_cap_keeps_stats(self):
        caps = SimCaps(store_events=10)
        traj = simulate_trajectory(Model1(200.0, 1.0), PopState(1, 1), (7, 0), caps=caps)
        assert traj.events is None
        assert traj.absorbed
        assert traj.stats.x_final >= traj.stats.z_max

    @pytest.mark.parametrize(
        "model",
        [
            Model1(lam=100.0, mu=1.0),
            Model2(lam=100.0, alpha=30.0, mu=1.0),
            SIR(beta=2.0, gamma=1.0, n_pop=300),
            LinearBDP(b=0.8, d=1.0),
        ],
        ids=lambda m: type(m).__name__,
    )
    @pytest.mark.parametrize("rep", [0, 1, 2, 3, 4])
    def test_path_validity(self, model, rep):
        traj = simulate_trajectory(model, PopState(1, 1), (2024, rep), eps_list=(1, 2))
        ev = traj.events
        assert np.all(np.diff(ev.times) > 0)
        z_prev, x_prev = traj.initial.z, traj.initial.x
        for k, z, x in zip(ev.kinds, ev.z_after, ev.x_after):
            if k == 1:
                assert z == z_prev + 1 and x == x_prev + 1
            else:
                assert z == z_prev - 1 and x == x_prev
            z_prev, x_prev = z, x
        assert traj.absorbed
        assert traj.final.z == 0
        n_births = int(np.sum(ev.kinds == 1))
        assert traj.stats.x_final == traj.initial.x + n_births
        st = traj.stats
        assert st.x_final >= st.z_max
        if st.z_max >= 2:
            assert st.t_first_max <= st.t_last_birth <= st.t_ext
        assert st.last_visit[1] <= st.t_ext


class TestTrajectoryStats:
    def test_hand_traced_path(self):
        traj = make_traj(
            PopState(1, 1),
            [(1.0, "birth", 2, 2), (2.0, "death", 1, 2), (3.0, "death", 0, 2)],
        )
        st = trajectory_stats(traj, eps_list=(1, 2))
        assert st.z_max == 2
        assert st.t_first_max == 1.0
        assert st.last_visit[1] == 2.0
        assert st.last_visit[2] == 1.0
        assert st.t_ext == 3.0
        assert st.t_last_birth == 1.0

    def test_recompute_matches_kernel(self):
        traj = simulate_trajectory(Model1(50.0, 1.0), PopState(1, 1), (5, 2), eps_list=(1, 2, 5))
        st = trajectory_stats(traj, eps_list=(1, 2, 5))
        assert st == traj.stats

    def test_stats_only_trajectory(self):
        caps = SimCaps(store_events=0)
        traj = simulate_trajectory(
            Model1(50.0, 1.0), PopState(1, 1), (5, 2), caps=caps, eps_list=(1, 2)
        )
        st = trajectory_stats(traj, eps_list=(1,))
        assert set(st.last_visit) <= {1}
        with pytest.raises(ValueError):
            trajectory_stats(traj, eps_list=(5,))


class TestGridAverage:
    def test_single_pure_death(self):
        traj = simulate_trajectory(LinearBDP(b=0.0, d=1.0), PopState(5, 5), (3, 0))
        mean_z, mean_x = grid_average([traj], [0.0, 10.0])
        assert mean_z[0] == 5.0 and mean_x[0] == 5.0
        assert mean_z[1] == 0.0 and mean_x[1] == 5.0

    def test_two_hand_built_paths(self):
        a = make_traj(PopState(1, 1), [(1.0, "birth", 2, 2), (4.0, "death", 1, 2), (5.0, "death", 0, 2)])
        b = make_traj(PopState(1, 1), [(2.0, "death", 0, 1)])
        mean_z, mean_x = grid_average([a, b], [0.5, 3.0, 10.0])
        assert list(mean_z) == [1.0, 1.0, 0.0]  # (1+1)/2, (2+0)/2, 0
        assert list(mean_x) == [1.0, 1.5, 1.5]

    def test_mismatched_init_rejected(self):
        a = make_traj(PopState(1, 1), [(2.0, "death", 0, 1)])
        b = make_traj(PopState(2, 2), [(2.0, "death", 1, 2)])
        with pytest.raises(ValueError):
            grid_average([a, b], [0.0])

    def test_yule_mean_growth(self):
        # pure birth: E[Z_t] = exp(t)
        grid = [0.5, 1.5, 3.0]
        s = run_ensemble(
            LinearBDP(b=1.0, d=0.0),
            PopState(1, 1),
            n_reps=3000,
            master_seed=17,
            caps=SimCaps(max_time=3.0),
            grid=grid,
        )
        assert s.n_truncated == s.n_reps  # never absorbs
        for t, m, se in zip(grid, s.mean_z, s.se_z):
            assert abs(m - math.exp(t)) < 4.0 * se


class TestEnsemble:
    def test_pure_death_harmonic_mean(self):
        s = run_ensemble(
            LinearBDP(b=0.0, d=1.0), PopState(5, 5), n_reps=100_000, master_seed=9
        )
        st = s.stats["t_ext"]
        assert st.n == 100_000
        assert abs(st.mean - 137.0 / 60.0) < 3.0 * st.se

    def test_extinction_fraction_vs_matrix_oracle(self):
        # gambler's-ruin oracle on states 0..N for the embedded jump chain
        b, d, cap = 2.0, 1.0, 64
        p_up = b / (b + d)
        A = np.zeros((cap - 1, cap - 1))
        rhs = np.zeros(cap - 1)
        for z in range(1, cap):
            A[z - 1, z - 1] = 1.0
            if z - 1 >= 1:
                A[z - 1, z - 2] = -(1.0 - p_up)
            else:
                rhs[z - 1] += 1.0 - p_up  # absorption at 0
            if z + 1 <= cap - 1:
                A[z - 1, z] = -p_up
        q_oracle = float(np.linalg.solve(A, rhs)[0])
        assert q_oracle == pytest.approx(0.5, abs=1e-9)

        n = 10_000
        s = run_ensemble(
            LinearBDP(b=b, d=d),
            PopState(1, 1),
            n_reps=n,
            master_seed=13,
            caps=SimCaps(max_events=200_000),
        )
        frac = s.n_absorbed / n
        se = math.sqrt(q_oracle * (1 - q_oracle) / n)
        assert abs(frac - q_oracle) < 3.0 * se

    def test_single_exponential_absorption_distribution(self):
        mu = 2.0
        n = 20_000
        s = run_ensemble(LinearBDP(b=0.0, d=mu), PopState(1, 1), n_reps=n, master_seed=31)
        st = s.stats["t_ext"]
        assert abs(st.mean - 1.0 / mu) < 4.0 * (1.0 / mu) / math.sqrt(n)
        var = st.se**2 * n
        se_var = (1.0 / mu**2) * math.sqrt(8.0 / n)
        assert abs(var - 1.0 / mu**2) < 4.0 * se_var

    def test_model2_mean_final_progeny_near_fluid(self):
        from progeny import fluid

        m = Model2(lam=1000.0, alpha=100.0, mu=1.0)
        s = run_ensemble(m, PopState(1, 1), n_reps=5000, master_seed=8)
        root = fluid.y2_at_extinction(m)
        assert abs(s.stats["x_final"].mean - root) / root < 0.02

    def test_last_visit_means_decrease_in_eps(self):
        s = run_ensemble(
            Model1(lam=1000.0, mu=1.0), PopState(1, 1), n_reps=5000,
            master_seed=21, eps_list=(1, 2, 5),
        )
        m1 = s.stats["last_visit_1"].mean
        m2 = s.stats["last_visit_2"].mean
        m5 = s.stats["last_visit_5"].mean
        assert m1 > m2 > m5

    def test_sir_conservation_exact(self):
        n_pop = 300
        model = SIR(beta=2.0, gamma=1.0, n_pop=n_pop)
        for rep in range(200):
            traj = simulate_trajectory(model, PopState(1, 1), (77, rep))
            x = np.concatenate(([1], traj.events.x_after))
            z = np.concatenate(([1], traj.events.z_after))
            s = n_pop - x
            r = x - z
            assert np.all(s >= 0) and np.all(r >= 0)
            assert np.all(s + z + r == n_pop)

    def test_repeat_runs_identical(self):
        kw = dict(n_reps=400, master_seed=3, grid=np.linspace(0, 8, 9), eps_list=(1,))
        a = run_ensemble(Model1(100.0, 1.0), PopState(1, 1), **kw)
        b = run_ensemble(Model1(100.0, 1.0), PopState(1, 1), **kw)
        assert a.stat_rows() == b.stat_rows()
        assert np.array_equal(a.mean_z, b.mean_z)
        assert np.array_equal(a.se_x, b.se_x)

    def test_mean_x_nondecreasing_on_grid(self):
        s = run_ensemble(
            Model1(100.0, 1.0), PopState(1, 1), n_reps=500, master_seed=4,
            grid=np.linspace(0.0, 15.0, 40),
        )
        assert np.all(np.diff(s.mean_x) >= 0)

    def test_stalled_model_reported_truncated(self):
        s = run_ensemble(
            LinearBDP(b=0.0, d=0.0), PopState(1, 1), n_reps=3, master_seed=0,
            caps=SimCaps(max_time=1.0),
        )
        assert s.n_truncated == 3


class TestRelativeDifference:
    def test_examples(self):
        assert relative_difference(100.0, 100.0) == 0.0
        assert relative_difference(100.0, 98.0) == pytest.approx(0.02, rel=1e-15)
        rd = relative_difference(500.9, 500.0005)
        assert rd == (500.9 - 500.0005) / 500.9
        assert rd == pytest.approx(0.001796, abs=5e-7)

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            relative_difference(0.0, 1.0)
