"""Cross-backend contract: the numba kernel and the pure-Python engine must
produce bit-identical trajectories, stats, and ensemble reductions."""

import numpy as np
import pytest

from progeny.models import SIR, LinearBDP, Model1, Model2
from progeny.ssa import PopState, SimCaps, numba_available, run_ensemble, simulate_trajectory
from progeny.ssa._backend import resolve_backend, resolve_workers

needs_numba = pytest.mark.skipif(not numba_available(), reason="numba not importable")

MODELS = [
    Model1(lam=200.0, mu=1.0),
    Model2(lam=200.0, alpha=50.0, mu=1.0),
    SIR(beta=2.0, gamma=1.0, n_pop=200),
    LinearBDP(b=0.5, d=1.0),
]


@needs_numba
@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
def test_trajectories_bit_identical(model):
    for rep in range(3):
        a = simulate_trajectory(model, PopState(1, 1), (99, rep), backend="numba")
        b = simulate_trajectory(model, PopState(1, 1), (99, rep), backend="numpy")
        assert a.n_events == b.n_events
        assert a.absorbed == b.absorbed
        assert a.final == b.final
        assert np.array_equal(a.events.times, b.events.times)
        assert np.array_equal(a.events.kinds, b.events.kinds)
        assert np.array_equal(a.events.z_after, b.events.z_after)
        assert np.array_equal(a.events.x_after, b.events.x_after)
        assert a.stats == b.stats


@needs_numba
def test_ensemble_bit_identical():
    grid = np.linspace(0.0, 10.0, 21)
    kw = dict(n_reps=300, master_seed=5, grid=grid, eps_list=(1, 2))
    a = run_ensemble(Model1(lam=50.0, mu=1.0), PopState(1, 1), backend="numba", **kw)
    b = run_ensemble(Model1(lam=50.0, mu=1.0), PopState(1, 1), backend="numpy", **kw)
    assert a.stat_rows() == b.stat_rows()
    assert np.array_equal(a.mean_z, b.mean_z)
    assert np.array_equal(a.se_z, b.se_z)
    assert np.array_equal(a.mean_x, b.mean_x)
    assert np.array_equal(a.se_x, b.se_x)
    assert a.n_truncated == b.n_truncated


@needs_numba
def test_worker_count_invariance():
    grid = np.linspace(0.0, 12.0, 25)
    runs = [
        run_ensemble(
            Model1(lam=100.0, mu=1.0),
            PopState(1, 1),
            n_reps=500,
            master_seed=11,
            grid=grid,
            n_workers=w,
        )
        for w in (1, 3, 8)
    ]
    base = runs[0]
    for other in runs[1:]:
        assert other.stat_rows() == base.stat_rows()
        assert np.array_equal(other.mean_z, base.mean_z)
        assert np.array_equal(other.mean_x, base.mean_x)


def test_backend_env_resolution(monkeypatch):
    monkeypatch.setenv("PROGENY_BACKEND", "numpy")
    assert resolve_backend() == "numpy"
    monkeypatch.setenv("PROGENY_BACKEND", "bogus")
    with pytest.raises(ValueError):
        resolve_backend()
    monkeypatch.delenv("PROGENY_BACKEND")
    assert resolve_backend("numpy") == "numpy"
    if numba_available():
        monkeypatch.setenv("PROGENY_BACKEND", "numba")
        assert resolve_backend() == "numba"
        assert resolve_backend() == resolve_backend("auto")


def test_env_backend_drives_simulation(monkeypatch):
    monkeypatch.setenv("PROGENY_BACKEND", "numpy")
    t = simulate_trajectory(LinearBDP(b=0.0, d=1.0), PopState(5, 5), (0, 0))
    assert t.absorbed and t.n_events == 5


def test_threads_env(monkeypatch):
    monkeypatch.setenv("PROGENY_THREADS", "3")
    assert resolve_workers() == 3
    assert resolve_workers(2) == 2
    monkeypatch.setenv("PROGENY_THREADS", "0")
    with pytest.raises(ValueError):
        resolve_workers()
