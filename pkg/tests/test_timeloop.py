import numpy as np
import pytest

from hweno.cli import run_problem
from hweno.field import BoundaryCondition, MomentField, init_moments
from hweno.mesh import build_mesh_1d, build_mesh_2d
from hweno.physics import Burgers, Euler
from hweno.problems import error_norms, preset
from hweno.timeloop import SimulationAborted, TimeConfig, compute_dt, rk3_step, run

P1 = BoundaryCondition.uniform("periodic")


def _burgers_field(values, n=20, lo=0.0, hi=1.0):
    m = build_mesh_1d(lo, hi, n)
    f = MomentField.zeros(m, 1)
    f.q[0, 0, 2:-2] = values
    return f


def test_compute_dt_1d():
    f = _burgers_field(np.linspace(-0.5, 1.5, 20))
    assert compute_dt(f, Burgers(), TimeConfig(t_end=10.0, cfl=0.6)) == pytest.approx(0.02)


def test_compute_dt_2d():
    m = build_mesh_2d(0, 0.5, 0, 0.5, 10, 10)
    f = MomentField.zeros(m, 1)
    f.q[0] = 2.0
    assert compute_dt(f, Burgers(2), TimeConfig(t_end=10.0, cfl=0.45)) == pytest.approx(0.005625)


def test_compute_dt_landing_and_zero_speed():
    f = _burgers_field(np.linspace(-0.5, 1.5, 20))
    cfg = TimeConfig(t_end=1.0, cfl=0.6)
    assert compute_dt(f, Burgers(), cfg, t=1.0 - 1e-4) == pytest.approx(1e-4)
    z = _burgers_field(np.zeros(20))
    assert compute_dt(z, Burgers(), cfg, t=0.25) == 0.75


def test_accuracy_policy_scaling():
    cfg = TimeConfig(t_end=10.0, cfl=0.6, dt_policy="accuracy")
    coarse = _burgers_field(np.full(10, 1.0), n=10)
    fine = _burgers_field(np.full(40, 1.0), n=40)
    # reference grid = extent / 10 cells: plain CFL there, dt ~ dx^2 below
    assert compute_dt(coarse, Burgers(), cfg) == pytest.approx(0.06)
    assert compute_dt(fine, Burgers(), cfg) == pytest.approx(0.06 / 16)


def test_bad_config():
    with pytest.raises(ValueError):
        TimeConfig(t_end=1.0, dt_policy="magic")
    with pytest.raises(ValueError):
        TimeConfig(t_end=1.0, dt_policy="fixed")


def test_rk3_zero_operator():
    f = _burgers_field(np.random.default_rng(1).normal(size=20))
    out = rk3_step(f, lambda g, t: np.zeros_like(g.q), 0.3)
    assert np.array_equal(out.q, f.q)


@pytest.mark.parametrize("z", [-0.3, -1.0, -2.4, 0.5, 1j * 1.2])
def test_rk3_stability_polynomial(z):
    m = build_mesh_1d(0, 1, 3)
    dt = 0.1
    lam = z / dt
    dtype = complex if isinstance(z, complex) else float
    f = MomentField(np.zeros((2, 1, 7), dtype=dtype), m)
    f.q[0, 0, 3] = 1.0
    out = rk3_step(f, lambda g, t: lam * g.q, dt)
    expect = 1 + z + z**2 / 2 + z**3 / 6
    assert abs(out.q[0, 0, 3] - expect) <= 1e-14


def test_constant_euler_unchanged_100_steps():
    e = Euler(1)
    m = build_mesh_1d(0, 1, 20)
    U = e.to_conservative(np.array([1.2, 0.0, 0.9]))
    f = init_moments(lambda x: np.repeat(U[:, None, None], x.shape[0], 1).repeat(x.shape[1], 2), m)
    cfg = TimeConfig(t_end=1e9, cfl=0.6, max_steps=100)
    res = run(f, e, P1, cfg)
    assert res.steps == 100
    assert np.max(np.abs(res.field.q[:, :, 2:-2] - f.q[:, :, 2:-2])) <= 1e-13


def test_run_burgers_paper_value():
    p = preset("burgers1d")
    res = run_problem(p, 80, dt_policy="accuracy")
    L1, _ = error_norms(res.field, p, res.t)
    assert res.t == p.t_end
    assert 1.46e-8 / 3 <= L1 <= 1.46e-8 * 3


def test_temporal_self_convergence():
    """Same mesh, halved fixed steps: differences shrink at third order."""
    p = preset("burgers1d")
    sols = []
    for dt in (0.01, 0.005, 0.0025):
        res = run_problem(p, 40, t_end=0.1, dt_policy="fixed", fixed_dt=dt)
        sols.append(res.field.interior(0)[0])
    e1 = np.mean(np.abs(sols[0] - sols[1]))
    e2 = np.mean(np.abs(sols[1] - sols[2]))
    assert np.log2(e1 / e2) >= 2.8


def test_deterministic():
    p = preset("lax")
    a = run_problem(p, 100, t_end=0.05)
    b = run_problem(p, 100, t_end=0.05)
    assert np.array_equal(a.field.q, b.field.q)
    assert a.history == b.history


def test_indicator_per_step_option():
    p = preset("lax")
    res = run_problem(p, 100, t_end=0.05, indicator_every="step")
    assert res.t == pytest.approx(0.05) and np.all(np.isfinite(res.field.q))


def test_abort_on_nan_keeps_last_good():
    f = _burgers_field(np.ones(20))
    calls = {"n": 0}

    class Op:
        stage = 0

        def __call__(self, g, t):
            calls["n"] += 1
            return np.full_like(g.q, np.nan) if calls["n"] > 4 else np.zeros_like(g.q)

    import hweno.timeloop as tl

    orig = tl.SchemeOperator
    tl.SchemeOperator = lambda *a, **k: Op()
    try:
        with pytest.raises(SimulationAborted) as info:
            run(f, Burgers(), P1, TimeConfig(t_end=1.0, cfl=0.5))
    finally:
        tl.SchemeOperator = orig
    assert info.value.step == 1
    assert np.array_equal(info.value.last_good.q[:, :, 2:-2], f.q[:, :, 2:-2])
