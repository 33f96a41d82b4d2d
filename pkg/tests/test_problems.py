import math

import numpy as np
import pytest

from hweno.cli import run_problem
from hweno.field import MomentField, apply_boundary
from hweno.mesh import build_mesh_1d
from hweno.problems import (CATALOG, DMR_POST, DMR_PRE, OracleError, UnknownProblemError,
                            dmr_shock_x, error_norms, exact_cell_averages, exact_solution,
                            initial_field, preset, solve_burgers_characteristic,
                            step_corner_fix)


def _prim(p, x):
    return p.physics.to_primitive(p.initial(np.array([x]))[:, :1])[:, 0]


def test_catalog_names():
    assert list(CATALOG) == ["burgers1d", "euler1d-wave", "burgers2d", "euler2d-wave", "vortex",
                             "buckley", "lax", "shu-osher", "blast", "dmr", "step"]
    with pytest.raises(UnknownProblemError, match="lax"):
        preset("sod")


def test_lax_states():
    p = preset("lax")
    assert np.allclose(_prim(p, -0.2), (0.445, 0.698, 3.528))
    assert np.allclose(_prim(p, 0.2), (0.5, 0.0, 0.571))
    assert p.physics.gamma == 1.4 and p.t_end == 0.16


def test_blast_pressures():
    p = preset("blast")
    assert [_prim(p, x)[2] for x in (0.05, 0.5, 0.95)] == pytest.approx([1e3, 1e-2, 1e2])


def _rankine_hugoniot(rho1, p1, mach, gamma=1.4):
    """Post-shock state and shock speed for a normal shock into still gas."""
    c1 = math.sqrt(gamma * p1 / rho1)
    m2 = mach * mach
    rho2 = rho1 * (gamma + 1) * m2 / ((gamma - 1) * m2 + 2)
    p2 = p1 * (2 * gamma * m2 - (gamma - 1)) / (gamma + 1)
    s = mach * c1
    return rho2, s * (1 - rho1 / rho2), p2, s


def test_dmr_states_from_rankine_hugoniot():
    rho2, u2, p2, s = _rankine_hugoniot(1.4, 1.0, 10.0)
    normal = (math.cos(math.pi / 6), -math.sin(math.pi / 6))  # 60 degree shock
    assert DMR_PRE == (1.4, 0.0, 0.0, 1.0)
    assert np.allclose(DMR_POST, (rho2, u2 * normal[0], u2 * normal[1], p2), rtol=1e-14)
    assert DMR_POST[0] == pytest.approx(8.0) and DMR_POST[3] == pytest.approx(116.5)
    # the shock crosses y = 1 moving along x at s / sin(60)
    for t in (0.0, 0.1, 0.2):
        expect = 1 / 6 + 1 / math.sqrt(3) + t * s / math.sin(math.pi / 3)
        assert dmr_shock_x(t, 1.0) == pytest.approx(expect, rel=1e-14)
        assert dmr_shock_x(t, 1.0) == pytest.approx(1 / 6 + (1 + 20 * t) / math.sqrt(3), rel=1e-14)


def test_dmr_travelling_discontinuity():
    """Ten steps at coarse resolution keep the shock on its exact path."""
    p = preset("dmr")
    res = run_problem(p, 96, 24, t_end=1.0, max_steps=10)
    mesh = res.extras["mesh"]
    rho = res.field.interior(0)[0]
    mid = 0.5 * (DMR_PRE[0] + DMR_POST[0])
    for j in range(mesh.ny - 4, mesh.ny):
        y = mesh.y_centers[j]
        k = np.nonzero(rho[:, j] < mid)[0][0]
        # linear interpolation of the crossing between cell centres
        x0, x1 = mesh.x_centers[k - 1], mesh.x_centers[k]
        r0, r1 = rho[k - 1, j], rho[k, j]
        xs = x0 + (r0 - mid) / (r0 - r1) * (x1 - x0)
        assert abs(xs - dmr_shock_x(res.t, y)) <= mesh.dx


def test_burgers_oracle_fixed_point():
    # sin(pi (x - 0.5 t)) = 0 at x = 0.5 t: u = 0.5 there
    for t in (0.0, 0.1, 0.3):
        assert solve_burgers_characteristic(np.array([0.5 * t]), t)[0] == pytest.approx(0.5, abs=1e-14)


def test_burgers_oracle_residual(rng):
    s = rng.uniform(-3, 3, 10_000)
    t = rng.uniform(0, 0.99 / np.pi, 10_000)
    u = solve_burgers_characteristic(s, t)
    assert np.max(np.abs(u - 0.5 - np.sin(np.pi * (s - u * t)))) <= 1e-14 * 2


def test_burgers_oracle_after_breaking():
    with pytest.raises(OracleError):
        solve_burgers_characteristic(np.array([0.3]), 1.5 / np.pi)


def test_euler_wave_exact():
    p = preset("euler1d-wave")
    x = np.linspace(0, 2, 7)
    U = exact_solution(p, 2.0, x)
    assert np.allclose(U[0], 1 + 0.2 * np.sin(np.pi * (x - 2)))
    assert np.allclose(p.physics.to_primitive(U)[1:], 1.0)


def test_vortex_periodic():
    p = preset("vortex")
    x = np.linspace(-5, 5, 9)
    X, Y = np.meshgrid(x, x)
    assert np.allclose(exact_solution(p, 10.0, X, Y), exact_solution(p, 0.0, X, Y), atol=1e-12)


def test_no_oracle():
    with pytest.raises(OracleError):
        exact_solution(preset("lax"), 0.1, np.zeros(3))


def test_error_norms_definition():
    p = preset("burgers1d")
    m = build_mesh_1d(0, 2, 10)
    f = MomentField.zeros(m, 1)
    f.q[0, :, 2:-2] = exact_cell_averages(p, m, 0.2)
    assert error_norms(f, p, 0.2) == (0.0, 0.0)
    f.q[0, 0, 5] += 1e-3
    L1, Linf = error_norms(f, p, 0.2)
    assert L1 == pytest.approx(1e-4, rel=1e-9) and Linf == pytest.approx(1e-3, rel=1e-9)


@pytest.mark.parametrize("name", ["lax", "blast", "buckley", "shu-osher"])
def test_riemann_data_on_interfaces(name):
    """Every cell holds a single smooth piece: no averaged jumps at t = 0."""
    p = preset(name)
    m = p.build_mesh()
    f = initial_field(p, m)
    edges = m.x_lo + np.arange(m.n + 1) * m.dx
    jumps = {"lax": [0.0], "blast": [0.1, 0.9], "buckley": [-0.5, 0.0], "shu-osher": [-4.0]}[name]
    for xj in jumps:
        assert np.min(np.abs(edges - xj)) < 1e-12
    if name != "shu-osher":
        assert np.all(f.interior(1) == 0.0)


def test_initial_fields_finite():
    for name in CATALOG:
        p = preset(name)
        nx = 40 if p.ndim == 2 else None
        m = p.build_mesh(nx)
        f = initial_field(p, m)
        assert np.all(np.isfinite(f.q))


def test_corner_fix_noop_on_free_stream():
    p = preset("step")
    m = p.build_mesh(60, 20)
    f = initial_field(p, m)
    bc = p.boundary(m)
    apply_boundary(f, bc, 0.0, p.physics)
    before = f.q.copy()
    step_corner_fix(f, m, p.obstacle(bc))
    assert np.allclose(f.q, before, rtol=1e-12, atol=0)


def test_corner_fix_sets_reference_entropy():
    p = preset("step")
    m = p.build_mesh(60, 20)
    f = initial_field(p, m)
    bc = p.boundary(m)
    obs = p.obstacle(bc)
    g = m.n_ghost
    i, j = obs.i_s + g, obs.j_t + g
    f.q[0, 0, i, j] *= 1.3  # perturb a corner cell's density
    f.q[1, :, i, j] = 0.1
    step_corner_fix(f, m, obs)
    w = p.physics.to_primitive(f.q[0][:, [i - 1, i], [j - 1, j]])
    s = w[3] / w[0] ** 1.4
    assert s[1] == pytest.approx(s[0], rel=1e-12)
    assert np.all(f.q[1:, :, i, j] == 0.0)


def test_step_obstacle_mask():
    p = preset("step")
    m = p.build_mesh(60, 20)
    obs = p.obstacle(p.boundary(m))
    assert obs.wall_faces == (12, 4)
    assert (~obs.active[m.interior]).sum() == (60 - 12) * 4


def test_default_resolutions():
    assert preset("dmr").build_mesh().shape == (480, 120)
    assert preset("step").build_mesh().shape == (480, 160)
    assert preset("burgers2d").build_mesh(80).shape == (80, 80)
    assert preset("lax").build_mesh().n == 200


def _step_surface_entropy_error(p, nx, ny, t_end):
    r = run_problem(p, nx, ny, t_end=t_end)
    m = r.extras["mesh"]
    avg = r.field.avg[(slice(None),) + m.interior]
    x, y = np.meshgrid(m.x_centers, m.y_centers, indexing="ij")
    s = p.physics.pressure(avg) / avg[0] ** 1.4
    band = (x > 0.7) & (x < 2.5) & (y > 0.2) & (y < 0.2 + 2 * m.dy)
    return float(np.mean(np.abs(s[band] * 1.4**1.4 - 1.0)))


@pytest.mark.slow
def test_corner_fix_ablation():
    # without the fix an entropy layer grows along the top of the step
    import dataclasses
    p = preset("step")
    with_fix = _step_surface_entropy_error(p, 60, 20, 1.0)
    without = _step_surface_entropy_error(dataclasses.replace(p, post_stage=None), 60, 20, 1.0)
    assert without > 1.3 * with_fix
