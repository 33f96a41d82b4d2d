"""Production constants against independent derivations from defining conditions."""

import math

import numpy as np
import pytest

import oracles
from hweno import hweno1d as h
from hweno import hweno2d as h2
from hweno.field import BoundaryCondition, MomentField, apply_boundary
from hweno.mesh import build_mesh_1d
from hweno.physics import Burgers
from hweno.rhs import compute_rhs_1d

C = oracles.derive_1d_constants()
REL = 1e-11


def _close(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))) <= REL


def _row(fn):
    """Coefficient row of a linear kernel by probing it with unit vectors."""
    return np.array([fn(*e) for e in np.eye(6)])


def test_gammas():
    assert _close(C["moment_gamma"], (11 / 38, 8 / 19, 11 / 38))
    assert _close(C["interface_gamma"], (25 / 189, 22 / 63, 14 / 27))
    assert _close(C["moment_gamma"], h.GAMMA_MOMENT)
    assert _close(C["interface_gamma"], h.GAMMA_INTERFACE)


def test_p0_right_coefficients():
    assert C["interface_p0"][4] == pytest.approx(241 / 54, rel=REL)
    assert _close(C["interface_p0"], h.P0_RIGHT)
    assert _close(_row(lambda *d: h.linear_interface(*d)[1]), C["interface_p0"])
    assert _close(_row(lambda *d: h.linear_interface(*d)[0]), C["interface_p0_left"])


def test_internal_coefficients():
    assert _close(h.P0_INNER_LEFT, C["internal_left"])
    assert _close(h.P0_INNER_RIGHT, C["internal_right"])
    assert C["internal_right"][4] == pytest.approx(10289 / 6750 * math.sqrt(5), rel=REL)


def test_candidate_rows():
    for k in range(3):
        assert _close(_row(lambda *d: h.interface_candidates(*d)[k]), C["interface_candidates"][k])
        assert _close(_row(lambda um, u0, up, vm, v0, vp: h.moment_candidates(um, u0, up, vm, vp)[k]),
                      C["moment_candidates"][k])


def _quad_matrix(fn):
    """Recover the symmetric matrix of a quadratic form by polarisation."""
    E = np.eye(6)
    M = np.zeros((6, 6))
    for i in range(6):
        for j in range(6):
            M[i, j] = 0.25 * (fn(*(E[i] + E[j])) - fn(*(E[i] - E[j])))
    return M


def test_beta_forms():
    for k in range(3):
        got = _quad_matrix(lambda *d: h.interface_smoothness(*d)[k])
        assert _close(got, C["interface_beta"][k])
        got = _quad_matrix(lambda um, u0, up, vm, v0, vp: h.moment_smoothness(um, u0, up, vm, vp)[k])
        assert _close(got, C["moment_beta"][k])


def test_every_1d_constant_has_an_oracle():
    """Guards against new hard-coded tables without a counterpart above."""
    tables = {k for k, v in vars(h).items() if k.isupper() and isinstance(v, tuple)}
    assert tables == {"GAMMA_MOMENT", "GAMMA_INTERFACE", "P0_RIGHT", "P0_INNER_LEFT", "P0_INNER_RIGHT"}


def test_2d_weights_match_independent_solve():
    ref = oracles.derive_2d_weights()
    assert np.allclose(ref["maps"], h2.tables().coef_maps, rtol=0, atol=1e-11)
    assert np.allclose(ref["gammas"], h2.tables().gammas, rtol=0, atol=1e-11)
    assert np.allclose(ref["linear_rows"], h2.tables().linear_rows, rtol=0, atol=1e-11)
    assert np.allclose(ref["gammas"][8:], 0.125, atol=1e-12)
    assert np.allclose(ref["gammas"].sum(axis=1), 1.0, atol=1e-12)
    r3 = math.sqrt(3)
    printed = [(3533 + 351 * r3) / 37040, (5727 + 351 * r3) / 37040, (3533 - 351 * r3) / 37040,
               (5727 - 351 * r3) / 37040, (10599 - 1867 * r3) / 111120, (17181 - 415 * r3) / 111120,
               (10599 + 1867 * r3) / 111120, (17181 + 415 * r3) / 111120]
    pts = oracles.target_points_2d()
    assert np.allclose(ref["gammas"][pts.index((0.5, r3 / 6))], printed, atol=1e-12)


def test_2d_beta_form_matches_quadrature(rng):
    for _ in range(10):
        d = rng.normal(size=15)
        coeffs = h2.solve_candidates(d)
        beta = h2.smoothness_from_data(d[:, None])[:, 0]
        ref = [oracles.smoothness_2d_by_quadrature(c) for c in coeffs]
        assert np.allclose(beta, ref, rtol=1e-11)


# ------------------------------------------------------------- tiny instance


def _tiny(avg, mom, flags, mode):
    m = build_mesh_1d(0.0, 1.2, 6)
    f = MomentField.zeros(m, 1)
    f.q[0, 0, 2:8] = avg
    f.q[1, 0, 2:8] = mom
    bc = BoundaryCondition.uniform("periodic")
    apply_boundary(f, bc)
    padded = np.zeros(10, bool)
    padded[2:8] = flags
    padded[:2] = flags[-2:]
    padded[8:] = flags[:2]
    dq = compute_rhs_1d(f, Burgers(), padded, mode, m, bc)
    return dq[0, 0, 2:8], dq[1, 0, 2:8], f.q[1, 0, 2:8], m.dx


@pytest.mark.parametrize("mode,flags", [
    ("hybrid", [False] * 6),
    ("hybrid", [False, True, False, False, False, False]),
    ("limit-all", [False] * 6),
])
def test_tiny_instance_equivalence(mode, flags, rng):
    x = np.arange(6) / 6
    avg = 0.5 + np.sin(2 * np.pi * x + rng.uniform()) + 0.05 * rng.normal(size=6)
    mom = 0.05 * rng.normal(size=6)
    flags = np.array(flags)
    da, dm, lim, dx = _tiny(avg, mom, flags, mode)
    ra, rm, rlim = oracles.reference_rhs_burgers_1d(avg, mom, dx, flags, limit_all=(mode == "limit-all"))
    assert np.max(np.abs(lim - rlim)) <= 1e-11
    assert np.max(np.abs(da - ra)) <= 1e-11
    assert np.max(np.abs(dm - rm)) <= 1e-11


def test_tiny_instance_constant():
    avg = np.full(6, 0.7)
    da, dm, _, dx = _tiny(avg, np.zeros(6), np.zeros(6, bool), "hybrid")
    ra, rm, _ = oracles.reference_rhs_burgers_1d(avg, np.zeros(6), dx, np.zeros(6, bool))
    assert np.allclose(da, 0, atol=1e-13) and np.allclose(ra, 0, atol=1e-13)
    assert np.allclose(dm, 0, atol=1e-13) and np.allclose(rm, 0, atol=1e-13)
