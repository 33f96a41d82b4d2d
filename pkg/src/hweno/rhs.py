"""Semi-discrete right-hand sides for the moment equations.

Each evaluation runs three phases: limit the first moments of troubled
cells, reconstruct point values (HWENO near troubled cells, linear
elsewhere), then assemble Lax-Friedrichs fluxes and quadratures.
"""

import os
import time
from collections import defaultdict

import numpy as np

from . import hweno1d, hweno2d
from .field import apply_boundary
from .physics import AdmissibilityError, BuckleyLeverett, Burgers, Euler

# "numba" uses the compiled kernels where available, "numpy" the reference path
BACKEND = os.environ.get("HWENO_BACKEND", "numba")

MODES = ("hybrid", "limit-all", "linear-unlimited")
SQRT5_10 = np.sqrt(5.0) / 10.0
S3 = np.sqrt(3.0) / 6.0


class NonFiniteRhsError(FloatingPointError):
    def __init__(self, phase, location):
        super().__init__(f"non-finite value in phase {phase!r} at cell {location}")
        self.phase = phase
        self.location = location


def normalize_mode(mode):
    m = str(mode).replace("_", "-").lower()
    if m not in MODES:
        raise ValueError(f"unknown scheme mode {mode!r}; valid modes: {', '.join(MODES)}")
    return m


class PhaseTimer:
    def __init__(self):
        self.seconds = defaultdict(float)

    def add(self, phase, t0):
        self.seconds[phase] += time.perf_counter() - t0
        return time.perf_counter()


def lax_friedrichs(uL, uR, alpha, flux_fn):
    return 0.5 * (flux_fn(uL) + flux_fn(uR)) - 0.5 * alpha * (uR - uL)


def characteristic_project(values, L):
    """Apply per-cell matrices ``L`` (k, n, n) to ``values`` (..., n, k)."""
    return np.einsum("kab,...bk->...ak", L, values)


def characteristic_unproject(values, R):
    return np.einsum("kab,...bk->...ak", R, values)


def _check_finite(arr, phase, offset=0):
    if not np.all(np.isfinite(arr)):
        loc = np.argwhere(~np.isfinite(arr))[0]
        raise NonFiniteRhsError(phase, tuple(int(i) for i in loc[-(arr.ndim - 1):]))


def _mask_flags(mask):
    """Boolean flag array from a TroubledMask or any array-like."""
    if isinstance(mask, np.ndarray) or not hasattr(mask, "flags"):
        return np.asarray(mask, dtype=bool)
    return np.asarray(mask.flags, dtype=bool)


def _is_scalar(physics):
    return physics.n_comp == 1


def _limit_rows(physics, um, u0, up, vm, vp, direction, eps):
    """Limited centre moments for gathered stencils; arrays are (n_comp, k)."""
    if _is_scalar(physics):
        return hweno1d.limit_first_moment(um, u0, up, vm, None, vp, eps)
    L, R, _ = physics.eigensystem(u0, direction)
    cm, c0, cp, cvm, cvp = (characteristic_project(a, L) for a in (um, u0, up, vm, vp))
    lim = hweno1d.limit_first_moment(cm, c0, cp, cvm, None, cvp, eps)
    return characteristic_unproject(lim, R)


# ------------------------------------------------------------------- 1D


def limit_moments_1d(field, physics, flags, eps=hweno1d.EPS):
    """Replace v of flagged interior cells in place (snapshot reads)."""
    mesh = field.mesh
    g = mesh.n_ghost
    p = np.nonzero(flags[g:g + mesh.n])[0] + g
    if p.size == 0:
        return 0
    avg, mom = field.avg, field.mom_x
    new = _limit_rows(physics, avg[:, p - 1], avg[:, p], avg[:, p + 1],
                      mom[:, p - 1], mom[:, p + 1], 0, eps)
    mom[:, p] = new
    return p.size


def reconstruct_1d(field, physics, flags, mode, eps=hweno1d.EPS):
    """Point values for padded cells 1..N-2: (left, inner_l, inner_r, right)."""
    avg, mom = field.avg, field.mom_x
    st = (avg[:, :-2], avg[:, 1:-1], avg[:, 2:], mom[:, :-2], mom[:, 1:-1], mom[:, 2:])
    left, right = hweno1d.linear_interface(*st)
    in_l, in_r = hweno1d.linear_internal(*st)
    if mode == "linear-unlimited":
        use = np.ones(avg.shape[1] - 2, dtype=bool)
    else:
        use = flags[:-2] | flags[1:-1] | flags[2:]
    c = np.nonzero(use)[0]
    if c.size:
        sub = [a[:, c] for a in st]
        if _is_scalar(physics):
            hl = hweno1d.hweno_interface(*sub, side="left", eps=eps)
            hr = hweno1d.hweno_interface(*sub, side="right", eps=eps)
        else:
            L, R, _ = physics.eigensystem(sub[1], 0)
            proj = [characteristic_project(a, L) for a in sub]
            hl = characteristic_unproject(hweno1d.hweno_interface(*proj, side="left", eps=eps), R)
            hr = characteristic_unproject(hweno1d.hweno_interface(*proj, side="right", eps=eps), R)
        left[:, c] = hl
        right[:, c] = hr
    return left, in_l, in_r, right


def _flux_kind_1d(physics):
    if BACKEND != "numba":
        return None
    if isinstance(physics, Euler) and physics.ndim == 1:
        return 0
    if isinstance(physics, Burgers):
        return 1
    if isinstance(physics, BuckleyLeverett):
        return 2
    return None


def _compiled_rhs_1d(field, physics, flags, mode, mesh, bc, t, kind, eps, timer, t0):
    from . import kernels1d

    g, n = mesh.n_ghost, mesh.n
    gamma = float(getattr(physics, "gamma", 0.0))
    if mode != "linear-unlimited":
        bad = kernels1d.limit_moments(field.q, flags, kind, gamma, g, n, eps)
        if bad >= 0:
            raise AdmissibilityError("nonpositive sound speed squared", location=(bad - g,))
        if bc is not None:
            apply_boundary(field, bc, t, physics)
    t0 = timer.add("limit", t0)
    vals = np.empty((4, field.n_comp, field.q.shape[-1] - 2))
    bad = kernels1d.reconstruct(field.q, flags, mode == "linear-unlimited", kind, gamma, eps, vals)
    if bad >= 0:
        raise AdmissibilityError("nonpositive sound speed squared", location=(bad - g,))
    t0 = timer.add("reconstruct", t0)
    alpha = physics.max_wave_speed(field.avg[:, g:g + n], 0)
    dq = np.zeros_like(field.q)
    kernels1d.assemble(vals, kind, gamma, float(alpha), mesh.dx, g, n, dq)
    if not kernels1d.all_finite(dq):
        # non-finite point values show up in dq too; attribute them to their phase
        _check_finite(vals[0], "reconstruct")
        _check_finite(vals[3], "reconstruct")
        _check_finite(dq, "flux")
    timer.add("flux", t0)
    return dq


def compute_rhs_1d(field, physics, mask, mode, mesh, bc=None, t=0.0,
                   eps=hweno1d.EPS, timer=None):
    """Time derivative of (avg, mom) for all padded cells (ghosts zero).

    Phase A modifies the field's moments in place; if ``bc`` is given the
    ghosts are refreshed afterwards so they see the limited moments.
    """
    mode = normalize_mode(mode)
    timer = timer or PhaseTimer()
    t0 = time.perf_counter()
    g, n, dx = mesh.n_ghost, mesh.n, mesh.dx
    flags = _mask_flags(mask)
    if mode == "limit-all":
        flags = np.ones_like(flags)
    kind = _flux_kind_1d(physics)
    if kind is not None:
        return _compiled_rhs_1d(field, physics, flags, mode, mesh, bc, t, kind, eps, timer, t0)
    if mode != "linear-unlimited":
        limit_moments_1d(field, physics, flags, eps)
        if bc is not None:
            apply_boundary(field, bc, t, physics)
    t0 = timer.add("limit", t0)

    left, in_l, in_r, right = reconstruct_1d(field, physics, flags, mode, eps)
    _check_finite(left, "reconstruct")
    _check_finite(right, "reconstruct")
    t0 = timer.add("reconstruct", t0)

    alpha = physics.max_wave_speed(field.avg[:, g:g + n], 0)
    # reconstruction arrays index padded cell p at p - 1; faces p+1/2 for p = g-1 .. g+n-1
    um = right[:, g - 2:g + n - 1]
    up = left[:, g - 1:g + n]
    fhat = lax_friedrichs(um, up, alpha, physics.flux)
    cells = slice(g - 1, g - 1 + n)
    F = (physics.flux(left[:, cells]) + physics.flux(right[:, cells])) / 12.0 + (
        physics.flux(in_l[:, cells]) + physics.flux(in_r[:, cells])
    ) * (5.0 / 12.0)
    dq = np.zeros_like(field.q)
    dq[0, :, g:g + n] = -(fhat[:, 1:] - fhat[:, :-1]) / dx
    dq[1, :, g:g + n] = -(fhat[:, :-1] + fhat[:, 1:]) / (2.0 * dx) + F / dx
    _check_finite(dq, "flux")
    timer.add("flux", t0)
    return dq


# ------------------------------------------------------------------- 2D


def limit_moments_2d(field, physics, flags, eps=hweno1d.EPS):
    """Limit v along rows and w along columns of flagged interior cells."""
    mesh = field.mesh
    inner = np.zeros_like(flags)
    inner[mesh.interior] = flags[mesh.interior]
    ii, jj = np.nonzero(inner)
    if ii.size == 0:
        return 0
    avg, mx, my = field.avg, field.mom_x, field.mom_y
    u0 = avg[:, ii, jj]
    new_v = _limit_rows(physics, avg[:, ii - 1, jj], u0, avg[:, ii + 1, jj],
                        mx[:, ii - 1, jj], mx[:, ii + 1, jj], 0, eps)
    new_w = _limit_rows(physics, avg[:, ii, jj - 1], u0, avg[:, ii, jj + 1],
                        my[:, ii, jj - 1], my[:, ii, jj + 1], 1, eps)
    mx[:, ii, jj] = new_v
    my[:, ii, jj] = new_w
    return ii.size


def stencil_data_2d(field):
    """(15, n_comp, NX-2, NY-2) stencil data for padded cells 1..N-2."""
    avg, mx, my = field.avg, field.mom_x, field.mom_y
    NX, NY = avg.shape[1:]

    def at(arr, a, b):
        return arr[:, 1 + a:NX - 1 + a, 1 + b:NY - 1 + b]

    parts = [at(avg, *hweno2d.CELL_OFFSETS[k]) for k in range(1, 10)]
    parts += [at(mx, -1, 0), at(mx, 0, 0), at(mx, 1, 0)]
    parts += [at(my, 0, -1), at(my, 0, 0), at(my, 0, 1)]
    return np.stack(parts)


def stencil_data_at(field, ii, jj):
    """(15, n_comp, k) stencil data for padded cells (ii, jj)."""
    avg, mx, my = field.avg, field.mom_x, field.mom_y
    parts = [avg[:, ii + a, jj + b] for a, b in (hweno2d.CELL_OFFSETS[k] for k in range(1, 10))]
    parts += [mx[:, ii - 1, jj], mx[:, ii, jj], mx[:, ii + 1, jj]]
    parts += [my[:, ii, jj - 1], my[:, ii, jj], my[:, ii, jj + 1]]
    return np.stack(parts)


def _flux_kind(physics):
    if BACKEND != "numba":
        return None
    if isinstance(physics, Euler) and physics.ndim == 2:
        return 0
    if isinstance(physics, Burgers):
        return 1
    return None


def nonlinear_edges_2d(field, physics, ii, jj, eps=hweno2d.EPS):
    """HWENO values at the 8 edge points of padded cells (ii, jj): (8, n_comp, k).

    Systems reconstruct x-edge points in x-characteristic variables and
    y-edge points in y-characteristic variables, both taken at the centre
    average.
    """
    sub = stencil_data_at(field, ii, jj)
    if _is_scalar(physics):
        return hweno2d.hweno_values(sub, hweno2d.EDGE, eps)
    out = np.empty((8,) + sub.shape[1:])
    centre = sub[hweno2d.DATA_INDEX[("u", 5)]]
    for direction, targets in ((0, hweno2d.X_EDGE), (1, hweno2d.Y_EDGE)):
        L, R, _ = physics.eigensystem(centre, direction)
        proj = characteristic_project(sub, L)
        out[targets] = characteristic_unproject(hweno2d.hweno_values(proj, targets, eps), R)
    return out


def _hweno_cells_2d(flags, mode):
    """Padded indices of cells needing nonlinear edge values (padded 1..N-2)."""
    block = flags[1:-1, 1:-1]
    if mode == "linear-unlimited":
        block = np.ones_like(block)
    ii, jj = np.nonzero(block)
    return ii + 1, jj + 1


def reconstruct_2d(field, physics, flags, mode, eps=hweno2d.EPS):
    """Values at the 12 target points for padded cells 1..N-2: (12, n_comp, bx, by)."""
    values = hweno2d.linear_values(stencil_data_2d(field))
    ii, jj = _hweno_cells_2d(flags, mode)
    if ii.size:
        values[hweno2d.EDGE][:, :, ii - 1, jj - 1] = nonlinear_edges_2d(field, physics, ii, jj, eps)
    return values


def _wave_speeds_2d(field, physics, mesh, active):
    avg_in = field.avg[(slice(None),) + mesh.interior]
    if active is not None:
        avg_in = avg_in[:, active[mesh.interior]]
    return physics.max_wave_speed(avg_in, 0), physics.max_wave_speed(avg_in, 1)


def _compiled_rhs_2d(field, physics, flags, mode, mesh, kind, eps, timer, obstacle, active, t0):
    from . import kernels2d

    ii, jj = _hweno_cells_2d(flags, mode)
    override_map = np.full(field.avg.shape[1:], -1, dtype=np.int64)
    if ii.size:
        edges = np.ascontiguousarray(np.moveaxis(nonlinear_edges_2d(field, physics, ii, jj, eps), -1, 0))
        override_map[ii, jj] = np.arange(ii.size)
    else:
        edges = np.zeros((1, 8, field.n_comp))
    t0 = timer.add("reconstruct", t0)
    alpha, beta = _wave_speeds_2d(field, physics, mesh, active)
    wall_i, wall_j = (-1, -1) if obstacle is None else obstacle.wall_faces
    inner_dq = np.empty((3, field.n_comp, mesh.nx, mesh.ny))
    kernels2d.fused_rhs(field.q, hweno2d.tables().linear_rows, override_map, edges, kind,
                        float(getattr(physics, "gamma", 0.0)), float(alpha), float(beta),
                        mesh.dx, mesh.dy, S3, wall_i, wall_j, inner_dq)
    dq = np.zeros_like(field.q)
    dq[(slice(None), slice(None)) + mesh.interior] = inner_dq
    if active is not None:
        dq[:, :, ~active] = 0.0
    _check_finite(dq, "flux")
    timer.add("flux", t0)
    return dq


def compute_rhs_2d(field, physics, mask, mode, mesh, bc=None, t=0.0,
                   eps=hweno2d.EPS, timer=None, obstacle=None, active=None):
    """Time derivative of (avg, mom_x, mom_y) for all padded cells (ghosts zero)."""
    mode = normalize_mode(mode)
    timer = timer or PhaseTimer()
    t0 = time.perf_counter()
    nx, ny, dx, dy = mesh.nx, mesh.ny, mesh.dx, mesh.dy
    flags = _mask_flags(mask)
    if mode == "limit-all":
        flags = np.ones_like(flags)
        if active is not None:
            flags &= active
    if mode != "linear-unlimited":
        limit_moments_2d(field, physics, flags, eps)
        if bc is not None:
            apply_boundary(field, bc, t, physics)
    t0 = timer.add("limit", t0)

    kind = _flux_kind(physics)
    if kind is not None and (obstacle is None or hasattr(obstacle, "wall_faces")) and mesh.n_ghost == 2:
        return _compiled_rhs_2d(field, physics, flags, mode, mesh, kind, eps, timer, obstacle,
                                active, t0)

    values = reconstruct_2d(field, physics, flags, mode, eps)
    t0 = timer.add("reconstruct", t0)
    alpha, beta = _wave_speeds_2d(field, physics, mesh, active)

    # block index b = padded index - 1; interior cells are blocks 1..n
    um_x = values[2:4, :, 0:nx + 1, 1:ny + 1]
    up_x = values[0:2, :, 1:nx + 2, 1:ny + 1]
    um_y = values[6:8, :, 1:nx + 1, 0:ny + 1]
    up_y = values[4:6, :, 1:nx + 1, 1:ny + 2]
    if obstacle is not None:
        obstacle.override_wall_states(um_x, up_x, um_y, up_y, mesh)

    dq = np.zeros_like(field.q)
    it = (slice(None),) + mesh.interior

    def fx(u):
        return physics.flux(u, 0)

    def gy(u):
        return physics.flux(u, 1)

    fh = lax_friedrichs(np.moveaxis(um_x, 0, 1), np.moveaxis(up_x, 0, 1), alpha, fx)
    gh = lax_friedrichs(np.moveaxis(um_y, 0, 1), np.moveaxis(up_y, 0, 1), beta, gy)
    # fh: (n_comp, 2 gauss, nx+1, ny); gh: (n_comp, 2 gauss, nx, ny+1)
    inner = np.moveaxis(values[8:12, :, 1:nx + 1, 1:ny + 1], 0, 1)
    vol_f = 0.25 * np.sum(fx(inner), axis=1)
    vol_g = 0.25 * np.sum(gy(inner), axis=1)

    w = 0.5
    node = np.array([-S3, S3]).reshape(1, 2, 1, 1)
    dfx = fh[:, :, 1:, :] - fh[:, :, :-1, :]
    sfx = fh[:, :, 1:, :] + fh[:, :, :-1, :]
    dgy = gh[:, :, :, 1:] - gh[:, :, :, :-1]
    sgy = gh[:, :, :, 1:] + gh[:, :, :, :-1]

    dq[(0,) + it] = -w * np.sum(dfx, axis=1) / dx - w * np.sum(dgy, axis=1) / dy
    dq[(1,) + it] = (
        -w * np.sum(sfx, axis=1) / (2.0 * dx) + vol_f / dx - w * np.sum(node * dgy, axis=1) / dy
    )
    dq[(2,) + it] = (
        -w * np.sum(node * dfx, axis=1) / dx - w * np.sum(sgy, axis=1) / (2.0 * dy) + vol_g / dy
    )
    if active is not None:
        dq[:, :, ~active] = 0.0
    _check_finite(dq, "flux")
    timer.add("flux", t0)
    return dq
