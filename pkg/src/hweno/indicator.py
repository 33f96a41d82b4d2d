"""KXRCF troubled-cell detection.

The indicator compares the jump of a local quadratic ``u_h`` across the
inflow faces of a cell with ``h**1.5 * |inflow| * max|u_h|``. ``u_h`` is
the quadratic part of the cubic Hermite fit to the three neighbouring
averages and the cell's own first moment.
"""

from dataclasses import dataclass

import numpy as np

from .field import _fast_codes_1d, ghost_and_source

KXRCF_DEGREE = 2
DENOM_FLOOR = 1e-13
SQRT5_10 = np.sqrt(5.0) / 10.0
_NODES_1D = np.array([-0.5, -SQRT5_10, SQRT5_10, 0.5])
SQRT3_6 = np.sqrt(3.0) / 6.0


@dataclass
class TroubledMask:
    flags: np.ndarray  # padded boolean array
    count: int
    n_cells: int

    @property
    def fraction(self):
        return self.count / self.n_cells if self.n_cells else 0.0

    @classmethod
    def constant(cls, ndim, mesh, value):
        """Uniform mask: every cell flagged (``value``) or none."""
        n_cells = mesh.n if ndim == 1 else mesh.nx * mesh.ny
        flags = np.full(mesh.padded_shape, bool(value))
        return cls(flags, n_cells if value else 0, n_cells)


def build_uh(um, u0, up, v0):
    """Coefficients on {1, xi, xi^2 - 1/12, xi^3 - 3/20 xi}.

    Only the first three enter ``u_h``; the cubic one is returned for
    completeness.
    """
    c0 = np.asarray(u0, dtype=float) + 0.0
    c1 = 12.0 * np.asarray(v0, dtype=float)
    c2 = 0.5 * (um - 2.0 * u0 + up)
    c3 = -5.0 / 11.0 * (um + 24.0 * v0 - up)
    return c0, c1, c2, c3


def eval_uh(coeffs, xi):
    c0, c1, c2 = coeffs[:3]
    return c0 + c1 * xi + c2 * (xi * xi - 1.0 / 12.0)


def _directional_ratio_flags(avg, mom, vel, axis, h, norm_nodes):
    """KXRCF test along ``axis`` for every cell not touching the array edge.

    ``avg``, ``mom`` and ``vel`` are padded arrays of one indicator
    variable. Returns a boolean array of the same shape (edge cells False).
    """
    def sl(lo, hi):
        s = [slice(None)] * avg.ndim
        s[axis] = slice(lo, hi if hi != 0 else None)
        return tuple(s)

    # u_h for cells 1 .. n-2 along axis
    coeffs = build_uh(avg[sl(0, -2)], avg[sl(1, -1)], avg[sl(2, 0)], mom[sl(1, -1)])
    right = eval_uh(coeffs, 0.5)
    left = eval_uh(coeffs, -0.5)
    norm = np.max(np.abs([eval_uh(coeffs, s) for s in norm_nodes]), axis=0)

    # for cells 2 .. n-3 (centre index c = 1 .. m-2 within the coeff arrays)
    v_c = vel[sl(2, -2)]
    face_l = 0.5 * (vel[sl(1, -3)] + v_c)
    face_r = 0.5 * (v_c + vel[sl(3, -1)])
    m = right.shape[axis]

    def csl(lo, hi):
        s = [slice(None)] * avg.ndim
        s[axis] = slice(lo, hi)
        return tuple(s)

    jump_l = np.abs(left[csl(1, m - 1)] - right[csl(0, m - 2)])
    jump_r = np.abs(right[csl(1, m - 1)] - left[csl(2, m)])
    in_l = face_l > 0.0
    in_r = face_r < 0.0
    num = np.where(in_l, jump_l, 0.0) + np.where(in_r, jump_r, 0.0)
    count = in_l.astype(float) + in_r.astype(float)
    den = h ** ((KXRCF_DEGREE + 1) / 2.0) * count * norm[csl(1, m - 1)]
    u_c = avg[sl(2, -2)]
    ok = (count > 0) & (den >= DENOM_FLOOR * (1.0 + np.abs(u_c)))
    flagged = ok & (num > den)
    out = np.zeros(avg.shape, dtype=bool)
    out[sl(2, -2)] = flagged
    return out


def fill_ghost_flags(flags, bc, mesh):
    """Ghost flags follow the side's kind: wrap, mirror, or nearest copy."""
    sides = [("left", 0, "lo"), ("right", 0, "hi")]
    if flags.ndim == 2:
        sides += [("bottom", 1, "lo"), ("top", 1, "hi")]
    for name, axis, lohi in sides:
        side = getattr(bc, name) if bc is not None else None
        kind = side.kind if side is not None else "outflow"
        n = mesh.shape[axis]
        ghosts, src = ghost_and_source(n, mesh.n_ghost, lohi, kind)
        idx = [slice(None)] * flags.ndim
        sidx = list(idx)
        idx[axis] = ghosts
        sidx[axis] = src
        flags[tuple(idx)] = flags[tuple(sidx)]
    return flags


def kxrcf_flag_1d(field, physics, mesh, bc=None, active=None):
    from . import rhs

    avg, mom = field.avg, field.mom_x
    h = 0.5 * mesh.dx
    nodes = (-0.5, -SQRT5_10, SQRT5_10, 0.5)
    vel = physics.indicator_velocity(avg, 0)
    flags = np.zeros(avg.shape[1:], dtype=bool)
    fast = None
    if rhs.BACKEND == "numba" and active is None:
        fast = _fast_codes_1d(bc, field.n_comp) if bc is not None else None
    if fast is not None:
        from .kernels1d import finish_flags, kxrcf_ratio

        h_pow = h ** ((KXRCF_DEGREE + 1) / 2.0)
        vel = np.ascontiguousarray(vel, dtype=float)
        for m in physics.indicator_vars:
            kxrcf_ratio(avg[m], mom[m], vel, h_pow, DENOM_FLOOR, _NODES_1D, flags)
        count = finish_flags(flags, fast[0], mesh.n_ghost, mesh.n)
        return TroubledMask(flags, int(count), mesh.n)
    else:
        for m in physics.indicator_vars:
            flags |= _directional_ratio_flags(avg[m], mom[m], vel, 0, h, nodes)
    return _finish(flags, mesh, bc, active)


def spread_flags(flags, interior):
    """Flag the four edge neighbours of every flagged interior cell."""
    f = np.zeros_like(flags)
    f[interior] = flags[interior]
    out = f.copy()
    out[1:, :] |= f[:-1, :]
    out[:-1, :] |= f[1:, :]
    out[:, 1:] |= f[:, :-1]
    out[:, :-1] |= f[:, 1:]
    res = np.zeros_like(flags)
    res[interior] = out[interior]
    return res


def kxrcf_flag_2d(field, physics, mesh, bc=None, active=None, spread=True):
    avg = field.avg
    h = 0.5 * np.hypot(mesh.dx, mesh.dy)
    nodes = (-0.5, -SQRT3_6, SQRT3_6, 0.5)
    vx = physics.indicator_velocity(avg, 0)
    vy = physics.indicator_velocity(avg, 1)
    flags = np.zeros(avg.shape[1:], dtype=bool)
    for m in physics.indicator_vars:
        flags |= _directional_ratio_flags(avg[m], field.mom_x[m], vx, 0, h, nodes)
        flags |= _directional_ratio_flags(avg[m], field.mom_y[m], vy, 1, h, nodes)
    interior = mesh.interior
    keep = np.zeros_like(flags)
    keep[interior] = True
    if active is not None:
        keep &= active
    flags &= keep
    if spread:
        flags = spread_flags(flags, interior)
    return _finish(flags, mesh, bc, active)


def _finish(flags, mesh, bc, active):
    interior = mesh.interior
    keep = np.zeros_like(flags)
    keep[interior] = True
    if active is not None:
        keep &= active
    flags &= keep
    n_cells = int(np.count_nonzero(keep))
    count = int(np.count_nonzero(flags))
    fill_ghost_flags(flags, bc, mesh)
    return TroubledMask(flags, count, n_cells)
