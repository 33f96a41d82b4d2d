"""Compiled 2D stage kernel: linear reconstruction at the 12 target points
fused with the Lax-Friedrichs/quadrature assembly, one grid row at a time.

It reproduces the vectorized numpy path in ``rhs`` (kept as the reference
implementation and compared in the tests) and is used for Euler and Burgers.
Streaming rows avoids materializing the (12, n_comp, NX, NY) point-value
array, which dominated run time on large grids.
"""

import numpy as np
from numba import njit

FLUX_EULER = 0
FLUX_BURGERS = 1


@njit(cache=True, inline="always")
def _flux(kind, gamma, u, direction, f):
    if kind == FLUX_BURGERS:
        f[0] = 0.5 * u[0] * u[0]
        return
    rho = u[0]
    vx = u[1] / rho
    vy = u[2] / rho
    p = (gamma - 1.0) * (u[3] - 0.5 * rho * (vx * vx + vy * vy))
    vn = vx if direction == 0 else vy
    f[0] = u[0] * vn
    f[1] = u[1] * vn
    f[2] = u[2] * vn
    f[3] = (u[3] + p) * vn
    f[1 + direction] += p


@njit(cache=True)
def _row_values(q, c, row, rows, out):
    """Linear point values of padded row ``row`` for columns 1..NY-2 into out (12, NY-2)."""
    NY = q.shape[3]
    m = NY - 2
    ng = rows.shape[0]
    for g in range(ng):
        for j in range(m):
            out[g, j] = 0.0
        k = 0
        for b in range(-1, 2):
            for a in range(-1, 2):
                w = rows[g, k]
                for j in range(m):
                    out[g, j] += w * q[0, c, row + a, j + 1 + b]
                k += 1
        for a in range(-1, 2):
            w = rows[g, 10 + a]
            for j in range(m):
                out[g, j] += w * q[1, c, row + a, j + 1]
        for b in range(-1, 2):
            w = rows[g, 13 + b]
            for j in range(m):
                out[g, j] += w * q[2, c, row, j + 1 + b]


@njit(cache=True)
def fused_rhs(q, rows, override_map, override_vals, kind, gamma, alpha, beta, dx, dy, s3,
              wall_i, wall_j, dq):
    """Linear reconstruction, edge overrides and flux assembly in one row sweep.

    ``q`` is the padded moment array (3, nc, NX, NY); ``override_map`` holds,
    per padded cell, -1 or an index into ``override_vals`` (k, 8, nc) with
    nonlinear edge values.  ``wall_i``/``wall_j`` (interior indices, -1 for
    none) describe a solid block x >= wall_i, y < wall_j whose wall faces take
    mirror states.  Writes interior derivatives into dq (3, nc, nx, ny).
    """
    nc = q.shape[1]
    NX = q.shape[2]
    NY = q.shape[3]
    nx = NX - 4
    ny = NY - 4
    m = NY - 2
    prev = np.empty((nc, 12, m))
    cur = np.empty((nc, 12, m))
    ul = np.empty(nc)
    ur = np.empty(nc)
    fl = np.empty(nc)
    fr = np.empty(nc)
    fh = np.empty((nc, 2))
    for i in range(nx):
        for j in range(ny):
            for c in range(nc):
                dq[0, c, i, j] = 0.0
                dq[1, c, i, j] = 0.0
                dq[2, c, i, j] = 0.0
    for b in range(nx + 2):
        prow = b + 1
        for c in range(nc):
            _row_values(q, c, prow, rows, cur[c])
        for jb in range(m):
            idx = override_map[prow, jb + 1]
            if idx >= 0:
                for g in range(8):
                    for c in range(nc):
                        cur[c, g, jb] = override_vals[idx, g, c]
        if b >= 1:
            # x-face between interior cells b-2 and b-1
            fi = b - 1
            for j in range(ny):
                for k in range(2):
                    for c in range(nc):
                        ul[c] = prev[c, 2 + k, j + 1]
                        ur[c] = cur[c, k, j + 1]
                    if fi == wall_i and j < wall_j:
                        for c in range(nc):
                            ur[c] = ul[c]
                        ur[1] = -ul[1]
                    _flux(kind, gamma, ul, 0, fl)
                    _flux(kind, gamma, ur, 0, fr)
                    for c in range(nc):
                        fh[c, k] = 0.5 * (fl[c] + fr[c]) - 0.5 * alpha * (ur[c] - ul[c])
                for c in range(nc):
                    s = fh[c, 0] + fh[c, 1]
                    d = -s3 * fh[c, 0] + s3 * fh[c, 1]
                    if fi >= 1:
                        dq[0, c, fi - 1, j] -= 0.5 * s / dx
                        dq[1, c, fi - 1, j] -= 0.5 * s / (2.0 * dx)
                        dq[2, c, fi - 1, j] -= 0.5 * d / dx
                    if fi < nx:
                        dq[0, c, fi, j] += 0.5 * s / dx
                        dq[1, c, fi, j] -= 0.5 * s / (2.0 * dx)
                        dq[2, c, fi, j] += 0.5 * d / dx
        if 1 <= b <= nx:
            i = b - 1
            for fj in range(ny + 1):
                for k in range(2):
                    for c in range(nc):
                        ul[c] = cur[c, 6 + k, fj]
                        ur[c] = cur[c, 4 + k, fj + 1]
                    if fj == wall_j and wall_i >= 0 and i >= wall_i:
                        for c in range(nc):
                            ul[c] = ur[c]
                        ul[2] = -ur[2]
                    _flux(kind, gamma, ul, 1, fl)
                    _flux(kind, gamma, ur, 1, fr)
                    for c in range(nc):
                        fh[c, k] = 0.5 * (fl[c] + fr[c]) - 0.5 * beta * (ur[c] - ul[c])
                for c in range(nc):
                    s = fh[c, 0] + fh[c, 1]
                    d = -s3 * fh[c, 0] + s3 * fh[c, 1]
                    if fj >= 1:
                        dq[0, c, i, fj - 1] -= 0.5 * s / dy
                        dq[1, c, i, fj - 1] -= 0.5 * d / dy
                        dq[2, c, i, fj - 1] -= 0.5 * s / (2.0 * dy)
                    if fj < ny:
                        dq[0, c, i, fj] += 0.5 * s / dy
                        dq[1, c, i, fj] += 0.5 * d / dy
                        dq[2, c, i, fj] -= 0.5 * s / (2.0 * dy)
            for j in range(ny):
                for g in range(8, 12):
                    for c in range(nc):
                        ul[c] = cur[c, g, j + 1]
                    _flux(kind, gamma, ul, 0, fl)
                    _flux(kind, gamma, ul, 1, fr)
                    for c in range(nc):
                        dq[1, c, i, j] += 0.25 * fl[c] / dx
                        dq[2, c, i, j] += 0.25 * fr[c] / dy
        tmp = prev
        prev = cur
        cur = tmp
