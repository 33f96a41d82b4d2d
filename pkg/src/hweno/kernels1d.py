"""Compiled 1D stage kernels: moment limiting, point reconstruction, flux
assembly and the KXRCF ratio test.

They follow the numpy reference path in ``rhs``/``indicator`` operation by
operation; the numpy version pays a fixed per-call cost that hides the
difference between linear and nonlinear work on 1D grids of a few hundred
cells, which is what the hybrid scheme is meant to save.
"""

import numpy as np
from numba import njit

FLUX_EULER = 0
FLUX_BURGERS = 1
FLUX_BUCKLEY = 2

EPS = 1e-6
SQRT5 = np.sqrt(5.0)
G_MOM = (11.0 / 38.0, 8.0 / 19.0, 11.0 / 38.0)
G_INT = (25.0 / 189.0, 22.0 / 63.0, 14.0 / 27.0)
P0R = (13.0 / 108.0, 7.0 / 12.0, 8.0 / 27.0, 25.0 / 54.0, 241.0 / 54.0, -28.0 / 27.0)
_A = 101.0 / 5400.0 * SQRT5
_B = 841.0 / 13500.0 * SQRT5
_C = 10289.0 / 6750.0 * SQRT5
PIL = (-(_A + 1.0 / 24.0), 13.0 / 12.0, _A - 1.0 / 24.0, -(0.15 + _B), -_C, 0.15 - _B)
PIR = (_A - 1.0 / 24.0, 13.0 / 12.0, -(_A + 1.0 / 24.0), _B - 0.15, _C, 0.15 + _B)


@njit(cache=True, inline="always")
def _dot(c, um, u0, up, vm, v0, vp):
    return c[0] * um + c[1] * u0 + c[2] * up + c[3] * vm + c[4] * v0 + c[5] * vp


@njit(cache=True, inline="always")
def _combine(g, b1, b2, b3, p1, p2, p3, eps):
    r1 = g[0] / (b1 + eps) ** 2
    r2 = g[1] / (b2 + eps) ** 2
    r3 = g[2] / (b3 + eps) ** 2
    total = r1 + r2 + r3
    return r1 / total * p1 + r2 / total * p2 + r3 / total * p3


@njit(cache=True)
def limit_one(um, u0, up, vm, vp, eps):
    q1 = (u0 - um) / 6.0 - vm
    q2 = (up - um) / 24.0
    q3 = (up - u0) / 6.0 - vp
    b1 = 4.0 * (um - u0 + 6.0 * vm) ** 2 + 13.0 / 3.0 * (um - u0 + 12.0 * vm) ** 2
    b2 = 0.25 * (um - up) ** 2 + 13.0 / 12.0 * (um - 2.0 * u0 + up) ** 2
    b3 = 4.0 * (u0 - up + 6.0 * vp) ** 2 + 13.0 / 3.0 * (u0 - up + 12.0 * vp) ** 2
    return _combine(G_MOM, b1, b2, b3, q1, q2, q3, eps)


@njit(cache=True)
def hweno_right(um, u0, up, vm, v0, vp, eps):
    p1 = 0.75 * um + 0.25 * u0 + 3.5 * vm + 11.5 * v0
    p2 = 2.0 / 33.0 * um + 5.0 / 6.0 * u0 + 7.0 / 66.0 * up + 60.0 / 11.0 * v0
    p3 = 0.5 * u0 + 0.5 * up + 2.0 * v0 - 2.0 * vp
    b1 = ((um - u0 + 6.0 * vm + 54.0 * v0) ** 2 / 16.0
          + 13.0 / 48.0 * (15.0 * um - 15.0 * u0 + 66.0 * vm + 114.0 * v0) ** 2
          + 3905.0 / 16.0 * (um - u0 + 6.0 * vm + 6.0 * v0) ** 2)
    b2 = ((um - up - 240.0 * v0) ** 2 / 484.0
          + 13.0 / 12.0 * (um - 2.0 * u0 + up) ** 2
          + 355.0 / 44.0 * (um - up + 24.0 * v0) ** 2)
    b3 = ((u0 - up + 54.0 * v0 + 6.0 * vp) ** 2 / 16.0
          + 13.0 / 48.0 * (15.0 * u0 - 15.0 * up + 114.0 * v0 + 66.0 * vp) ** 2
          + 3905.0 / 16.0 * (u0 - up + 6.0 * v0 + 6.0 * vp) ** 2)
    return _combine(G_INT, b1, b2, b3, p1, p2, p3, eps)


@njit(cache=True)
def _eigen(gamma, u, L, R):
    """Left/right eigenvectors of the 1D Euler Jacobian at ``u``; False if c^2 <= 0."""
    rho = u[0]
    un = u[1] / rho
    q2 = un * un
    p = (gamma - 1.0) * (u[2] - 0.5 * rho * q2)
    c2 = gamma * p / rho
    if not c2 > 0.0:
        return False
    c = np.sqrt(c2)
    H = (u[2] + p) / rho
    b1 = (gamma - 1.0) / c2
    b2 = 0.5 * q2 * b1
    R[0, 0] = 1.0
    R[0, 1] = 1.0
    R[0, 2] = 1.0
    R[1, 0] = un - c
    R[1, 1] = un
    R[1, 2] = un + c
    R[2, 0] = H - un * c
    R[2, 1] = 0.5 * q2
    R[2, 2] = H + un * c
    L[0, 0] = 0.5 * (b2 + un / c)
    L[0, 1] = -0.5 * (b1 * un + 1.0 / c)
    L[0, 2] = 0.5 * b1
    L[1, 0] = 1.0 - b2
    L[1, 1] = b1 * un
    L[1, 2] = -b1
    L[2, 0] = 0.5 * (b2 - un / c)
    L[2, 1] = -0.5 * (b1 * un - 1.0 / c)
    L[2, 2] = 0.5 * b1
    return True


@njit(cache=True)
def _project(M, q, k, p, out):
    """out[a] = sum_b M[a, b] * q[k, b, p]."""
    n = out.shape[0]
    for a in range(n):
        s = 0.0
        for b in range(n):
            s += M[a, b] * q[k, b, p]
        out[a] = s


@njit(cache=True)
def limit_moments(q, flags, kind, gamma, g, n, eps):
    """HWENO moment limiter on flagged interior cells, reading a snapshot.

    Returns -1 on success or the padded index whose eigensystem failed.
    """
    nc = q.shape[1]
    avg = q[0]
    mom = q[1].copy()
    L = np.eye(nc)
    R = np.eye(nc)
    st = np.empty((5, nc))
    cu = np.empty(nc)
    for p in range(g, g + n):
        if not flags[p]:
            continue
        if kind == FLUX_EULER:
            if not _eigen(gamma, avg[:, p], L, R):
                return p
            _project(L, q, 0, p - 1, st[0])
            _project(L, q, 0, p, st[1])
            _project(L, q, 0, p + 1, st[2])
            for a in range(nc):
                s3 = 0.0
                s4 = 0.0
                for b in range(nc):
                    s3 += L[a, b] * mom[b, p - 1]
                    s4 += L[a, b] * mom[b, p + 1]
                st[3, a] = s3
                st[4, a] = s4
            for a in range(nc):
                cu[a] = limit_one(st[0, a], st[1, a], st[2, a], st[3, a], st[4, a], eps)
            for a in range(nc):
                s = 0.0
                for b in range(nc):
                    s += R[a, b] * cu[b]
                q[1, a, p] = s
        else:
            q[1, 0, p] = limit_one(avg[0, p - 1], avg[0, p], avg[0, p + 1],
                                   mom[0, p - 1], mom[0, p + 1], eps)
    return -1


@njit(cache=True)
def reconstruct(q, flags, all_hweno, kind, gamma, eps, out):
    """Point values (left, inner_l, inner_r, right) for padded cells 1..NP-2.

    ``out`` has shape (4, nc, NP - 2). Returns -1 or the failing padded index.
    """
    nc = q.shape[1]
    NP = q.shape[2]
    L = np.eye(nc)
    R = np.eye(nc)
    st = np.empty((6, nc))
    hl = np.empty(nc)
    hr = np.empty(nc)
    for p in range(1, NP - 1):
        c = p - 1
        for a in range(nc):
            um = q[0, a, p - 1]
            u0 = q[0, a, p]
            up = q[0, a, p + 1]
            vm = q[1, a, p - 1]
            v0 = q[1, a, p]
            vp = q[1, a, p + 1]
            out[0, a, c] = _dot(P0R, up, u0, um, -vp, -v0, -vm)
            out[1, a, c] = _dot(PIL, um, u0, up, vm, v0, vp)
            out[2, a, c] = _dot(PIR, um, u0, up, vm, v0, vp)
            out[3, a, c] = _dot(P0R, um, u0, up, vm, v0, vp)
        if not (all_hweno or flags[p - 1] or flags[p] or flags[p + 1]):
            continue
        if kind == FLUX_EULER:
            if not _eigen(gamma, q[0, :, p], L, R):
                return p
            for k in range(6):
                _project(L, q, k // 3, p - 1 + k % 3, st[k])
        else:
            for k in range(6):
                st[k, 0] = q[k // 3, 0, p - 1 + k % 3]
        for a in range(nc):
            um, u0, up = st[0, a], st[1, a], st[2, a]
            vm, v0, vp = st[3, a], st[4, a], st[5, a]
            hr[a] = hweno_right(um, u0, up, vm, v0, vp, eps)
            hl[a] = hweno_right(up, u0, um, -vp, -v0, -vm, eps)
        for a in range(nc):
            sl = 0.0
            sr = 0.0
            for b in range(nc):
                sl += R[a, b] * hl[b]
                sr += R[a, b] * hr[b]
            out[0, a, c] = sl
            out[3, a, c] = sr
    return -1


@njit(cache=True, inline="always")
def _flux(kind, gamma, u, f):
    if kind == FLUX_BURGERS:
        f[0] = 0.5 * u[0] * u[0]
    elif kind == FLUX_BUCKLEY:
        u2 = u[0] * u[0]
        f[0] = 4.0 * u2 / (4.0 * u2 + (1.0 - u[0]) ** 2)
    else:
        rho = u[0]
        vel = u[1] / rho
        p = (gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / rho)
        f[0] = u[0] * vel
        f[1] = u[1] * vel + p
        f[2] = u[2] * vel + p * vel


@njit(cache=True)
def assemble(vals, kind, gamma, alpha, dx, g, n, dq):
    """Lax-Friedrichs faces and the four-point quadrature into dq (2, nc, NP)."""
    nc = vals.shape[1]
    ul = np.empty(nc)
    ur = np.empty(nc)
    fl = np.empty(nc)
    fr = np.empty(nc)
    fa = np.empty(nc)
    fb = np.empty(nc)
    fhat = np.empty((nc, n + 1))
    # face between padded cells p and p+1, p = g-1 .. g+n-1; vals index is p - 1
    for k in range(n + 1):
        p = g - 1 + k
        for a in range(nc):
            ul[a] = vals[3, a, p - 1]
            ur[a] = vals[0, a, p]
        _flux(kind, gamma, ul, fl)
        _flux(kind, gamma, ur, fr)
        for a in range(nc):
            fhat[a, k] = 0.5 * (fl[a] + fr[a]) - 0.5 * alpha * (ur[a] - ul[a])
    for i in range(n):
        p = g + i
        c = p - 1
        for a in range(nc):
            ul[a] = vals[0, a, c]
            ur[a] = vals[3, a, c]
        _flux(kind, gamma, ul, fl)
        _flux(kind, gamma, ur, fr)
        for a in range(nc):
            ul[a] = vals[1, a, c]
            ur[a] = vals[2, a, c]
        _flux(kind, gamma, ul, fa)
        _flux(kind, gamma, ur, fb)
        for a in range(nc):
            F = (fl[a] + fr[a]) / 12.0 + (fa[a] + fb[a]) * (5.0 / 12.0)
            dq[0, a, p] = -(fhat[a, i + 1] - fhat[a, i]) / dx
            dq[1, a, p] = -(fhat[a, i] + fhat[a, i + 1]) / (2.0 * dx) + F / dx


@njit(cache=True)
def kxrcf_ratio(avg, mom, vel, h_pow, floor, nodes, flags):
    """OR the KXRCF test of one indicator variable into ``flags`` (padded, 1D)."""
    NP = avg.shape[0]
    for p in range(2, NP - 2):
        vc = vel[p]
        in_l = 0.5 * (vel[p - 1] + vc) > 0.0
        in_r = 0.5 * (vc + vel[p + 1]) < 0.0
        if not (in_l or in_r):
            continue
        c0 = avg[p]
        c1 = 12.0 * mom[p]
        c2 = 0.5 * (avg[p - 1] - 2.0 * c0 + avg[p + 1])
        norm = 0.0
        for s in nodes:
            v = abs(c0 + c1 * s + c2 * (s * s - 1.0 / 12.0))
            if v > norm:
                norm = v
        num = 0.0
        count = 0.0
        if in_l:
            # left value of cell p against right value of cell p-1
            d0 = avg[p - 1]
            d1 = 12.0 * mom[p - 1]
            d2 = 0.5 * (avg[p - 2] - 2.0 * d0 + c0)
            right_m = d0 + d1 * 0.5 + d2 * (0.25 - 1.0 / 12.0)
            left_c = c0 - c1 * 0.5 + c2 * (0.25 - 1.0 / 12.0)
            num += abs(left_c - right_m)
            count += 1.0
        if in_r:
            e0 = avg[p + 1]
            e1 = 12.0 * mom[p + 1]
            e2 = 0.5 * (c0 - 2.0 * e0 + avg[p + 2])
            left_p = e0 - e1 * 0.5 + e2 * (0.25 - 1.0 / 12.0)
            right_c = c0 + c1 * 0.5 + c2 * (0.25 - 1.0 / 12.0)
            num += abs(right_c - left_p)
            count += 1.0
        den = h_pow * count * norm
        if den >= floor * (1.0 + abs(c0)) and num > den:
            flags[p] = True


BC_PERIODIC = 0
BC_COPY = 1
BC_REFLECTIVE = 2
BC_DIRICHLET = 3


@njit(cache=True)
def fill_ghosts(q, codes, states, normal, g, n):
    """1D ghost filling; ``codes``/``states`` hold the left and right sides."""
    nm_, nc = q.shape[0], q.shape[1]
    for side in range(2):
        code = codes[side]
        for k in range(g):
            if side == 0:
                gp = k
                if code == BC_PERIODIC:
                    src = k + n
                elif code == BC_REFLECTIVE:
                    src = 2 * g - 1 - k
                else:
                    src = g
            else:
                gp = n + g + k
                if code == BC_PERIODIC:
                    src = gp - n
                elif code == BC_REFLECTIVE:
                    src = 2 * (n + g) - 1 - gp
                else:
                    src = n + g - 1
            if code == BC_DIRICHLET:
                for a in range(nc):
                    q[0, a, gp] = states[side, a]
                    for m in range(1, nm_):
                        q[m, a, gp] = 0.0
                continue
            for m in range(nm_):
                for a in range(nc):
                    q[m, a, gp] = q[m, a, src]
            if code == BC_REFLECTIVE:
                for a in range(nc):
                    q[1, a, gp] = -q[1, a, gp]
                if normal >= 0:
                    for m in range(nm_):
                        q[m, normal, gp] = -q[m, normal, gp]


@njit(cache=True)
def finish_flags(flags, codes, g, n):
    """Clear non-interior flags, fill ghost flags per side kind; return the count."""
    count = 0
    for p in range(g, g + n):
        if flags[p]:
            count += 1
    for side in range(2):
        code = codes[side]
        for k in range(g):
            if side == 0:
                gp = k
                src = k + n if code == BC_PERIODIC else (2 * g - 1 - k if code == BC_REFLECTIVE else g)
            else:
                gp = n + g + k
                if code == BC_PERIODIC:
                    src = gp - n
                elif code == BC_REFLECTIVE:
                    src = 2 * (n + g) - 1 - gp
                else:
                    src = n + g - 1
            flags[gp] = flags[src]
    return count


@njit(cache=True)
def euler_max_speed(avg, gamma):
    """max |u| + c over the columns of ``avg``; -1 if any state is inadmissible."""
    best = 0.0
    for i in range(avg.shape[1]):
        rho = avg[0, i]
        m = avg[1, i]
        E = avg[2, i]
        if not (np.isfinite(rho) and np.isfinite(m) and np.isfinite(E)):
            return -1.0
        if not rho > 0.0:
            return -1.0
        p = (gamma - 1.0) * (E - 0.5 * m * m / rho)
        if not p > 0.0:
            return -1.0
        s = abs(m / rho) + np.sqrt(gamma * p / rho)
        if s > best:
            best = s
    return best


@njit(cache=True)
def all_finite(a):
    for x in a.ravel():
        if not np.isfinite(x):
            return False
    return True
