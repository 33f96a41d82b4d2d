"""One-dimensional Hermite WENO kernels on the three-cell stencil.

Every function is elementwise over numpy arrays: the six stencil inputs
(averages and first moments of cells i-1, i, i+1) may have any common
broadcast shape. Systems are handled by the caller, which passes one
characteristic field (or one component) at a time.
"""

import numpy as np

EPS = 1e-6
SQRT5 = np.sqrt(5.0)

# linear weights
GAMMA_MOMENT = (11.0 / 38.0, 8.0 / 19.0, 11.0 / 38.0)
GAMMA_INTERFACE = (25.0 / 189.0, 22.0 / 63.0, 14.0 / 27.0)

# right-interface value of the quintic through all six moments
P0_RIGHT = (13.0 / 108.0, 7.0 / 12.0, 8.0 / 27.0, 25.0 / 54.0, 241.0 / 54.0, -28.0 / 27.0)

# interior Gauss-Lobatto values at x_i -/+ sqrt(5)/10 dx
_A = 101.0 / 5400.0 * SQRT5
_B = 841.0 / 13500.0 * SQRT5
_C = 10289.0 / 6750.0 * SQRT5
P0_INNER_LEFT = (-(_A + 1.0 / 24.0), 13.0 / 12.0, _A - 1.0 / 24.0, -(0.15 + _B), -_C, 0.15 - _B)
P0_INNER_RIGHT = (_A - 1.0 / 24.0, 13.0 / 12.0, -(_A + 1.0 / 24.0), _B - 0.15, _C, 0.15 + _B)


def nonlinear_weights(gammas, betas, eps=EPS):
    """Normalised ``gamma / (beta + eps)**2``."""
    raw = [g / (b + eps) ** 2 for g, b in zip(gammas, betas)]
    total = sum(raw)
    return [r / total for r in raw]


def _dot(coef, um, u0, up, vm, v0, vp):
    a, b, c, d, e, f = coef
    return a * um + b * u0 + c * up + d * vm + e * v0 + f * vp


def moment_candidates(um, u0, up, vm, vp):
    q1 = (u0 - um) / 6.0 - vm
    q2 = (up - um) / 24.0
    q3 = (up - u0) / 6.0 - vp
    return q1, q2, q3


def moment_smoothness(um, u0, up, vm, vp):
    b1 = 4.0 * (um - u0 + 6.0 * vm) ** 2 + 13.0 / 3.0 * (um - u0 + 12.0 * vm) ** 2
    b2 = 0.25 * (um - up) ** 2 + 13.0 / 12.0 * (um - 2.0 * u0 + up) ** 2
    b3 = 4.0 * (u0 - up + 6.0 * vp) ** 2 + 13.0 / 3.0 * (u0 - up + 12.0 * vp) ** 2
    return b1, b2, b3


def limit_first_moment(um, u0, up, vm, v0, vp, eps=EPS):
    """HWENO replacement for the first moment of the centre cell.

    ``v0`` is accepted for a uniform signature but is not read: the
    modified moment depends only on the neighbours' moments.
    """
    q = moment_candidates(um, u0, up, vm, vp)
    w = nonlinear_weights(GAMMA_MOMENT, moment_smoothness(um, u0, up, vm, vp), eps)
    return w[0] * q[0] + w[1] * q[1] + w[2] * q[2]


def interface_candidates(um, u0, up, vm, v0, vp):
    """Values at x_{i+1/2} of the three cubic candidates."""
    p1 = 0.75 * um + 0.25 * u0 + 3.5 * vm + 11.5 * v0
    p2 = 2.0 / 33.0 * um + 5.0 / 6.0 * u0 + 7.0 / 66.0 * up + 60.0 / 11.0 * v0
    p3 = 0.5 * u0 + 0.5 * up + 2.0 * v0 - 2.0 * vp
    return p1, p2, p3


def interface_smoothness(um, u0, up, vm, v0, vp):
    b1 = (
        (um - u0 + 6.0 * vm + 54.0 * v0) ** 2 / 16.0
        + 13.0 / 48.0 * (15.0 * um - 15.0 * u0 + 66.0 * vm + 114.0 * v0) ** 2
        + 3905.0 / 16.0 * (um - u0 + 6.0 * vm + 6.0 * v0) ** 2
    )
    b2 = (
        (um - up - 240.0 * v0) ** 2 / 484.0
        + 13.0 / 12.0 * (um - 2.0 * u0 + up) ** 2
        + 355.0 / 44.0 * (um - up + 24.0 * v0) ** 2
    )
    b3 = (
        (u0 - up + 54.0 * v0 + 6.0 * vp) ** 2 / 16.0
        + 13.0 / 48.0 * (15.0 * u0 - 15.0 * up + 114.0 * v0 + 66.0 * vp) ** 2
        + 3905.0 / 16.0 * (u0 - up + 6.0 * v0 + 6.0 * vp) ** 2
    )
    return b1, b2, b3


def _hweno_right(um, u0, up, vm, v0, vp, eps):
    p = interface_candidates(um, u0, up, vm, v0, vp)
    w = nonlinear_weights(GAMMA_INTERFACE, interface_smoothness(um, u0, up, vm, v0, vp), eps)
    return w[0] * p[0] + w[1] * p[1] + w[2] * p[2]


def hweno_interface(um, u0, up, vm, v0, vp, side="right", eps=EPS):
    """HWENO point value at the right (u^-_{i+1/2}) or left (u^+_{i-1/2}) face.

    The left value is the right kernel applied to the stencil reflected
    about x_i: neighbours swap and moments change sign.
    """
    if side == "right":
        return _hweno_right(um, u0, up, vm, v0, vp, eps)
    if side == "left":
        return _hweno_right(up, u0, um, -vp, -v0, -vm, eps)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def linear_interface(um, u0, up, vm, v0, vp):
    """Upwind linear values ``(u^+_{i-1/2}, u^-_{i+1/2})``."""
    right = _dot(P0_RIGHT, um, u0, up, vm, v0, vp)
    left = _dot(P0_RIGHT, up, u0, um, -vp, -v0, -vm)
    return left, right


def linear_internal(um, u0, up, vm, v0, vp):
    """Linear values at the interior Gauss-Lobatto points x_i -/+ sqrt(5)/10."""
    return (
        _dot(P0_INNER_LEFT, um, u0, up, vm, v0, vp),
        _dot(P0_INNER_RIGHT, um, u0, up, vm, v0, vp),
    )
