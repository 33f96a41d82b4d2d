"""Moment degrees of freedom with ghost layers and boundary filling.

A field stores, for every conserved component and every padded cell, the
cell average and the first moment(s) weighted by the scaled local
coordinate. Storage is one array ``q`` of shape
``(n_moments, n_comp, *padded_shape)`` with ``q[0]`` the averages,
``q[1]`` the x-moments and, in 2D, ``q[2]`` the y-moments.
"""

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .mesh import Mesh1D, Mesh2D

GAUSS5_NODES, GAUSS5_WEIGHTS = np.polynomial.legendre.leggauss(5)
# rescaled to the unit cell [-1/2, 1/2] with weights summing to one
GAUSS5_NODES = 0.5 * GAUSS5_NODES
GAUSS5_WEIGHTS = 0.5 * GAUSS5_WEIGHTS


class InitializationError(ValueError):
    pass


class BoundaryConfigError(ValueError):
    pass


class MomentField:
    def __init__(self, q, mesh):
        self.q = q
        self.mesh = mesh

    @classmethod
    def zeros(cls, mesh, n_comp):
        n_mom = 2 if isinstance(mesh, Mesh1D) else 3
        return cls(np.zeros((n_mom, n_comp) + mesh.padded_shape), mesh)

    @property
    def ndim(self):
        return self.q.ndim - 2

    @property
    def n_comp(self):
        return self.q.shape[1]

    @property
    def avg(self):
        return self.q[0]

    @property
    def mom_x(self):
        return self.q[1]

    @property
    def mom_y(self):
        return self.q[2]

    def interior(self, moment=0):
        return self.q[(moment, slice(None)) + self.mesh.interior]

    def copy(self):
        return MomentField(self.q.copy(), self.mesh)


def _as_components(values, n_pts_shape):
    arr = np.asarray(values, dtype=float)
    if arr.shape == n_pts_shape:
        arr = arr[None]
    return arr


def init_moments(u0, mesh):
    """Cell averages and first moments of ``u0`` by 5-point Gauss per cell.

    ``u0`` is vectorized: ``u0(x)`` in 1D or ``u0(x, y)`` in 2D returning an
    array of sample values, with a leading component axis for systems.
    Ghost cells are left at zero; fill them with :func:`apply_boundary`.
    """
    s, w = GAUSS5_NODES, GAUSS5_WEIGHTS
    if isinstance(mesh, Mesh1D):
        xc = mesh.centers
        x = xc[:, None] + s[None, :] * mesh.dx
        vals = _as_components(u0(x), x.shape)
        avg = np.einsum("cnk,k->cn", vals, w)
        mom = np.einsum("cnk,k->cn", vals, w * s)
        moments = (avg, mom)
    else:
        x = mesh.x_centers[:, None, None, None] + s[None, None, :, None] * mesh.dx
        y = mesh.y_centers[None, :, None, None] + s[None, None, None, :] * mesh.dy
        x, y = np.broadcast_arrays(x, y)
        vals = _as_components(u0(x, y), x.shape)
        ww = np.outer(w, w)
        avg = np.einsum("cijkl,kl->cij", vals, ww)
        mx = np.einsum("cijkl,kl->cij", vals, ww * s[:, None])
        my = np.einsum("cijkl,kl->cij", vals, ww * s[None, :])
        moments = (avg, mx, my)
    for m in moments:
        if not np.all(np.isfinite(m)):
            bad = tuple(int(i) for i in np.argwhere(~np.isfinite(m))[0][1:])
            raise InitializationError(f"non-finite initial data in cell {bad}")
    f = MomentField.zeros(mesh, moments[0].shape[0])
    for k, m in enumerate(moments):
        f.q[(k, slice(None)) + mesh.interior] = m
    return f


# ---------------------------------------------------------------- boundaries


@dataclass
class Side:
    """One boundary side.

    ``kind`` is one of periodic, outflow, dirichlet, reflective, custom.
    Custom callbacks are called as ``callback(field, t, side_name)`` and
    must fill that side's ghost cells.
    """

    kind: str
    state: Optional[np.ndarray] = None
    callback: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("periodic", "outflow", "dirichlet", "reflective", "custom"):
            raise BoundaryConfigError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet":
            if self.state is None:
                raise BoundaryConfigError("dirichlet boundary needs a fixed state")
            self.state = np.asarray(self.state, dtype=float)
        if self.kind == "custom" and self.callback is None:
            raise BoundaryConfigError("custom boundary needs a callback")


@dataclass
class BoundaryCondition:
    left: Side
    right: Side
    bottom: Optional[Side] = None
    top: Optional[Side] = None
    # called after all sides are filled, e.g. to populate obstacle cells
    extra: Optional[Callable] = dc_field(default=None)

    def __post_init__(self):
        pairs = [("left", "right")]
        if self.bottom is not None or self.top is not None:
            if self.bottom is None or self.top is None:
                raise BoundaryConfigError("2D boundary needs both bottom and top sides")
            pairs.append(("bottom", "top"))
        for a, b in pairs:
            pa = getattr(self, a).kind == "periodic"
            pb = getattr(self, b).kind == "periodic"
            if pa != pb:
                raise BoundaryConfigError(f"unpaired periodic boundary on {a}/{b}")

    @property
    def time_dependent(self):
        sides = [self.left, self.right, self.bottom, self.top]
        return any(s is not None and s.kind == "custom" for s in sides)

    @classmethod
    def uniform(cls, kind, ndim=1, state=None):
        def side():
            return Side(kind, state=state)

        if ndim == 1:
            return cls(side(), side())
        return cls(side(), side(), side(), side())


def _axis_slices(ndim, axis, idx):
    """Index tuple into q selecting position(s) ``idx`` along spatial ``axis``."""
    sl = [slice(None), slice(None)] + [slice(None)] * ndim
    sl[2 + axis] = idx
    return tuple(sl)


def ghost_and_source(n, g, axis_side, kind):
    """Padded indices of ghosts on a side and the cells they copy from."""
    if axis_side == "lo":
        ghosts = np.arange(g)  # 0 .. g-1, outermost first
        if kind == "periodic":
            src = ghosts + n
        elif kind == "reflective":
            src = 2 * g - 1 - ghosts
        else:
            src = np.full(g, g)
    else:
        ghosts = np.arange(n + g, n + 2 * g)
        if kind == "periodic":
            src = ghosts - n
        elif kind == "reflective":
            src = 2 * (n + g) - 1 - ghosts
        else:
            src = np.full(g, n + g - 1)
    return ghosts, src


_SIDES = {"left": (0, "lo"), "right": (0, "hi"), "bottom": (1, "lo"), "top": (1, "hi")}


def _fill_side(field, side, name, t, physics):
    mesh = field.mesh
    axis, lohi = _SIDES[name]
    ndim = field.ndim
    n = mesh.shape[axis]
    g = mesh.n_ghost
    q = field.q
    if side.kind == "custom":
        side.callback(field, t, name)
        return
    ghosts, src = ghost_and_source(n, g, lohi, side.kind)
    gsl = _axis_slices(ndim, axis, slice(int(ghosts[0]), int(ghosts[-1]) + 1))
    if side.kind == "dirichlet":
        state = side.state.reshape((-1,) + (1,) * ndim)
        q[gsl] = 0.0
        q[(0,) + gsl[1:]] = state
        return
    q[gsl] = q[_axis_slices(ndim, axis, src)]
    if side.kind == "reflective":
        # u_ghost(x) = P u(2 x_wall - x): the moment along the wall normal flips
        q[(1 + axis,) + gsl[1:]] *= -1.0
        nm = physics.normal_momentum(axis) if physics is not None else None
        if nm is not None:
            q[(slice(None), nm) + gsl[2:]] *= -1.0


_BC_CODES = {"periodic": 0, "outflow": 1, "reflective": 2, "dirichlet": 3}


def _fast_codes_1d(bc, n_comp):
    """Cached (codes, states) for the compiled 1D filler, or None if unsupported."""
    cached = bc.__dict__.get("_fast1d")
    if cached is not None and cached[2] == n_comp:
        return cached
    if bc.extra is not None or bc.left.kind == "custom" or bc.right.kind == "custom":
        return None
    codes = np.array([_BC_CODES[bc.left.kind], _BC_CODES[bc.right.kind]], dtype=np.int64)
    states = np.zeros((2, n_comp))
    for k, side in enumerate((bc.left, bc.right)):
        if side.kind == "dirichlet":
            states[k] = side.state
    bc.__dict__["_fast1d"] = (codes, states, n_comp)
    return bc.__dict__["_fast1d"]


def apply_boundary(field, bc, t=0.0, physics=None):
    """Fill ghost layers in place and return the field.

    In 2D the x-sides are filled first over interior rows, then the y-sides
    over every column including x-ghosts, which also fills the corners.
    """
    if field.ndim == 1:
        from . import rhs

        fast = _fast_codes_1d(bc, field.n_comp) if rhs.BACKEND == "numba" else None
        if fast is not None:
            from .kernels1d import fill_ghosts

            nm = physics.normal_momentum(0) if physics is not None else None
            fill_ghosts(field.q, fast[0], fast[1], -1 if nm is None else nm,
                        field.mesh.n_ghost, field.mesh.n)
            return field
    _fill_side(field, bc.left, "left", t, physics)
    _fill_side(field, bc.right, "right", t, physics)
    if field.ndim == 2:
        _fill_side(field, bc.bottom, "bottom", t, physics)
        _fill_side(field, bc.top, "top", t, physics)
    if bc.extra is not None:
        bc.extra(field, t)
    return field


def conserved_totals(field):
    """Per-component sum of cell average times cell volume (compensated)."""
    avg = field.interior(0)
    vol = field.mesh.cell_volume
    return np.array([math.fsum(a.ravel()) * vol for a in avg])
