"""Uniform structured grids with a fixed two-cell ghost layer."""

from dataclasses import dataclass

import numpy as np

N_GHOST = 2


class MeshError(ValueError):
    """Raised for an empty or inverted domain, or too few cells."""


@dataclass(frozen=True)
class Mesh1D:
    x_lo: float
    x_hi: float
    n: int
    n_ghost: int = N_GHOST

    @property
    def dx(self):
        return (self.x_hi - self.x_lo) / self.n

    @property
    def shape(self):
        return (self.n,)

    @property
    def padded_shape(self):
        return (self.n + 2 * self.n_ghost,)

    @property
    def interior(self):
        g = self.n_ghost
        return (slice(g, g + self.n),)

    @property
    def centers(self):
        return self.x_lo + (np.arange(self.n) + 0.5) * self.dx

    @property
    def padded_centers(self):
        g = self.n_ghost
        return self.x_lo + (np.arange(-g, self.n + g) + 0.5) * self.dx

    @property
    def cell_volume(self):
        return self.dx

    @property
    def volume(self):
        return self.x_hi - self.x_lo

    def to_padded(self, i):
        return i + self.n_ghost

    def to_interior(self, p):
        return p - self.n_ghost


@dataclass(frozen=True)
class Mesh2D:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    nx: int
    ny: int
    n_ghost: int = N_GHOST

    @property
    def dx(self):
        return (self.x_hi - self.x_lo) / self.nx

    @property
    def dy(self):
        return (self.y_hi - self.y_lo) / self.ny

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def padded_shape(self):
        return (self.nx + 2 * self.n_ghost, self.ny + 2 * self.n_ghost)

    @property
    def interior(self):
        g = self.n_ghost
        return (slice(g, g + self.nx), slice(g, g + self.ny))

    @property
    def x_centers(self):
        return self.x_lo + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y_centers(self):
        return self.y_lo + (np.arange(self.ny) + 0.5) * self.dy

    @property
    def padded_x_centers(self):
        g = self.n_ghost
        return self.x_lo + (np.arange(-g, self.nx + g) + 0.5) * self.dx

    @property
    def padded_y_centers(self):
        g = self.n_ghost
        return self.y_lo + (np.arange(-g, self.ny + g) + 0.5) * self.dy

    @property
    def cell_volume(self):
        return self.dx * self.dy

    @property
    def volume(self):
        return (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)

    def to_padded(self, i, j):
        return i + self.n_ghost, j + self.n_ghost

    def to_interior(self, pi, pj):
        return pi - self.n_ghost, pj - self.n_ghost


def build_mesh_1d(x_lo, x_hi, n):
    if not x_hi > x_lo:
        raise MeshError(f"invalid extent: x_hi={x_hi} must exceed x_lo={x_lo}")
    if int(n) != n or n < 3:
        raise MeshError(f"invalid extent: need at least 3 cells, got n={n}")
    return Mesh1D(float(x_lo), float(x_hi), int(n))


def build_mesh_2d(x_lo, x_hi, y_lo, y_hi, nx, ny):
    if not (x_hi > x_lo and y_hi > y_lo):
        raise MeshError(
            f"invalid extent: [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}] is empty or inverted"
        )
    for name, val in (("nx", nx), ("ny", ny)):
        if int(val) != val or val < 3:
            raise MeshError(f"invalid extent: need {name} >= 3, got {val}")
    return Mesh2D(float(x_lo), float(x_hi), float(y_lo), float(y_hi), int(nx), int(ny))
