"""Benchmark problem catalog with exact-solution oracles where they exist."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .field import BoundaryCondition, Side, init_moments, _fill_side
from .mesh import build_mesh_1d, build_mesh_2d
from .physics import GAMMA, Burgers, BuckleyLeverett, Euler

PI = np.pi


class UnknownProblemError(KeyError):
    pass


class OracleError(ValueError):
    pass


@dataclass
class ProblemPreset:
    name: str
    physics: object
    domain: tuple
    resolution: tuple
    t_end: float
    initial: Callable  # conserved state from coordinates
    boundary: Callable  # mesh -> BoundaryCondition
    exact: Optional[Callable] = None  # (t, x[, y]) -> conserved state
    error_component: int = 0
    obstacle: Optional[Callable] = None  # mesh -> obstacle
    post_stage: Optional[Callable] = None  # (field, mesh, obstacle) -> None
    description: str = ""

    @property
    def ndim(self):
        return self.physics.ndim

    def build_mesh(self, nx=None, ny=None):
        if self.ndim == 1:
            n = nx if nx is not None else self.resolution[0]
            return build_mesh_1d(self.domain[0], self.domain[1], n)
        nx = nx if nx is not None else self.resolution[0]
        if ny is None:
            # keep square cells by default
            if nx == self.resolution[0]:
                ny = self.resolution[1]
            else:
                ny = int(round(nx * (self.domain[3] - self.domain[2]) / (self.domain[1] - self.domain[0])))
        return build_mesh_2d(*self.domain, nx, ny)


# ------------------------------------------------------------- primitives


def _euler_state(model, rho, vel, p):
    rho = np.asarray(rho, dtype=float)
    shape = rho.shape
    vel = [np.broadcast_to(np.asarray(v, dtype=float), shape) for v in vel]
    p = np.broadcast_to(np.asarray(p, dtype=float), shape)
    w = np.stack([rho] + vel + [p])
    return model.to_conservative(w)


def _piecewise_1d(model, x, pieces):
    """``pieces`` = [(x_right_bound, (rho, u, p)), ...] in increasing order."""
    out = np.empty((3,) + np.shape(x))
    lo = -np.inf
    for hi, prim in pieces:
        sel = (x >= lo) & (x < hi)
        w = np.array(prim, dtype=float)[:, None]
        out[:, sel] = model.to_conservative(w)[:, :1]
        lo = hi
    return out


# ------------------------------------------------------------ oracles


def solve_burgers_characteristic(s, t, tol=1e-14, max_iter=100):
    """Solve u = 0.5 + sin(pi (s - u t)) by safeguarded Newton.

    Valid only before wave breaking (pi * t < 1), where the residual is
    strictly increasing in u on the bracket [-0.5, 1.5].
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(PI * t >= 1.0):
        raise OracleError(f"Burgers oracle queried after wave breaking (t={float(np.max(t))} >= 1/pi)")
    lo = np.full(s.shape, -0.5)
    hi = np.full(s.shape, 1.5)
    u = 0.5 + np.sin(PI * s)
    for _ in range(max_iter):
        arg = PI * (s - u * t)
        F = u - 0.5 - np.sin(arg)
        dF = 1.0 + PI * t * np.cos(arg)
        lo = np.where(F < 0, u, lo)
        hi = np.where(F > 0, u, hi)
        step = u - F / dF
        bad = (step <= lo) | (step >= hi) | ~np.isfinite(step)
        new = np.where(bad, 0.5 * (lo + hi), step)
        if np.all(np.abs(new - u) <= tol * (1.0 + np.abs(u))):
            u = new
            break
        u = new
    else:
        raise OracleError("Burgers characteristic solve did not converge")
    return u


def _burgers1d_exact(t, x):
    return solve_burgers_characteristic(np.asarray(x), t)[None]


def _burgers2d_exact(t, x, y):
    return solve_burgers_characteristic(0.5 * (np.asarray(x) + np.asarray(y)), t)[None]


def _vortex_prim(x, y, strength=5.0, gamma=GAMMA):
    r2 = x * x + y * y
    rho = (1.0 - (gamma - 1.0) * strength**2 / (8.0 * gamma * PI**2) * np.exp(1.0 - r2)) ** (
        1.0 / (gamma - 1.0)
    )
    p = rho**gamma
    bump = strength / (2.0 * PI) * np.exp(0.5 * (1.0 - r2))
    return rho, 1.0 - bump * y, 1.0 + bump * x, p


def _wrap(z, lo, period):
    return (z - lo) % period + lo


# ------------------------------------------------------------- presets


def _burgers1d():
    return ProblemPreset(
        name="burgers1d",
        physics=Burgers(1),
        domain=(0.0, 2.0),
        resolution=(80,),
        t_end=0.5 / PI,
        initial=lambda x: 0.5 + np.sin(PI * x),
        boundary=lambda mesh: BoundaryCondition.uniform("periodic", 1),
        exact=_burgers1d_exact,
        description="1D Burgers, 0.5 + sin(pi x) on [0, 2], periodic",
    )


def _euler1d_wave():
    model = Euler(1)

    def exact(t, x):
        x = np.asarray(x, dtype=float)
        return _euler_state(model, 1.0 + 0.2 * np.sin(PI * (x - t)), [1.0], 1.0)

    return ProblemPreset(
        name="euler1d-wave",
        physics=model,
        domain=(0.0, 2.0),
        resolution=(80,),
        t_end=2.0,
        initial=lambda x: exact(0.0, x),
        boundary=lambda mesh: BoundaryCondition.uniform("periodic", 1),
        exact=exact,
        description="1D Euler density wave, periodic on [0, 2]",
    )


def _burgers2d():
    return ProblemPreset(
        name="burgers2d",
        physics=Burgers(2),
        domain=(0.0, 4.0, 0.0, 4.0),
        resolution=(80, 80),
        t_end=0.5 / PI,
        initial=lambda x, y: 0.5 + np.sin(PI * (x + y) / 2.0),
        boundary=lambda mesh: BoundaryCondition.uniform("periodic", 2),
        exact=_burgers2d_exact,
        description="2D Burgers, 0.5 + sin(pi (x + y) / 2) on [0, 4]^2, periodic",
    )


def _euler2d_wave():
    model = Euler(2)

    def exact(t, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return _euler_state(model, 1.0 + 0.2 * np.sin(PI * (x + y - 2.0 * t)), [1.0, 1.0], 1.0)

    return ProblemPreset(
        name="euler2d-wave",
        physics=model,
        domain=(0.0, 2.0, 0.0, 2.0),
        resolution=(80, 80),
        t_end=2.0,
        initial=lambda x, y: exact(0.0, x, y),
        boundary=lambda mesh: BoundaryCondition.uniform("periodic", 2),
        exact=exact,
        description="2D Euler density wave along the diagonal, periodic on [0, 2]^2",
    )


def _vortex():
    model = Euler(2)

    def exact(t, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        xs = _wrap(x - t, -5.0, 10.0)
        ys = _wrap(y - t, -5.0, 10.0)
        rho, u, v, p = _vortex_prim(xs, ys)
        return _euler_state(model, rho, [u, v], p)

    return ProblemPreset(
        name="vortex",
        physics=model,
        domain=(-5.0, 5.0, -5.0, 5.0),
        resolution=(80, 80),
        t_end=10.0,
        initial=lambda x, y: exact(0.0, x, y),
        boundary=lambda mesh: BoundaryCondition.uniform("periodic", 2),
        exact=exact,
        description="isentropic vortex (strength 5) advected diagonally, period 10",
    )


def _buckley():
    return ProblemPreset(
        name="buckley",
        physics=BuckleyLeverett(1),
        domain=(-1.0, 1.0),
        resolution=(80,),
        t_end=0.4,
        initial=lambda x: np.where((x >= -0.5) & (x <= 0.0), 1.0, 0.0),
        boundary=lambda mesh: BoundaryCondition(Side("dirichlet", state=[0.0]), Side("outflow")),
        description="Buckley-Leverett, u = 1 on [-1/2, 0], inflow left / outflow right",
    )


def _lax():
    model = Euler(1)
    left, right = (0.445, 0.698, 3.528), (0.5, 0.0, 0.571)
    return ProblemPreset(
        name="lax",
        physics=model,
        domain=(-0.5, 0.5),
        resolution=(200,),
        t_end=0.16,
        initial=lambda x: _piecewise_1d(model, x, [(0.0, left), (np.inf, right)]),
        boundary=lambda mesh: BoundaryCondition.uniform("outflow", 1),
        description="Lax shock tube",
    )


SHU_OSHER_LEFT = (3.857143, 2.629369, 10.333333)


def _shu_osher():
    model = Euler(1)

    def initial(x):
        out = _piecewise_1d(model, x, [(-4.0, SHU_OSHER_LEFT), (np.inf, (1.0, 0.0, 1.0))])
        right = x >= -4.0
        out[:, right] = _euler_state(model, 1.0 + 0.2 * np.sin(5.0 * x[right]), [0.0], 1.0)
        return out

    left_state = model.to_conservative(np.array(SHU_OSHER_LEFT)[:, None])[:, 0]
    return ProblemPreset(
        name="shu-osher",
        physics=model,
        domain=(-5.0, 5.0),
        resolution=(400,),
        t_end=1.8,
        initial=initial,
        boundary=lambda mesh: BoundaryCondition(Side("dirichlet", state=left_state), Side("outflow")),
        description="Mach 3 shock meeting a density sine wave",
    )


def _blast():
    model = Euler(1)
    pieces = [(0.1, (1.0, 0.0, 1e3)), (0.9, (1.0, 0.0, 1e-2)), (np.inf, (1.0, 0.0, 1e2))]
    return ProblemPreset(
        name="blast",
        physics=model,
        domain=(0.0, 1.0),
        resolution=(800,),
        t_end=0.038,
        initial=lambda x: _piecewise_1d(model, x, pieces),
        boundary=lambda mesh: BoundaryCondition.uniform("reflective", 1),
        description="two interacting blast waves between reflecting walls",
    )


# ---------------------------------------------------------- double Mach

DMR_PRE = (1.4, 0.0, 0.0, 1.0)
DMR_POST = (8.0, 8.25 * np.cos(PI / 6.0), -8.25 * np.sin(PI / 6.0), 116.5)
DMR_X0 = 1.0 / 6.0
DMR_SHOCK_SPEED = 10.0


def dmr_shock_x(t, y):
    """Abscissa of the Mach 10 shock, inclined 60 degrees to the wall."""
    return DMR_X0 + (y + 2.0 * DMR_SHOCK_SPEED * t) / np.sqrt(3.0)


def _dmr():
    model = Euler(2)
    pre = model.to_conservative(np.array(DMR_PRE)[:, None])[:, 0]
    post = model.to_conservative(np.array(DMR_POST)[:, None])[:, 0]

    def initial(x, y):
        behind = x < dmr_shock_x(0.0, y)
        return np.where(behind[None], post.reshape(-1, *([1] * x.ndim)),
                        pre.reshape(-1, *([1] * x.ndim)))

    def bottom(field, t, name):
        mesh = field.mesh
        _fill_side(field, Side("reflective"), "bottom", t, model)
        g = mesh.n_ghost
        cols = mesh.padded_x_centers < DMR_X0
        q = field.q
        q[:, :, cols, :g] = 0.0
        q[0][:, cols, :g] = post[:, None, None]

    def top(field, t, name):
        mesh = field.mesh
        g = mesh.n_ghost
        ny = mesh.ny
        yg = mesh.padded_y_centers[ny + g:]
        xg = mesh.padded_x_centers
        behind = xg[:, None] < dmr_shock_x(t, yg[None, :])
        q = field.q
        q[:, :, :, ny + g:] = 0.0
        q[0][:, :, ny + g:] = np.where(behind[None], post[:, None, None], pre[:, None, None])

    def boundary(mesh):
        return BoundaryCondition(
            Side("dirichlet", state=post),
            Side("outflow"),
            Side("custom", callback=bottom),
            Side("custom", callback=top),
        )

    return ProblemPreset(
        name="dmr",
        physics=model,
        domain=(0.0, 4.0, 0.0, 1.0),
        resolution=(480, 120),
        t_end=0.2,
        initial=initial,
        boundary=boundary,
        description="double Mach reflection (desk-scale default resolution)",
    )


# ------------------------------------------------------------ forward step

STEP_X = 0.6
STEP_H = 0.2
STEP_INFLOW = (1.4, 3.0, 0.0, 1.0)


class StepObstacle:
    """Solid block [0.6, 3] x [0, 0.2] embedded in the rectangular grid.

    Solid cells are overwritten each stage with mirror images of nearby
    fluid cells; fluxes on the wall faces use the exact mirror state of the
    fluid-side trace.
    """

    def __init__(self, mesh):
        self.i_s = int(round((STEP_X - mesh.x_lo) / mesh.dx))
        self.j_t = int(round((STEP_H - mesh.y_lo) / mesh.dy))
        g = mesh.n_ghost
        self.mesh = mesh
        active = np.ones(mesh.padded_shape, dtype=bool)
        active[g + self.i_s:g + mesh.nx, g:g + self.j_t] = False
        self.active = active
        # source cell and mirror axis for every solid interior cell
        I, J = np.meshgrid(np.arange(self.i_s, mesh.nx), np.arange(self.j_t), indexing="ij")
        depth_x = I - self.i_s + 1
        depth_y = self.j_t - J
        use_y = depth_y <= depth_x
        src_i = np.where(use_y, I, 2 * self.i_s - 1 - I)
        src_j = np.where(use_y, 2 * self.j_t - 1 - J, J)
        self._dst = (I.ravel() + g, J.ravel() + g)
        self._src = (src_i.ravel() + g, src_j.ravel() + g)
        self._use_y = use_y.ravel()

    @property
    def wall_faces(self):
        """(first solid column, first fluid row) in interior indices."""
        return self.i_s, self.j_t

    def fill(self, field, t=0.0):
        q = field.q
        di, dj = self._dst
        si, sj = self._src
        src = q[:, :, si, sj].copy()  # (3 moments, 4 comp, k)
        y = self._use_y
        # mirror across y = 0.2: flip y-momentum and the y-moment
        src[:, 2, y] *= -1.0
        src[2][:, y] *= -1.0
        # mirror across x = 0.6: flip x-momentum and the x-moment
        src[:, 1, ~y] *= -1.0
        src[1][:, ~y] *= -1.0
        q[:, :, di, dj] = src

    def override_wall_states(self, um_x, up_x, um_y, up_y, mesh):
        i_s, j_t = self.i_s, self.j_t
        wall = um_x[:, :, i_s, :j_t].copy()
        wall[:, 1] *= -1.0
        up_x[:, :, i_s, :j_t] = wall
        wall = up_y[:, :, i_s:, j_t].copy()
        wall[:, 2] *= -1.0
        um_y[:, :, i_s:, j_t] = wall


def step_corner_fix(field, mesh, obstacle, model=None, gamma=GAMMA):
    """Entropy/enthalpy reset near the step corner (Woodward-Colella style).

    The 2x2 block of fluid cells up-right of the corner tip takes the
    entropy and total enthalpy of the cell just below-left of the corner,
    keeping each cell's pressure and flow direction.
    """
    g = mesh.n_ghost
    i_s, j_t = obstacle.i_s + g, obstacle.j_t + g
    q = field.q
    ref = q[0][:, i_s - 1, j_t - 1]
    rho_r = ref[0]
    vel_r = ref[1:3] / rho_r
    p_r = (gamma - 1.0) * (ref[3] - 0.5 * rho_r * np.dot(vel_r, vel_r))
    s_ref = p_r / rho_r**gamma
    H_ref = gamma / (gamma - 1.0) * p_r / rho_r + 0.5 * np.dot(vel_r, vel_r)
    for i in (i_s, i_s + 1):
        for j in (j_t, j_t + 1):
            u = q[0][:, i, j]
            rho = u[0]
            vel = u[1:3] / rho
            speed = np.sqrt(np.dot(vel, vel))
            p = (gamma - 1.0) * (u[3] - 0.5 * rho * speed**2)
            rho_new = (p / s_ref) ** (1.0 / gamma)
            h = gamma / (gamma - 1.0) * p / rho_new
            speed_new = np.sqrt(max(2.0 * (H_ref - h), 0.0))
            if speed > 0.0:
                vel_new = vel * (speed_new / speed)
            else:
                vel_new = vel
            new = np.array([rho_new, rho_new * vel_new[0], rho_new * vel_new[1],
                            p / (gamma - 1.0) + 0.5 * rho_new * speed_new**2])
            if np.allclose(new, u, rtol=1e-13, atol=0.0):
                continue
            q[0][:, i, j] = new
            q[1:, :, i, j] = 0.0
    return field


def _step():
    model = Euler(2)
    inflow = model.to_conservative(np.array(STEP_INFLOW)[:, None])[:, 0]

    def initial(x, y):
        return np.broadcast_to(inflow.reshape(-1, *([1] * x.ndim)), (4,) + x.shape).copy()

    def boundary(mesh):
        obstacle = StepObstacle(mesh)
        bc = BoundaryCondition(
            Side("dirichlet", state=inflow),
            Side("outflow"),
            Side("reflective"),
            Side("reflective"),
        )
        bc.extra = lambda field, t: obstacle.fill(field, t)
        bc.obstacle = obstacle
        return bc

    def post_stage(field, mesh, obstacle):
        step_corner_fix(field, mesh, obstacle)

    return ProblemPreset(
        name="step",
        physics=model,
        domain=(0.0, 3.0, 0.0, 1.0),
        resolution=(480, 160),
        t_end=4.0,
        initial=initial,
        boundary=boundary,
        obstacle=lambda bc: bc.obstacle,
        post_stage=post_stage,
        description="Mach 3 wind tunnel with a forward-facing step (desk-scale default)",
    )


CATALOG = {
    "burgers1d": _burgers1d,
    "euler1d-wave": _euler1d_wave,
    "burgers2d": _burgers2d,
    "euler2d-wave": _euler2d_wave,
    "vortex": _vortex,
    "buckley": _buckley,
    "lax": _lax,
    "shu-osher": _shu_osher,
    "blast": _blast,
    "dmr": _dmr,
    "step": _step,
}


def preset(name):
    try:
        return CATALOG[name]()
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; choose from {', '.join(CATALOG)}"
        ) from None


def exact_solution(p, t, x, y=None):
    if p.exact is None:
        raise OracleError(f"problem {p.name!r} has no exact-solution oracle")
    return p.exact(t, x) if y is None else p.exact(t, x, y)


def exact_cell_averages(p, mesh, t):
    if p.exact is None:
        raise OracleError(f"problem {p.name!r} has no exact-solution oracle")
    if p.ndim == 1:
        f = init_moments(lambda x: p.exact(t, x), mesh)
    else:
        f = init_moments(lambda x, y: p.exact(t, x, y), mesh)
    return f.interior(0)


def error_norms(field, p, t, component=None):
    """(L1, Linf) of cell-average errors: L1 is the mean absolute error."""
    comp = p.error_component if component is None else component
    exact = exact_cell_averages(p, field.mesh, t)[comp]
    err = np.abs(field.interior(0)[comp] - exact)
    return float(np.mean(err)), float(np.max(err))


def initial_field(p, mesh):
    return init_moments(p.initial, mesh)
