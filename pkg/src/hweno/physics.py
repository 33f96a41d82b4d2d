"""Conservation laws: fluxes, wave speeds and characteristic eigensystems.

All state arrays carry the conserved components on axis 0; any trailing
shape is allowed and is preserved by every method.
"""

import numpy as np

GAMMA = 1.4


class AdmissibilityError(ArithmeticError):
    """Nonpositive density or pressure (or a nonreal sound speed)."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{message} at {location}")
        self.location = location


class PhysicsModel:
    """Common interface. Subclasses set ``n_comp`` and ``ndim``."""

    n_comp = 1
    ndim = 1
    name = "model"
    # components used by the troubled-cell indicator
    indicator_vars = (0,)
    var_names = ("u",)

    def flux(self, u, direction=0):
        raise NotImplementedError

    def max_speed(self, u, direction=0):
        """Per-state bound on the spectral radius of the flux Jacobian."""
        raise NotImplementedError

    def max_wave_speed(self, avg, direction=0):
        return float(np.max(self.max_speed(avg, direction), initial=0.0))

    def eigensystem(self, u, direction=0):
        """Return ``(L, R, lam)`` for states ``u`` of shape (n_comp, k).

        ``L`` and ``R`` have shape (k, n_comp, n_comp), ``lam`` (n_comp, k).
        """
        raise NotImplementedError

    def indicator_velocity(self, u, direction=0):
        raise NotImplementedError

    def normal_momentum(self, direction):
        """Index of the momentum component normal to a ``direction`` wall."""
        return None

    def check_admissible(self, u, where=""):
        if not np.all(np.isfinite(u)):
            bad = np.argwhere(~np.isfinite(u))[0]
            raise AdmissibilityError("non-finite state", location=(where, tuple(bad)))


class ScalarModel(PhysicsModel):
    """Scalar law with the same flux in every direction."""

    def __init__(self, ndim=1):
        self.ndim = ndim

    def dflux(self, u):
        raise NotImplementedError

    def max_speed(self, u, direction=0):
        return np.abs(self.dflux(u[0]))

    def max_wave_speed(self, avg, direction=0):
        # |f'| is maximised over the hull of the data, not only at the samples,
        # so non-convex fluxes with f'(min) = f'(max) = 0 still get dissipation
        lo, hi = float(np.min(avg[0])), float(np.max(avg[0]))
        return self._max_dflux_on(lo, hi)

    def _max_dflux_on(self, lo, hi):
        s = np.linspace(lo, hi, 513)
        return float(np.max(np.abs(self.dflux(s))))

    def eigensystem(self, u, direction=0):
        k = u.shape[-1]
        eye = np.ones((k, 1, 1))
        return eye, eye.copy(), self.dflux(u[:1])

    def indicator_velocity(self, u, direction=0):
        return self.dflux(u[0])


class Burgers(ScalarModel):
    name = "burgers"

    def flux(self, u, direction=0):
        return 0.5 * u * u

    def dflux(self, u):
        return u

    def _max_dflux_on(self, lo, hi):
        return max(abs(lo), abs(hi))


class BuckleyLeverett(ScalarModel):
    name = "buckley-leverett"

    def flux(self, u, direction=0):
        u2 = u * u
        return 4.0 * u2 / (4.0 * u2 + (1.0 - u) ** 2)

    def dflux(self, u):
        den = 4.0 * u * u + (1.0 - u) ** 2
        return 8.0 * u * (1.0 - u) / (den * den)


class Euler(PhysicsModel):
    """Ideal-gas Euler equations in one or two dimensions.

    Conserved order: (rho, rho*u[, rho*v], E).
    """

    indicator_vars = None  # set in __init__: density and total energy

    def __init__(self, ndim=1, gamma=GAMMA):
        self.ndim = ndim
        self.gamma = gamma
        self.n_comp = ndim + 2
        self.name = f"euler{ndim}d"
        self.indicator_vars = (0, self.n_comp - 1)
        self.var_names = ("rho", "mx", "E") if ndim == 1 else ("rho", "mx", "my", "E")

    # -- conversions -------------------------------------------------------

    def pressure(self, u):
        rho = u[0]
        kinetic = 0.5 * np.sum(u[1:-1] ** 2, axis=0) / rho
        return (self.gamma - 1.0) * (u[-1] - kinetic)

    def to_primitive(self, u):
        """(rho, m[, m_y], E) -> (rho, vel[, vel_y], p)."""
        u = np.asarray(u, dtype=float)
        self._check_density(u)
        w = np.empty_like(u)
        w[0] = u[0]
        w[1:-1] = u[1:-1] / u[0]
        w[-1] = self.pressure(u)
        if np.any(w[-1] <= 0):
            bad = np.argwhere(np.asarray(w[-1] <= 0).reshape(-1))[0]
            raise AdmissibilityError("nonpositive pressure", location=tuple(bad))
        return w

    def to_conservative(self, w):
        """(rho, vel[, vel_y], p) -> (rho, m[, m_y], E)."""
        w = np.asarray(w, dtype=float)
        if np.any(w[0] <= 0) or np.any(w[-1] <= 0):
            raise AdmissibilityError("nonpositive density or pressure in primitive state")
        u = np.empty_like(w)
        u[0] = w[0]
        u[1:-1] = w[0] * w[1:-1]
        u[-1] = w[-1] / (self.gamma - 1.0) + 0.5 * w[0] * np.sum(w[1:-1] ** 2, axis=0)
        return u

    def _check_density(self, u):
        if np.any(~(u[0] > 0)):
            bad = np.argwhere(~(np.asarray(u[0]) > 0).reshape(-1))[0]
            raise AdmissibilityError("nonpositive density", location=tuple(bad))

    def check_admissible(self, u, where=""):
        super().check_admissible(u, where)
        rho = np.asarray(u[0])
        p = np.asarray(self.pressure(u))
        bad = ~((rho > 0) & (p > 0))
        if np.any(bad):
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise AdmissibilityError("nonpositive density or pressure", location=(where, idx))

    # -- fluxes ------------------------------------------------------------

    def flux(self, u, direction=0):
        rho = u[0]
        p = self.pressure(u)
        vel = u[1 + direction] / rho
        f = u * vel
        f[1 + direction] += p
        f[-1] += p * vel
        return f

    def sound_speed(self, u):
        c2 = self.gamma * self.pressure(u) / u[0]
        return np.sqrt(np.maximum(c2, 0.0))

    def max_speed(self, u, direction=0):
        return np.abs(u[1 + direction] / u[0]) + self.sound_speed(u)

    def max_wave_speed(self, avg, direction=0):
        if self.ndim == 1 and avg.ndim == 2:
            from . import rhs

            if rhs.BACKEND == "numba":
                from .kernels1d import euler_max_speed

                s = euler_max_speed(avg, self.gamma)
                if s >= 0.0:
                    return float(s)
        self.check_admissible(avg, "max_wave_speed")
        return float(np.max(self.max_speed(avg, direction)))

    def indicator_velocity(self, u, direction=0):
        return u[1 + direction] / u[0]

    def normal_momentum(self, direction):
        return 1 + direction

    # -- characteristic decomposition --------------------------------------

    def eigensystem(self, u, direction=0):
        u = np.asarray(u, dtype=float)
        g = self.gamma
        rho = u[0]
        vel = u[1:-1] / rho
        q2 = np.sum(vel**2, axis=0)
        p = (g - 1.0) * (u[-1] - 0.5 * rho * q2)
        c2 = g * p / rho
        if np.any(~(c2 > 0)):
            bad = np.argwhere(~(np.asarray(c2) > 0).reshape(-1))[0]
            raise AdmissibilityError("nonpositive sound speed squared", location=tuple(bad))
        c = np.sqrt(c2)
        H = (u[-1] + p) / rho
        k = rho.shape[-1] if rho.ndim else 1
        rho, c, H, q2 = (np.reshape(a, (k,)) for a in (rho, c, H, q2))
        vel = np.reshape(vel, (self.ndim, k))
        un = vel[direction]
        b1 = (g - 1.0) / c2.reshape(k)
        b2 = 0.5 * q2 * b1
        n = self.n_comp
        R = np.zeros((k, n, n))
        L = np.zeros((k, n, n))
        lam = np.zeros((n, k))
        dn = 1 + direction
        if self.ndim == 1:
            R[:, 0, :] = 1.0
            R[:, 1, 0] = un - c
            R[:, 1, 1] = un
            R[:, 1, 2] = un + c
            R[:, 2, 0] = H - un * c
            R[:, 2, 1] = 0.5 * q2
            R[:, 2, 2] = H + un * c
            L[:, 0] = np.stack([0.5 * (b2 + un / c), -0.5 * (b1 * un + 1.0 / c), 0.5 * b1], -1)
            L[:, 1] = np.stack([1.0 - b2, b1 * un, -b1], -1)
            L[:, 2] = np.stack([0.5 * (b2 - un / c), -0.5 * (b1 * un - 1.0 / c), 0.5 * b1], -1)
            lam[:] = [un - c, un, un + c]
            return L, R, lam
        dt_ = 2 if direction == 0 else 1
        ut = vel[dt_ - 1]
        # columns: u-c, entropy, shear, u+c
        R[:, 0, 0] = 1.0
        R[:, dn, 0] = un - c
        R[:, dt_, 0] = ut
        R[:, 3, 0] = H - un * c
        R[:, 0, 1] = 1.0
        R[:, dn, 1] = un
        R[:, dt_, 1] = ut
        R[:, 3, 1] = 0.5 * q2
        R[:, dt_, 2] = 1.0
        R[:, 3, 2] = ut
        R[:, 0, 3] = 1.0
        R[:, dn, 3] = un + c
        R[:, dt_, 3] = ut
        R[:, 3, 3] = H + un * c
        L[:, 0, 0] = 0.5 * (b2 + un / c)
        L[:, 0, dn] = -0.5 * (b1 * un + 1.0 / c)
        L[:, 0, dt_] = -0.5 * b1 * ut
        L[:, 0, 3] = 0.5 * b1
        L[:, 1, 0] = 1.0 - b2
        L[:, 1, dn] = b1 * un
        L[:, 1, dt_] = b1 * ut
        L[:, 1, 3] = -b1
        L[:, 2, 0] = -ut
        L[:, 2, dt_] = 1.0
        L[:, 3, 0] = 0.5 * (b2 - un / c)
        L[:, 3, dn] = -0.5 * (b1 * un - 1.0 / c)
        L[:, 3, dt_] = -0.5 * b1 * ut
        L[:, 3, 3] = 0.5 * b1
        lam[:] = [un - c, un, un, un + c]
        return L, R, lam


def evaluate_flux(model, state, direction=0):
    state = np.asarray(state, dtype=float)
    if isinstance(model, Euler):
        model.check_admissible(state, "evaluate_flux")
    return model.flux(state, direction)


def max_wave_speed(model, avg):
    """Global wave-speed bound per direction from interior cell averages."""
    speeds = tuple(model.max_wave_speed(avg, d) for d in range(model.ndim))
    return speeds[0] if model.ndim == 1 else speeds


def eigensystem(model, state, direction=0):
    state = np.asarray(state, dtype=float)
    single = state.ndim == 1
    L, R, lam = model.eigensystem(state[:, None] if single else state, direction)
    if single:
        return L[0], R[0], lam[:, 0]
    return L, R, lam


def primitive_conservative(model, state, to="conservative"):
    if to == "conservative":
        return model.to_conservative(state)
    if to == "primitive":
        return model.to_primitive(state)
    raise ValueError(f"unknown conversion target {to!r}; use 'conservative' or 'primitive'")


def make_model(name, ndim=1):
    models = {
        "burgers": lambda: Burgers(ndim),
        "buckley-leverett": lambda: BuckleyLeverett(ndim),
        "euler": lambda: Euler(ndim),
    }
    try:
        return models[name]()
    except KeyError:
        raise ValueError(f"unknown physics model {name!r}") from None
