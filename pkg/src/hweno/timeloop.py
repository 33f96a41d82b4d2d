"""SSP (TVD) Runge-Kutta 3 time integration and the run driver."""

import time
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .field import MomentField, apply_boundary
from .indicator import TroubledMask, kxrcf_flag_1d, kxrcf_flag_2d
from .physics import AdmissibilityError
from .rhs import PhaseTimer, compute_rhs_1d, compute_rhs_2d, normalize_mode

DT_POLICIES = ("cfl", "accuracy", "fixed")
DEFAULT_CFL = {1: 0.6, 2: 0.45}
# accuracy-scaled step: dt = cfl * dx / alpha * (dx / dx_ref) ** DT_EXTRA_POWER
# dx_ref defaults to extent / DT_REF_CELLS[ndim]
DT_EXTRA_POWER = {1: 1.0, 2: 1.0 / 3.0}
DT_REF_CELLS = {1: 10, 2: 40}


class SimulationAborted(RuntimeError):
    """A stage produced non-finite or inadmissible data.

    ``last_good`` holds the field at the start of the failing step.
    """

    def __init__(self, message, step, stage, t, last_good):
        super().__init__(f"{message} (step {step}, stage {stage}, t={t:.6g})")
        self.step = step
        self.stage = stage
        self.t = t
        self.last_good = last_good


@dataclass
class TimeConfig:
    t_end: float
    cfl: Optional[float] = None
    dt_policy: str = "cfl"
    fixed_dt: Optional[float] = None
    dt_ref_dx: Optional[float] = None
    dt_extra_power: Optional[float] = None
    max_steps: int = 10_000_000
    # "stage" re-runs the indicator at every RK stage, "step" once per step
    indicator_every: str = "stage"

    def __post_init__(self):
        if self.dt_policy not in DT_POLICIES:
            raise ValueError(f"unknown dt policy {self.dt_policy!r}; valid: {', '.join(DT_POLICIES)}")
        if self.dt_policy == "fixed" and not (self.fixed_dt and self.fixed_dt > 0):
            raise ValueError("fixed dt policy needs a positive fixed_dt")
        if self.indicator_every not in ("stage", "step"):
            raise ValueError("indicator_every must be 'stage' or 'step'")


def compute_dt(field, physics, config, t=0.0, active=None):
    """Next time step, never overshooting ``config.t_end``."""
    mesh = field.mesh
    ndim = field.ndim
    remaining = config.t_end - t
    if config.dt_policy == "fixed":
        return min(config.fixed_dt, remaining)
    cfl = config.cfl if config.cfl is not None else DEFAULT_CFL[ndim]
    avg = field.avg[(slice(None),) + mesh.interior]
    if active is not None:
        avg = avg[:, active[mesh.interior]]
    if ndim == 1:
        alpha = physics.max_wave_speed(avg, 0)
        rate = alpha / mesh.dx
        h = mesh.dx
        extent = mesh.x_hi - mesh.x_lo
    else:
        rate = physics.max_wave_speed(avg, 0) / mesh.dx + physics.max_wave_speed(avg, 1) / mesh.dy
        h = max(mesh.dx, mesh.dy)
        extent = max(mesh.x_hi - mesh.x_lo, mesh.y_hi - mesh.y_lo)
    if not np.isfinite(rate):
        raise AdmissibilityError("non-finite wave speed")
    if rate <= 0.0:
        return remaining
    dt = cfl / rate
    if config.dt_policy == "accuracy":
        ref = config.dt_ref_dx if config.dt_ref_dx is not None else extent / DT_REF_CELLS[ndim]
        power = config.dt_extra_power if config.dt_extra_power is not None else DT_EXTRA_POWER[ndim]
        dt *= (h / ref) ** power
    return min(dt, remaining)


class SchemeOperator:
    """Callable semi-discrete operator L(field, t) with bookkeeping.

    Each call refreshes ghosts, runs the indicator (unless reusing the
    step's mask), limits in place and returns dq/dt.  Troubled-cell counts
    are appended to ``history`` as (step, stage, time, count, fraction).
    """

    def __init__(self, physics, bc, mode="hybrid", obstacle=None, indicator_every="stage",
                 eps=None, timer=None, cell_log=None):
        self.physics = physics
        self.bc = bc
        self.mode = normalize_mode(mode)
        self.obstacle = obstacle
        self.active = obstacle.active if obstacle is not None else None
        self.indicator_every = indicator_every
        self.eps = eps
        self.timer = timer or PhaseTimer()
        self.history = []
        self.step = 0
        self.stage = 0
        self._mask = None
        # optional list receiving (step, time, interior indices) per indicator call
        self.cell_log = cell_log

    def flags(self, field, t):
        mesh = field.mesh
        t0 = time.perf_counter()
        if self.mode != "hybrid":
            # the mask is ignored in the other modes; skip the indicator cost
            return TroubledMask.constant(field.ndim, mesh, self.mode == "limit-all")
        if field.ndim == 1:
            mask = kxrcf_flag_1d(field, self.physics, mesh, self.bc, self.active)
        else:
            mask = kxrcf_flag_2d(field, self.physics, mesh, self.bc, self.active)
        self.timer.add("indicator", t0)
        return mask

    def __call__(self, field, t):
        mesh = field.mesh
        apply_boundary(field, self.bc, t, self.physics)
        if self.indicator_every == "stage" or self.stage == 0 or self._mask is None:
            self._mask = self.flags(field, t)
            if self.cell_log is not None:
                inner = self._mask.flags[mesh.interior]
                self.cell_log.append((self.step, t, np.argwhere(inner)))
        mask = self._mask
        if self.mode == "hybrid":
            self.history.append((self.step, self.stage, t, mask.count, mask.fraction))
        kw = {} if self.eps is None else {"eps": self.eps}
        if field.ndim == 1:
            return compute_rhs_1d(field, self.physics, mask, self.mode, mesh, self.bc, t,
                                  timer=self.timer, **kw)
        return compute_rhs_2d(field, self.physics, mask, self.mode, mesh, self.bc, t,
                              timer=self.timer, obstacle=self.obstacle, active=self.active, **kw)


def rk3_step(field, rhs_operator, dt, t=0.0, post_stage=None):
    """One SSP-RK3 step; returns a new field.

    The operator may modify its input (limiting), so stage combinations use
    the state as it was after the operator saw it.
    """

    def stage(q):
        f = MomentField(q, field.mesh)
        if post_stage is not None:
            post_stage(f)
        return f

    def call(f, tau, k):
        if hasattr(rhs_operator, "stage"):
            rhs_operator.stage = k
        return rhs_operator(f, tau)

    # increment form of 3/4 q0 + 1/4 (...) and 1/3 q0 + 2/3 (...): exact when L = 0
    f0 = field.copy()
    L0 = call(f0, t, 0)
    q0 = f0.q
    f1 = stage(q0 + dt * L0)
    L1 = call(f1, t + dt, 1)
    f2 = stage(q0 + 0.25 * ((f1.q - q0) + dt * L1))
    L2 = call(f2, t + 0.5 * dt, 2)
    return stage(q0 + (2.0 / 3.0) * ((f2.q - q0) + dt * L2))


@dataclass
class RunResult:
    field: MomentField
    t: float
    steps: int
    history: list
    timings: dict
    wall_seconds: float
    extras: dict = dc_field(default_factory=dict)

    @property
    def mean_troubled_fraction(self):
        if not self.history:
            return 0.0
        return float(np.mean([h[4] for h in self.history]))


def run(field, physics, bc, config, mode="hybrid", obstacle=None, post_stage=None,
        callback=None, cell_log=None):
    """Advance ``field`` to ``config.t_end``.

    ``post_stage(field)`` runs on every new stage state (e.g. the step corner
    fix); ``callback(step, t, field)`` after every completed step.
    Raises SimulationAborted carrying the last good state.
    """
    timer = PhaseTimer()
    op = SchemeOperator(physics, bc, mode, obstacle, config.indicator_every, timer=timer,
                        cell_log=cell_log)
    t = 0.0
    steps = 0
    start = time.perf_counter()
    f = field.copy()
    apply_boundary(f, bc, t, physics)
    active = obstacle.active if obstacle is not None else None
    while t < config.t_end and steps < config.max_steps:
        op.step = steps
        try:
            dt = compute_dt(f, physics, config, t, active)
        except AdmissibilityError as exc:
            raise SimulationAborted(str(exc), steps, 0, t, f) from exc
        if dt <= 0.0:
            break
        t0 = time.perf_counter()
        try:
            with np.errstate(all="ignore"):
                new = rk3_step(f, op, dt, t, post_stage)
            if not np.all(np.isfinite(new.q)):
                raise FloatingPointError("non-finite stage state")
        except (FloatingPointError, AdmissibilityError) as exc:
            raise SimulationAborted(str(exc), steps, op.stage, t, f) from exc
        timer.add("time-integration", t0)
        f = new
        t = t + dt if config.t_end - (t + dt) > 1e-14 * max(1.0, config.t_end) else config.t_end
        steps += 1
        if callback is not None:
            callback(steps, t, f)
    apply_boundary(f, bc, t, physics)
    timings = dict(timer.seconds)
    # the integration total includes the phases; report its own overhead separately
    inner = sum(v for k, v in timings.items() if k != "time-integration")
    timings["time-integration"] = max(timings.get("time-integration", 0.0) - inner, 0.0)
    return RunResult(f, t, steps, op.history, timings, time.perf_counter() - start)
