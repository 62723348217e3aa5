"""IMEX time stepping: explicit donor-cell taxis and reaction, implicit
diffusion/absorption, with dt adaptation, positivity guarding, and sup-norm
blow-up detection."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import backends
from .core import Grid, InitialData, ModelParameters, ScalarField, SimState
from .errors import NoConvergence, SingularSignal
from .operators import chemotactic_flux
from .solver import HelmholtzProblem, solve_helmholtz


class StepStatus(enum.Enum):
    ADVANCED = "Advanced"
    BLOWUP_DETECTED = "BlowupDetected"
    SOLVER_FAILURE = "SolverFailure"
    POSITIVITY_FAILURE = "PositivityFailure"
    SINGULAR_SIGNAL = "SingularSignal"


@dataclass(frozen=True)
class StepControl:
    t_end: float
    dt_init: float = 1e-4
    dt_min: float = 1e-12
    dt_max: float = 1e-2
    cfl_safety: float = 0.4
    blowup_threshold: Optional[float] = None  # None: 1e6 * max(u0), set by run()

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not (0 < self.cfl_safety <= 1):
            raise ValueError("cfl_safety must be in (0, 1]")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")


@dataclass(frozen=True)
class StepOutcome:
    state: SimState
    status: StepStatus
    message: str = ""


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: Optional[int] = None
    jacobi: bool = False


@dataclass
class RunSummary:
    outcome: StepOutcome
    steps: int
    wall_time: float
    sup_u_max: float


def _negativity_floor(arr):
    """Tolerated undershoot: solver roundoff, not a CFL violation."""
    return -1e-12 * max(arr.max(), 0.0)


def _attempt(state, p, dt, div, opts, backend):
    """One IMEX update at fixed dt. Returns (state, None) or (None, reason)."""
    u, v = state.u, state.v
    g = u.grid

    # u: explicit taxis + reaction, implicit diffusion
    expl = -div + p.r * u.values - p.mu * u.values * u.values
    rhs_u = ScalarField(u.values / dt + expl, g, check=False)
    try:
        u_new, _, _ = solve_helmholtz(
            HelmholtzProblem(1.0 / dt, rhs_u, opts.tol, opts.max_iter, opts.jacobi),
            x0=u, backend=backend,
        )
    except NoConvergence as exc:
        return None, (StepStatus.SOLVER_FAILURE, str(exc))
    uv = u_new.values
    if uv.min() < _negativity_floor(uv):
        return None, (StepStatus.POSITIVITY_FAILURE,
                      f"min(u) = {uv.min():.3e} after implicit solve")
    if uv.min() < 0.0:
        uv = np.maximum(uv, 0.0)  # flush solver roundoff
        u_new = ScalarField(uv, g, check=False)

    # v: implicit absorption+diffusion (kappa=1, production at old u) or
    # elliptic constraint at the new time (kappa=0, production at new u)
    if p.kappa == 1:
        rhs_v = ScalarField(v.values / dt + p.beta * u.values, g, check=False)
        shift = 1.0 / dt + p.alpha
    else:
        rhs_v = ScalarField(p.beta * uv, g, check=False)
        shift = p.alpha
    try:
        v_new, _, _ = solve_helmholtz(
            HelmholtzProblem(shift, rhs_v, opts.tol, opts.max_iter, opts.jacobi),
            x0=v, backend=backend,
        )
    except NoConvergence as exc:
        return None, (StepStatus.SOLVER_FAILURE, str(exc))
    if v_new.values.min() <= 0.0:
        return None, (StepStatus.POSITIVITY_FAILURE,
                      f"min(v) = {v_new.values.min():.3e} after implicit solve")

    new_state = SimState(u_new, v_new, state.t + dt, dt, state.step_count + 1)
    return new_state, None


def _cfl_dt(fl, state, p, c, g):
    """CFL-limited dt: face-speed bound for the explicit taxis term and a
    reaction bound, clipped to [dt_min, dt_max]."""
    dt = c.dt_max
    if fl.max_speed_x > 0:
        dt = min(dt, c.cfl_safety * g.hx / fl.max_speed_x)
    if fl.max_speed_y > 0:
        dt = min(dt, c.cfl_safety * g.hy / fl.max_speed_y)
    reac = p.r + 2.0 * p.mu * max(state.u.values.max(), 0.0)
    if reac > 0:
        dt = min(dt, c.cfl_safety / reac)
    return max(dt, c.dt_min)


def propose_dt(state, p, c, v_floor=0.0, backend=None):
    """dt the integrator would pick for this state (CFL + reaction bound)."""
    be = backend or backends.active
    fl = chemotactic_flux(state.u, state.v, p, v_floor=v_floor, backend=be)
    return _cfl_dt(fl, state, p, c, state.u.grid)


def step(
    s: SimState,
    p: ModelParameters,
    c: StepControl,
    v_floor: float = 0.0,
    solver: SolverOptions = SolverOptions(),
    dt_cap: Optional[float] = None,
    backend=None,
) -> StepOutcome:
    """Advance one IMEX step. On PositivityFailure or NoConvergence the step
    is retried once at dt/2 (failing outright if dt/2 < dt_min)."""
    be = backend or backends.active
    g = s.u.grid
    try:
        fl = chemotactic_flux(s.u, s.v, p, v_floor=v_floor, backend=be)
    except SingularSignal as exc:
        return StepOutcome(s, StepStatus.SINGULAR_SIGNAL, str(exc))
    div = be.flux_divergence(fl.flux_x, fl.flux_y, g.hx, g.hy)
    dt = _cfl_dt(fl, s, p, c, g)
    if dt_cap is not None:
        dt = min(dt, dt_cap)

    reason = None
    for retry in range(2):
        if retry:
            dt = 0.5 * dt
            if dt < c.dt_min:
                break
        new_state, reason = _attempt(s, p, dt, div, solver, be)
        if new_state is not None:
            threshold = c.blowup_threshold
            if threshold is not None and new_state.u.values.max() > threshold:
                return StepOutcome(
                    new_state, StepStatus.BLOWUP_DETECTED,
                    f"max(u) = {new_state.u.values.max():.3e} "
                    f"exceeds threshold {threshold:.3e}",
                )
            return StepOutcome(new_state, StepStatus.ADVANCED)
    status, msg = reason
    return StepOutcome(s, status, msg)


def initial_state(init: InitialData, p: ModelParameters,
                  solver: SolverOptions = SolverOptions(),
                  backend=None) -> SimState:
    """Build the t=0 state. For kappa=0 the signal carries no initial
    condition: v(0) solves the elliptic equation (-Lap + alpha) v = beta*u0,
    with the provided v0 only seeding the iteration."""
    if p.kappa == 0:
        g = init.u0.grid
        rhs = ScalarField(p.beta * init.u0.values, g, check=False)
        v, _, _ = solve_helmholtz(
            HelmholtzProblem(p.alpha, rhs, solver.tol, solver.max_iter),
            x0=init.v0, backend=backend,
        )
    else:
        v = init.v0
    return SimState(init.u0, v, 0.0, 0.0, 0)


def run(
    init: InitialData,
    p: ModelParameters,
    c: StepControl,
    sink: Optional[Callable[[SimState], None]] = None,
    sample_interval: Optional[float] = None,
    solver: SolverOptions = SolverOptions(),
    backend=None,
) -> RunSummary:
    """Iterate step() until t_end or a non-Advanced status.

    The sink is invoked on the initial state, at every crossing of the
    sample cadence (steps land exactly on sample times), and on the final
    state. Returns the last outcome plus wall time, step count, and the
    running max of sup(u)."""
    be = backend or backends.active
    t0 = time.perf_counter()
    state = initial_state(init, p, solver=solver, backend=be)

    if c.blowup_threshold is None:
        c = replace(c, blowup_threshold=1e6 * max(init.u0.values.max(), 1.0))
    v_floor = 1e-12 * state.v.values.min()

    sup_u_max = float(state.u.values.max())
    if sink is not None:
        sink(state)
    next_sample = sample_interval if (sink is not None and sample_interval) else None

    outcome = StepOutcome(state, StepStatus.ADVANCED)
    steps = 0
    eps = 1e-12 * max(c.t_end, 1.0)
    while state.t < c.t_end - eps:
        dt_cap = c.t_end - state.t
        if next_sample is not None:
            dt_cap = min(dt_cap, next_sample - state.t)
        outcome = step(state, p, c, v_floor=v_floor, solver=solver,
                       dt_cap=dt_cap, backend=be)
        state = outcome.state
        steps += 1
        sup_u_max = max(sup_u_max, float(state.u.values.max()))
        if outcome.status is not StepStatus.ADVANCED:
            break
        if next_sample is not None and state.t >= next_sample - eps:
            if sink is not None:
                sink(state)
            next_sample += sample_interval
    else:
        # reached t_end; emit a final sample unless it just happened
        if sink is not None and steps > 0 and (
            next_sample is None or abs(state.t - (next_sample - sample_interval)) > eps
        ):
            sink(state)

    return RunSummary(outcome, steps, time.perf_counter() - t0, sup_u_max)
