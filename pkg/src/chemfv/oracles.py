"""Independent reference solutions and convergence studies.

Nothing here shares stepping logic with the simulator: the logistic flow is
closed form, the signal ODE is adaptive quadrature on that closed form, and
the heat solution is an exact Neumann eigenmode."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from .core import Grid, InitialData, ModelParameters, ScalarField
from .errors import InsufficientResolution
from .stepping import RunSummary, StepControl, StepStatus, run


def logistic_oracle(u0: float, r: float, mu: float, t: float) -> float:
    """Exact solution of u' = r u - mu u^2."""
    if u0 == 0.0:
        return 0.0
    ert = math.exp(r * t)
    return r * u0 * ert / (r + mu * u0 * (ert - 1.0))


def homogeneous_v_oracle(v0: float, u_path: Tuple[float, float, float],
                         alpha: float, beta: float, t: float) -> float:
    """Exact v' = -alpha v + beta u(t) along the closed-form logistic u
    path (u0, r, mu); the convolution integral is adaptive quadrature."""
    u0, r, mu = u_path
    val, _ = quad(
        lambda s: math.exp(-alpha * (t - s)) * logistic_oracle(u0, r, mu, s),
        0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200,
    )
    return math.exp(-alpha * t) * v0 + beta * val


def heat_eigenmode_oracle(amplitude: float, mode: Tuple[int, int],
                          g: Grid, t: float) -> ScalarField:
    """Exact Neumann heat solution 1 + A cos(mx pi x/lx) cos(my pi y/ly)
    exp(-pi^2((mx/lx)^2+(my/ly)^2) t), sampled at cell centers."""
    mx, my = mode
    decay = math.exp(-math.pi**2 * ((mx / g.lx) ** 2 + (my / g.ly) ** 2) * t)
    x, y = g.cell_centers()
    vals = 1.0 + amplitude * np.cos(mx * np.pi * x / g.lx) \
        * np.cos(my * np.pi * y / g.ly) * decay
    return ScalarField(vals, g)


@dataclass(frozen=True)
class OracleCase:
    """A verification case with an exact evaluator for u."""

    name: str
    params: ModelParameters
    make_init: Callable[[Grid], InitialData]
    exact_u: Callable[[Grid, float], ScalarField]
    norm: str = "Linf"  # or "L2"
    t_end: float = 1.0


def _error(num: np.ndarray, exact: np.ndarray, norm: str, area: float) -> float:
    diff = num - exact
    if norm == "Linf":
        return float(np.abs(diff).max())
    return float(np.sqrt((diff * diff).sum() * area))


def _run_case(case: OracleCase, g: Grid, dt: float) -> Tuple[float, RunSummary]:
    control = StepControl(
        t_end=case.t_end, dt_init=dt, dt_min=dt, dt_max=dt, cfl_safety=1.0,
        blowup_threshold=1e30,
    )
    summary = run(case.make_init(g), case.params, control)
    if summary.outcome.status is not StepStatus.ADVANCED:
        raise RuntimeError(
            f"oracle case {case.name} failed: {summary.outcome.status}"
        )
    exact = case.exact_u(g, case.t_end).values
    err = _error(summary.outcome.state.u.values, exact, case.norm, g.cell_area)
    return err, summary


def _fit_order(hs: Sequence[float], errs: Sequence[float]) -> float:
    slope, _ = np.polyfit(np.log(hs), np.log(errs), 1)
    return float(slope)


def convergence_study(
    case: OracleCase,
    grids: Sequence[Grid],
    dts: Sequence[float],
    axis: str = "spatial",
) -> dict:
    """Observed-order report.

    axis="spatial": pairs (grids[i], dts[i]) with dt chosen so temporal error
    is subdominant; order fitted against h. axis="temporal": fixed grids[0],
    order fitted against dt."""
    errors: List[float] = []
    if axis == "spatial":
        for g, dt in zip(grids, dts):
            errors.append(_run_case(case, g, dt)[0])
        xs = [g.hx for g in grids]
    elif axis == "temporal":
        g = grids[0]
        for dt in dts:
            errors.append(_run_case(case, g, dt)[0])
        xs = list(dts)
    else:
        raise ValueError(f"unknown axis {axis!r}")

    if any(e2 >= e1 for e1, e2 in zip(errors, errors[1:])):
        raise InsufficientResolution(
            f"errors not monotonically decreasing: {errors}"
        )
    return {
        "case": case.name,
        "axis": axis,
        "observed_order": _fit_order(xs, errors),
        "error_table": [
            {"h" if axis == "spatial" else "dt": x, "error": e}
            for x, e in zip(xs, errors)
        ],
    }


def write_order_report(reports: List[dict], path) -> None:
    with open(path, "w") as fh:
        json.dump(reports, fh, indent=2)
        fh.write("\n")


# --- stock cases ------------------------------------------------------------

def homogeneous_logistic_case(u0: float = 2.0, r: float = 1.0, mu: float = 1.0,
                              t_end: float = 5.0) -> OracleCase:
    """Spatially constant data: all spatial operators vanish and u follows
    the scalar logistic flow."""
    params = ModelParameters(chi=1.0, r=r, mu=mu, k=0.5, alpha=1.0, beta=1.0)

    def make_init(g: Grid) -> InitialData:
        return InitialData(ScalarField.full(g, u0), ScalarField.full(g, 1.0))

    def exact_u(g: Grid, t: float) -> ScalarField:
        return ScalarField.full(g, logistic_oracle(u0, r, mu, t))

    return OracleCase("homogeneous_logistic", params, make_init, exact_u,
                      norm="Linf", t_end=t_end)


def heat_eigenmode_case(amplitude: float = 0.5, mode: Tuple[int, int] = (1, 0),
                        t_end: Optional[float] = None) -> OracleCase:
    """Pure diffusion (chi = r = mu = 0): u is an exact Neumann eigenmode."""
    params = ModelParameters(chi=0.0, r=0.0, mu=0.0, k=0.5, alpha=1.0, beta=1.0)
    if t_end is None:
        t_end = 1.0 / math.pi**2

    def make_init(g: Grid) -> InitialData:
        return InitialData(heat_eigenmode_oracle(amplitude, mode, g, 0.0),
                           ScalarField.full(g, 1.0))

    def exact_u(g: Grid, t: float) -> ScalarField:
        return heat_eigenmode_oracle(amplitude, mode, g, t)

    return OracleCase("heat_eigenmode", params, make_init, exact_u,
                      norm="Linf", t_end=t_end)
