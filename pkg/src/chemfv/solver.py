"""Matrix-free CG solver for (shift*I - Lap) x = b with Neumann Laplacian.

Used for the implicit diffusion steps (shift = 1/dt [+ alpha]) and the
elliptic signal equation (shift = alpha). The operator is SPD for any
shift > 0; no preconditioner by default (an optional Jacobi sweep exists
behind a flag but the constant diagonal makes it nearly a no-op)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import backends
from .core import ScalarField
from .errors import NoConvergence


@dataclass(frozen=True)
class HelmholtzProblem:
    shift: float
    rhs: ScalarField
    tol: float = 1e-10
    max_iter: Optional[int] = None  # default 10 * (nx + ny)
    jacobi: bool = False  # optional diagonal preconditioner

    def __post_init__(self):
        if not self.shift > 0:
            raise ValueError("shift must be > 0 for an SPD operator")

    @property
    def iter_budget(self) -> int:
        if self.max_iter is not None:
            return self.max_iter
        g = self.rhs.grid
        return 10 * (g.nx + g.ny)


def apply_operator(shift: float, x: np.ndarray, hx: float, hy: float,
                   backend=None) -> np.ndarray:
    be = backend or backends.active
    return shift * x - be.laplacian(x, hx, hy)


def _operator_diagonal(shift, g):
    """Diagonal of shift*I - Lap: boundary cells lose mirror contributions."""
    dx = np.full(g.nx, 2.0)
    dx[0] = dx[-1] = 1.0
    dy = np.full(g.ny, 2.0)
    dy[0] = dy[-1] = 1.0
    return shift + dx[None, :] / (g.hx * g.hx) + dy[:, None] / (g.hy * g.hy)


def _pcg_jacobi(shift, b, x0, tol, max_iter, g, be):
    """Jacobi-preconditioned CG; only used when the flag is set."""
    minv = 1.0 / _operator_diagonal(shift, g)
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_operator(shift, x, g.hx, g.hy, be)
    z = minv * r
    p = z.copy()
    rz = float(np.vdot(r, z))
    bnorm = float(np.linalg.norm(b))
    it = 0
    while float(np.linalg.norm(r)) > tol * bnorm and it < max_iter:
        ap = apply_operator(shift, p, g.hx, g.hy, be)
        alpha = rz / float(np.vdot(p, ap))
        x += alpha * p
        r -= alpha * ap
        z = minv * r
        rz_new = float(np.vdot(r, z))
        p *= rz_new / rz
        p += z
        rz = rz_new
        it += 1
    return x, it, float(np.linalg.norm(r) / bnorm)


def solve_helmholtz(prob: HelmholtzProblem, x0: Optional[ScalarField] = None,
                    backend=None):
    """Solve to relative residual <= tol. Returns (solution, iterations,
    relative_residual); raises NoConvergence when the budget is exhausted.

    The constant mode is corrected exactly after CG: integrating the
    equation gives mean(x) = mean(b)/shift since the Laplacian integrates
    to zero, so the solution's mean is known in closed form.
    """
    be = backend or backends.active
    g = prob.rhs.grid
    b = prob.rhs.values
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return ScalarField(np.zeros(g.shape), g, check=False), 0, 0.0

    budget = prob.iter_budget
    x = None if x0 is None else x0.values
    total_it = 0
    # outer loop guards against recurrence-residual drift: the true
    # residual is recomputed and CG restarted if it still exceeds tol
    for _ in range(3):
        if prob.jacobi:
            x, it, _ = _pcg_jacobi(
                prob.shift, b, x, prob.tol, budget - total_it, g, be
            )
        else:
            x, it, _ = be.cg_helmholtz(
                prob.shift, b, x, prob.tol, budget - total_it, g.hx, g.hy
            )
        total_it += it
        x += np.mean(b) / prob.shift - np.mean(x)
        res = float(np.linalg.norm(b - apply_operator(prob.shift, x, g.hx, g.hy, be)))
        rel = res / bnorm
        if rel <= prob.tol:
            return ScalarField(x, g, check=False), total_it, rel
        if total_it >= budget:
            break
    raise NoConvergence(total_it, rel)
