"""Spatial operators on fields: Neumann Laplacian, gradient magnitude,
and the conservative donor-cell taxis flux divergence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends
from .core import ModelParameters, ScalarField
from .errors import SingularSignal


@dataclass(frozen=True)
class FaceFluxSet:
    """Taxis fluxes on cell faces: flux_x over vertical faces (ny, nx+1),
    flux_y over horizontal faces (ny+1, nx). Boundary faces are zero."""

    flux_x: np.ndarray
    flux_y: np.ndarray
    max_speed_x: float
    max_speed_y: float


def laplacian(f: ScalarField, backend=None) -> ScalarField:
    """5-point Laplacian with mirror-reflected ghost cells (zero normal
    difference across every boundary face)."""
    be = backend or backends.active
    g = f.grid
    return ScalarField(be.laplacian(f.values, g.hx, g.hy), g, check=False)


def gradient_squared(f: ScalarField, backend=None) -> ScalarField:
    """Per-cell |grad f|^2, central in the interior, mirror-consistent
    one-sided at boundary cells."""
    be = backend or backends.active
    g = f.grid
    return ScalarField(be.gradient_squared(f.values, g.hx, g.hy), g, check=False)


def chemotactic_flux(
    u: ScalarField,
    v: ScalarField,
    p: ModelParameters,
    v_floor: float = 0.0,
    backend=None,
) -> FaceFluxSet:
    """Donor-cell face fluxes of chi * u * grad(v) / v_face**k.

    v_face is the arithmetic mean of the two adjacent cells. Raises
    SingularSignal when min(v) has fallen below the caller's positivity
    floor: the state is numerically untrustworthy, not a model prediction.
    """
    if v.values.min() <= max(v_floor, 0.0):
        raise SingularSignal(
            f"min(v) = {v.values.min():.3e} at or below floor {v_floor:.3e}"
        )
    be = backend or backends.active
    g = u.grid
    fx, fy, mwx, mwy = be.chem_flux(u.values, v.values, p.chi, p.k, g.hx, g.hy)
    return FaceFluxSet(fx, fy, mwx, mwy)


def chemotactic_divergence(
    u: ScalarField,
    v: ScalarField,
    p: ModelParameters,
    v_floor: float = 0.0,
    backend=None,
) -> ScalarField:
    """Divergence of the taxis flux: net outflux per cell divided by cell
    area. Sums to zero against cell areas (discrete conservation)."""
    be = backend or backends.active
    fl = chemotactic_flux(u, v, p, v_floor=v_floor, backend=be)
    g = u.grid
    div = be.flux_divergence(fl.flux_x, fl.flux_y, g.hx, g.hy)
    return ScalarField(div, g, check=False)
