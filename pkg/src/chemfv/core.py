"""Domain types: parameters, grid, fields, state, initial data.

Fields are cell-centered on a rectangular grid [0,lx] x [0,ly]; storage is
row-major with flat index j*nx + i (i along x, j along y).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NonnegativityViolation,
    OutOfRange,
    PositivityViolation,
    ZeroMass,
)


@dataclass(frozen=True)
class ModelParameters:
    """Constants of the chemotaxis system.

    chi    taxis strength (> 0)
    r      growth rate (> 0)
    mu     logistic damping (> 0)
    k      sensitivity exponent, taxis coefficient chi / v**k (0 < k < 1)
    alpha  signal decay (> 0)
    beta   signal production (> 0)
    kappa  1 = fully parabolic signal equation, 0 = elliptic signal equation

    The dataclass itself accepts any values so that degenerate cases
    (e.g. r = mu = 0 conservation runs, chi = 0 heat runs) can be built
    for verification; `validate_parameters` enforces the admissible ranges.
    """

    chi: float
    r: float
    mu: float
    k: float
    alpha: float
    beta: float
    kappa: int = 1


def validate_parameters(p: ModelParameters) -> ModelParameters:
    """Check the admissible ranges; return p unchanged if all hold."""
    for name in ("chi", "r", "mu", "alpha", "beta"):
        val = getattr(p, name)
        if not (np.isfinite(val) and val > 0):
            raise OutOfRange(name, val, f"{name} > 0")
    if not (np.isfinite(p.k) and 0.0 < p.k < 1.0):
        raise OutOfRange("k", p.k, "k in (0, 1)")
    if p.kappa not in (0, 1):
        raise OutOfRange("kappa", p.kappa, "kappa in {0, 1}")
    return p


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid: nx x ny cells on [0,lx] x [0,ly]."""

    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise OutOfRange("nx/ny", (self.nx, self.ny), "nx, ny >= 3")
        if not (self.lx > 0 and self.ly > 0):
            raise OutOfRange("lx/ly", (self.lx, self.ly), "lx, ly > 0")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @property
    def shape(self):
        return (self.ny, self.nx)

    def cell_centers(self):
        """Return (x, y) arrays of shape (ny, nx) with cell-center coordinates."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y)


@dataclass(frozen=True)
class ScalarField:
    """Cell-centered real values over a grid, stored as a (ny, nx) array."""

    values: np.ndarray
    grid: Grid
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.shape != self.grid.shape:
            if arr.size == self.grid.nx * self.grid.ny:
                arr = arr.reshape(self.grid.shape)
            else:
                raise ValueError(
                    f"field size {arr.size} does not match grid "
                    f"{self.grid.nx}x{self.grid.ny}"
                )
        object.__setattr__(self, "values", arr)
        if self.check and not np.isfinite(arr).all():
            raise ValueError("field contains non-finite values")

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(np.full(grid.shape, float(value)), grid)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        x, y = grid.cell_centers()
        return cls(np.asarray(fn(x, y), dtype=np.float64), grid)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


def integrate(f: ScalarField) -> float:
    """Midpoint-rule integral over the domain: sum of values times cell area."""
    return float(f.values.sum() * f.grid.cell_area)


@dataclass(frozen=True)
class SimState:
    """Snapshot of the solution pair (u, v) at time t."""

    u: ScalarField
    v: ScalarField
    t: float
    last_dt: float = 0.0
    step_count: int = 0


@dataclass(frozen=True)
class InitialData:
    u0: ScalarField
    v0: ScalarField


def validate_initial_data(d: InitialData, g: Grid) -> InitialData:
    """Check sign and mass constraints on the initial data."""
    u0, v0 = d.u0.values, d.v0.values
    if u0.shape != g.shape or v0.shape != g.shape:
        raise ValueError("initial data not defined on the given grid")
    if u0.min() < 0:
        raise NonnegativityViolation("u0 has negative entries")
    if u0.sum() * g.cell_area <= 0:
        raise ZeroMass("u0 integrates to zero")
    if v0.min() <= 0:
        raise PositivityViolation("v0 has nonpositive entries")
    return d


# --- field serialization (checkpoint format) --------------------------------

def field_to_csv(f: ScalarField, path) -> None:
    """Write a field as CSV: header 'nx,ny,lx,ly' then one value per line
    in row-major order. Values use repr formatting so float64 round-trips
    exactly."""
    g = f.grid
    with open(path, "w") as fh:
        fh.write("nx,ny,lx,ly\n")
        fh.write(f"{g.nx},{g.ny},{g.lx!r},{g.ly!r}\n")
        for val in f.values.ravel():
            fh.write(f"{float(val)!r}\n")


def field_from_csv(path) -> ScalarField:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "nx,ny,lx,ly":
            raise ValueError(f"bad field CSV header: {header!r}")
        nx_s, ny_s, lx_s, ly_s = fh.readline().strip().split(",")
        grid = Grid(int(nx_s), int(ny_s), float(lx_s), float(ly_s))
        vals = np.loadtxt(io.StringIO(fh.read()), dtype=np.float64)
    return ScalarField(vals.reshape(grid.shape), grid)
