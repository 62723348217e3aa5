"""Run and sweep configuration: strict TOML documents resolved to validated
model objects. Unknown keys are errors so a typo cannot silently change a
sweep."""

from __future__ import annotations

import itertools

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .core import (
    Grid,
    InitialData,
    ModelParameters,
    ScalarField,
    field_from_csv,
    validate_initial_data,
    validate_parameters,
)
from .diagnostics import DiagnosticsConfig, tau_for
from .errors import ParseError
from .stepping import SolverOptions, StepControl

_PARAM_KEYS = {"chi", "r", "mu", "k", "alpha", "beta", "kappa"}
_GRID_KEYS = {"nx", "ny", "lx", "ly"}
_INITIAL_KEYS = {
    "kind", "u0", "v0", "centers", "widths", "amplitudes", "v_background",
    "count", "u_path", "v_path",
}
_CONTROL_KEYS = {
    "t_end", "dt_init", "dt_min", "dt_max", "cfl_safety", "blowup_threshold",
}
_DIAG_KEYS = {
    "sample_interval", "p_exponent", "q_exponent", "lam",
    "bound_tolerance", "plateau_tolerance",
}
_SOLVER_KEYS = {"tol", "max_iter", "jacobi"}
_TOP_KEYS = {
    "output_dir", "seed", "params", "grid", "initial", "control", "diag",
    "solver", "sweep",
}
_SWEEP_KEYS = {"axes", "max_parallel", "max_runs"}


@dataclass(frozen=True)
class InitialSpec:
    """Declarative initial data; resolved against a grid and a seed."""

    kind: str  # constant | gaussian_bumps | from_file
    u0: float = 1.0
    v0: float = 1.0
    centers: Optional[List[List[float]]] = None
    widths: object = 0.08
    amplitudes: object = 1.0
    v_background: float = 0.01
    count: int = 3
    u_path: Optional[str] = None
    v_path: Optional[str] = None

    def build(self, grid: Grid, seed: int) -> InitialData:
        if self.kind == "constant":
            init = InitialData(ScalarField.full(grid, self.u0),
                               ScalarField.full(grid, self.v0))
        elif self.kind == "gaussian_bumps":
            init = self._bumps(grid, seed)
        elif self.kind == "from_file":
            init = InitialData(field_from_csv(self.u_path),
                               field_from_csv(self.v_path))
        else:
            raise ParseError(f"unknown initial kind {self.kind!r}", key="kind")
        return validate_initial_data(init, grid)

    def _bumps(self, grid: Grid, seed: int) -> InitialData:
        rng = np.random.default_rng(seed)
        if self.centers is not None:
            centers = np.asarray(self.centers, dtype=float)
        else:
            # keep random centers away from the boundary
            centers = rng.uniform([0.2 * grid.lx, 0.2 * grid.ly],
                                  [0.8 * grid.lx, 0.8 * grid.ly],
                                  size=(self.count, 2))
        n = len(centers)
        widths = np.broadcast_to(np.asarray(self.widths, dtype=float), (n,))
        amps = np.broadcast_to(np.asarray(self.amplitudes, dtype=float), (n,))
        x, y = grid.cell_centers()
        u = np.zeros(grid.shape)
        for (cx, cy), w, a in zip(centers, widths, amps):
            u += a * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * w * w))
        return InitialData(ScalarField(u, grid),
                           ScalarField.full(grid, self.v_background))


@dataclass(frozen=True)
class RunConfig:
    params: ModelParameters
    grid: Grid
    initial: InitialSpec
    control: StepControl
    diag: DiagnosticsConfig
    solver: SolverOptions = SolverOptions()
    output_dir: str = "out"
    seed: int = 0

    def build_initial(self) -> InitialData:
        return self.initial.build(self.grid, self.seed)


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    axes: List[Tuple[str, list]] = field(default_factory=list)
    max_parallel: int = 1
    max_runs: int = 512


def _check_keys(table: dict, allowed: set, where: str) -> None:
    for key in table:
        if key not in allowed:
            raise ParseError(f"unknown key {key!r} in [{where}]", key=key)


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ParseError(f"[{name}] must be a table", key=name)
    return sec


def parse_config(text: str) -> RunConfig:
    """Parse a TOML run configuration (strict: unknown keys are errors)."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"TOML parse error: {exc}") from exc
    return _resolve_run(doc)


def _resolve_run(doc: dict) -> RunConfig:
    _check_keys(doc, _TOP_KEYS - {"sweep"}, "top level")

    par = _section(doc, "params")
    _check_keys(par, _PARAM_KEYS, "params")
    missing = _PARAM_KEYS - {"kappa"} - set(par)
    if missing:
        raise ParseError(f"[params] missing keys: {sorted(missing)}")
    params = validate_parameters(ModelParameters(
        chi=float(par["chi"]), r=float(par["r"]), mu=float(par["mu"]),
        k=float(par["k"]), alpha=float(par["alpha"]), beta=float(par["beta"]),
        kappa=int(par.get("kappa", 1)),
    ))

    gr = _section(doc, "grid")
    _check_keys(gr, _GRID_KEYS, "grid")
    grid = Grid(int(gr.get("nx", 64)), int(gr.get("ny", 64)),
                float(gr.get("lx", 1.0)), float(gr.get("ly", 1.0)))

    ini = dict(_section(doc, "initial"))
    _check_keys(ini, _INITIAL_KEYS, "initial")
    ini.setdefault("kind", "constant")
    initial = InitialSpec(**ini)

    ctl = _section(doc, "control")
    _check_keys(ctl, _CONTROL_KEYS, "control")
    if "t_end" not in ctl:
        raise ParseError("[control] missing t_end")
    control = StepControl(
        t_end=float(ctl["t_end"]),
        dt_init=float(ctl.get("dt_init", 1e-4)),
        dt_min=float(ctl.get("dt_min", 1e-12)),
        dt_max=float(ctl.get("dt_max", 1e-2)),
        cfl_safety=float(ctl.get("cfl_safety", 0.4)),
        blowup_threshold=(float(ctl["blowup_threshold"])
                          if "blowup_threshold" in ctl else None),
    )

    dg = _section(doc, "diag")
    _check_keys(dg, _DIAG_KEYS, "diag")
    diag = DiagnosticsConfig(
        sample_interval=float(dg.get("sample_interval", 0.1)),
        p_exponent=float(dg.get("p_exponent", 2.0)),
        q_exponent=float(dg.get("q_exponent", 0.5)),
        lam=float(dg.get("lam", 0.1)),
        tau=tau_for(control.t_end),
        bound_tolerance=float(dg.get("bound_tolerance", 1e-6)),
        plateau_tolerance=float(dg.get("plateau_tolerance", 0.05)),
    )

    so = _section(doc, "solver")
    _check_keys(so, _SOLVER_KEYS, "solver")
    solver = SolverOptions(
        tol=float(so.get("tol", 1e-10)),
        max_iter=(int(so["max_iter"]) if "max_iter" in so else None),
        jacobi=bool(so.get("jacobi", False)),
    )

    return RunConfig(
        params=params, grid=grid, initial=initial, control=control,
        diag=diag, solver=solver,
        output_dir=str(doc.get("output_dir", "out")),
        seed=int(doc.get("seed", 0)),
    )


def parse_sweep_config(text: str) -> SweepConfig:
    """Parse a sweep document: a run config plus a [sweep] table with axes."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"TOML parse error: {exc}") from exc
    _check_keys(doc, _TOP_KEYS, "top level")
    sw = dict(doc.pop("sweep", {}))
    _check_keys(sw, _SWEEP_KEYS, "sweep")
    base = _resolve_run(doc)
    axes = []
    for ax in sw.get("axes", []):
        if set(ax) != {"name", "values"}:
            raise ParseError(f"sweep axis needs exactly name+values, got {sorted(ax)}")
        axes.append((str(ax["name"]), list(ax["values"])))
    cfg = SweepConfig(
        base=base, axes=axes,
        max_parallel=int(sw.get("max_parallel", 1)),
        max_runs=int(sw.get("max_runs", 512)),
    )
    n = 1
    for _, values in cfg.axes:
        n *= len(values)
    if n > cfg.max_runs:
        raise ParseError(f"sweep size {n} exceeds limit {cfg.max_runs}")
    return cfg


_AXIS_SECTIONS = {"params", "grid", "control", "diag", "solver", "initial"}


def apply_axis(cfg: RunConfig, name: str, value) -> RunConfig:
    """Return a copy of cfg with one dotted parameter replaced, e.g.
    'params.chi' or 'control.t_end'. Top-level 'seed' is also allowed."""
    if name == "seed":
        return dataclasses_replace(cfg, seed=int(value))
    if "." not in name:
        raise ParseError(f"sweep axis {name!r} must be section.key or 'seed'")
    section, key = name.split(".", 1)
    if section not in _AXIS_SECTIONS:
        raise ParseError(f"unknown sweep section {section!r}")
    obj = getattr(cfg, "params" if section == "params" else section)
    if not hasattr(obj, key):
        raise ParseError(f"unknown sweep key {key!r} in section {section!r}")
    new_obj = dataclasses_replace(obj, **{key: value})
    if section == "params":
        new_obj = validate_parameters(new_obj)
    cfg = dataclasses_replace(cfg, **{section: new_obj})
    if section == "control" and key == "t_end":
        cfg = dataclasses_replace(
            cfg, diag=dataclasses_replace(cfg.diag, tau=tau_for(float(value)))
        )
    return cfg


def dataclasses_replace(obj, **kw):
    import dataclasses
    return dataclasses.replace(obj, **kw)


def sweep_points(cfg: SweepConfig):
    """Cartesian product of axis values in declaration order; yields
    (index, {axis: value}, RunConfig)."""
    names = [n for n, _ in cfg.axes]
    value_lists = [v for _, v in cfg.axes]
    for idx, combo in enumerate(itertools.product(*value_lists)):
        rc = cfg.base
        for name, value in zip(names, combo):
            rc = apply_axis(rc, name, value)
        yield idx, dict(zip(names, combo)), rc
