"""Command-line entry points: run, sweep, verify, plot.

Exit codes for `run`: 0 reached t_end, 2 blow-up detected, 3 solver or
positivity failure, 4 singular signal, 1 configuration error."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import backends
from .config import RunConfig, parse_config, parse_sweep_config, sweep_points
from .core import Grid, ModelParameters, ScalarField, SimState
from .diagnostics import (
    DiagnosticsCollector,
    DiagnosticsRecord,
    verdicts,
    write_series_csv,
)
from .errors import ChemFVError, MissingColumn
from .oracles import (
    convergence_study,
    heat_eigenmode_case,
    homogeneous_logistic_case,
    write_order_report,
)
from .stepping import StepStatus, run

_EXIT_CODES = {
    StepStatus.ADVANCED: 0,
    StepStatus.BLOWUP_DETECTED: 2,
    StepStatus.SOLVER_FAILURE: 3,
    StepStatus.POSITIVITY_FAILURE: 3,
    StepStatus.SINGULAR_SIGNAL: 4,
}


def save_checkpoint(path, state: SimState, params: ModelParameters, control) -> None:
    """Single-file binary checkpoint: fields plus the parameters and step
    control needed for a bit-exact restart."""
    g = state.u.grid
    np.savez(
        path,
        u=state.u.values, v=state.v.values,
        t=state.t, last_dt=state.last_dt, step_count=state.step_count,
        grid=np.array([g.nx, g.ny, g.lx, g.ly]),
        params=json.dumps(dataclasses.asdict(params)),
        control=json.dumps(dataclasses.asdict(control)),
    )


def load_checkpoint(path):
    from .stepping import StepControl

    with np.load(path, allow_pickle=False) as data:
        nx, ny, lx, ly = data["grid"]
        g = Grid(int(nx), int(ny), float(lx), float(ly))
        state = SimState(
            ScalarField(data["u"], g), ScalarField(data["v"], g),
            float(data["t"]), float(data["last_dt"]), int(data["step_count"]),
        )
        params = ModelParameters(**json.loads(str(data["params"])))
        control = StepControl(**json.loads(str(data["control"])))
    return state, params, control


def run_single(cfg: RunConfig, output_dir=None) -> int:
    """Execute one run; write series CSV, bound report JSON, final-state
    checkpoint, and a summary. Partial artifacts are written on failure."""
    out = Path(output_dir or os.environ.get("CHEMFV_OUTPUT_DIR", cfg.output_dir))
    out.mkdir(parents=True, exist_ok=True)

    init = cfg.build_initial()
    control = cfg.control
    if control.blowup_threshold is None:
        control = dataclasses.replace(
            control, blowup_threshold=1e6 * max(init.u0.values.max(), 1.0)
        )
    collector = DiagnosticsCollector(cfg.diag, cfg.params)
    summary = run(
        init, cfg.params, control, sink=collector,
        sample_interval=cfg.diag.sample_interval, solver=cfg.solver,
    )
    outcome = summary.outcome

    write_series_csv(collector.records, out / "series.csv")
    report = verdicts(collector.records, cfg.params, cfg.grid, cfg.diag,
                      blowup_threshold=control.blowup_threshold)
    report.write(out / "bound_report.json")
    save_checkpoint(out / "final_state.npz", outcome.state, cfg.params, control)

    code = _EXIT_CODES[outcome.status]
    with open(out / "summary.txt", "w") as fh:
        fh.write(f"status: {outcome.status.value}\n")
        if outcome.message:
            fh.write(f"message: {outcome.message}\n")
        fh.write(f"final_t: {outcome.state.t!r}\n")
        fh.write(f"steps: {summary.steps}\n")
        fh.write(f"wall_time_s: {summary.wall_time:.3f}\n")
        fh.write(f"sup_u_max: {summary.sup_u_max!r}\n")
        fh.write(f"all_bounds_passed: {report.all_passed}\n")
        fh.write(f"backend: {backends.active.NAME}\n")
        fh.write(f"exit_code: {code}\n")
    return code


def _sweep_worker(args):
    idx, point, rc, out_root = args
    run_dir = Path(out_root) / f"run_{idx:04d}"
    try:
        code = run_single(rc, output_dir=run_dir)
    except ChemFVError as exc:
        (run_dir).mkdir(parents=True, exist_ok=True)
        with open(run_dir / "summary.txt", "w") as fh:
            fh.write(f"status: ConfigError\nmessage: {exc}\n")
        return idx, point, 1, {}
    with open(run_dir / "bound_report.json") as fh:
        rep = {v["name"]: v["pass"] if "pass" in v else v["passed"]
               for v in json.load(fh)}
    return idx, point, code, rep


def run_sweep(cfg, output_dir=None) -> int:
    """Run every sweep point; aggregate exit codes and verdicts. Row order
    follows the Cartesian-product iteration order regardless of completion
    order. Individual failures never abort the sweep."""
    out = Path(output_dir or os.environ.get("CHEMFV_OUTPUT_DIR",
                                            cfg.base.output_dir))
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(idx, point, rc, str(out)) for idx, point, rc in sweep_points(cfg)]

    if cfg.max_parallel > 1:
        with ProcessPoolExecutor(max_workers=cfg.max_parallel) as ex:
            results = list(ex.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    table = [
        {"index": idx, "point": point, "exit_code": code, "verdicts": rep}
        for idx, point, code, rep in results
    ]
    with open(out / "sweep_report.json", "w") as fh:
        json.dump(table, fh, indent=2)
        fh.write("\n")

    verdict_names = sorted({n for *_, rep in results for n in rep})
    axis_names = [n for n, _ in cfg.axes]
    with open(out / "sweep_matrix.txt", "w") as fh:
        fh.write("\t".join(["idx"] + axis_names + ["exit"] + verdict_names) + "\n")
        for idx, point, code, rep in results:
            row = [str(idx)] + [str(point[n]) for n in axis_names] + [str(code)]
            row += ["pass" if rep.get(n) else ("fail" if n in rep else "-")
                    for n in verdict_names]
            fh.write("\t".join(row) + "\n")
    return 0 if all(code == 0 for _, _, code, _ in results) else 1


def emit_plots(series_csv, output_dir=None) -> list:
    """Write a gnuplot-ready .dat and .gp script per numeric series column
    (time on x; log-y for sup_u)."""
    series_csv = Path(series_csv)
    out = Path(output_dir or series_csv.parent)
    out.mkdir(parents=True, exist_ok=True)
    with open(series_csv) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    for col in DiagnosticsRecord.FIELDS:
        if col not in header:
            raise MissingColumn(col)
    t_idx = header.index("t")
    written = []
    for col in DiagnosticsRecord.FIELDS:
        if col == "t":
            continue
        c_idx = header.index(col)
        dat = out / f"{col}.dat"
        with open(dat, "w") as fh:
            for row in rows:
                if len(row) <= max(t_idx, c_idx):
                    raise MissingColumn(col)
                fh.write(f"{row[t_idx]} {row[c_idx]}\n")
        script = out / f"{col}.gp"
        with open(script, "w") as fh:
            fh.write(f'set title "{col}"\nset xlabel "t"\n')
            if col == "sup_u":
                fh.write("set logscale y\n")
            fh.write(f'set terminal pngcairo\nset output "{col}.png"\n')
            fh.write(f'plot "{dat.name}" using 1:2 with lines notitle\n')
        written.append(script)
    return written


def run_verify(output_dir) -> int:
    """Oracle and convergence suites; writes order_report.json."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = []

    case = homogeneous_logistic_case(t_end=2.0)
    grid = Grid(8, 8)
    reports.append(convergence_study(
        case, [grid], [4e-3, 2e-3, 1e-3], axis="temporal"))

    heat = heat_eigenmode_case()
    grids = [Grid(32, 32), Grid(64, 64), Grid(128, 128)]
    dts = [0.5 * g.hx**2 for g in grids]
    reports.append(convergence_study(heat, grids, dts, axis="spatial"))

    write_order_report(reports, out / "order_report.json")
    ok = 1.8 <= reports[1]["observed_order"] <= 2.2 \
        and 0.8 <= reports[0]["observed_order"] <= 1.2
    for rep in reports:
        print(f"{rep['case']} ({rep['axis']}): "
              f"observed order {rep['observed_order']:.3f}")
    return 0 if ok else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="chemfv")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single run")
    p_run.add_argument("config", help="TOML run configuration")
    p_run.add_argument("-o", "--output-dir", default=None)

    p_sweep = sub.add_parser("sweep", help="execute a parameter sweep")
    p_sweep.add_argument("config", help="TOML sweep configuration")
    p_sweep.add_argument("-o", "--output-dir", default=None)

    p_verify = sub.add_parser("verify", help="oracle + convergence suites")
    p_verify.add_argument("-o", "--output-dir", default="verify_out")

    p_plot = sub.add_parser("plot", help="emit gnuplot scripts for a series")
    p_plot.add_argument("series_csv")
    p_plot.add_argument("-o", "--output-dir", default=None)

    args = ap.parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_config(Path(args.config).read_text())
            return run_single(cfg, output_dir=args.output_dir)
        if args.command == "sweep":
            cfg = parse_sweep_config(Path(args.config).read_text())
            return run_sweep(cfg, output_dir=args.output_dir)
        if args.command == "verify":
            return run_verify(args.output_dir)
        if args.command == "plot":
            emit_plots(args.series_csv, args.output_dir)
            return 0
    except ChemFVError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
