"""Functional monitoring: evaluates the tracked integral quantities at
sample times, accumulates a time series, and turns each tracked bound into
a numeric verdict.

Two bounds have explicit formulas and are checked absolutely (total mass
and the trailing-window L2 integral of u); the remaining quantities are
only known to stay bounded by inexplicit constants, so their verdicts are
late-time plateau checks and are labeled heuristic in the report."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import Grid, ModelParameters, SimState
from .errors import EmptySeries, SingularSignal
from .operators import gradient_squared


@dataclass(frozen=True)
class DiagnosticsConfig:
    sample_interval: float = 0.1
    p_exponent: float = 2.0
    q_exponent: float = 0.5
    lam: float = 0.1
    tau: float = 1.0  # window length, min(1, t_end/2)
    bound_tolerance: float = 1e-6
    plateau_tolerance: float = 0.05

    def __post_init__(self):
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be > 0")
        if not self.p_exponent > 1:
            raise ValueError("p_exponent must be > 1")
        if not (0 < self.q_exponent < self.p_exponent - 1):
            raise ValueError("need 0 < q_exponent < p_exponent - 1")
        if not self.lam > 0:
            raise ValueError("lam must be > 0")
        if self.tau < 0 or self.bound_tolerance < 0:
            raise ValueError("tau and bound_tolerance must be >= 0")


def tau_for(t_end: float) -> float:
    return min(1.0, t_end / 2.0)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float           # int u
    l2_u: float           # int u^2
    lp_v: float           # int v^p
    grad_v_sq: float      # int |grad v|^2
    l_func: float         # -int u ln v
    u_ln_u: float         # int u ln u  (0*ln 0 = 0)
    y_func: float         # u_ln_u + lam*l_func + grad_v_sq/2
    z_func: float         # int u^p v^-q + int u^p + int |grad v|^2p
    cross_func: float     # int u^pc |grad v|^pc / v^(k*pc), pc from k
    sup_u: float
    min_v: float
    windowed_l2: float    # trailing int_{t-tau}^{t} int u^2; nan until t >= tau

    FIELDS = None  # filled below


DiagnosticsRecord.FIELDS = [f.name for f in dataclasses.fields(DiagnosticsRecord)]


def cross_exponent(k: float) -> float:
    """Exponent for the cross functional: just above max(2, 1/(1-k))."""
    return max(2.0, 1.0 / (1.0 - k)) + 1.0


def sample(s: SimState, cfg: DiagnosticsConfig, params: ModelParameters,
           windowed_l2: float = math.nan) -> DiagnosticsRecord:
    """Evaluate every tracked functional on one state."""
    u = s.u.values
    v = s.v.values
    gsq = gradient_squared(s.v).values
    g = s.u.grid
    area = g.cell_area

    def integ(arr):
        return float(arr.sum() * area)

    pe, qe = cfg.p_exponent, cfg.q_exponent
    log_v = np.log(v)
    u_ln_u = integ(np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0))
    l_func = -integ(u * log_v)
    grad_v_sq = integ(gsq)
    up = u**pe
    pc = cross_exponent(params.k)
    rec = DiagnosticsRecord(
        t=s.t,
        mass=integ(u),
        l2_u=integ(u * u),
        lp_v=integ(v**pe),
        grad_v_sq=grad_v_sq,
        l_func=l_func,
        u_ln_u=u_ln_u,
        y_func=u_ln_u + cfg.lam * l_func + 0.5 * grad_v_sq,
        z_func=integ(up * v**-qe) + integ(up) + integ(gsq**pe),
        cross_func=integ(u**pc * gsq ** (0.5 * pc) / v ** (params.k * pc)),
        sup_u=float(u.max()),
        min_v=float(v.min()),
        windowed_l2=windowed_l2,
    )
    for name in DiagnosticsRecord.FIELDS:
        val = getattr(rec, name)
        if name != "windowed_l2" and not math.isfinite(val):
            raise SingularSignal(f"non-finite diagnostic {name} at t = {s.t}")
    return rec


class DiagnosticsCollector:
    """Sink for run(): samples each state handed to it and accumulates the
    series, filling the trailing-window L2 integral from earlier samples."""

    def __init__(self, cfg: DiagnosticsConfig, params: ModelParameters):
        self.cfg = cfg
        self.params = params
        self.records: List[DiagnosticsRecord] = []
        self._ts: List[float] = []
        self._l2: List[float] = []

    def __call__(self, state: SimState) -> DiagnosticsRecord:
        rec = sample(state, self.cfg, self.params)
        self._ts.append(rec.t)
        self._l2.append(rec.l2_u)
        w = self._trailing_window(rec.t)
        rec = dataclasses.replace(rec, windowed_l2=w)
        self.records.append(rec)
        return rec

    def _trailing_window(self, t: float) -> float:
        tau = self.cfg.tau
        if tau <= 0 or t < tau - 1e-12 * max(tau, 1.0):
            return math.nan
        ts = np.asarray(self._ts)
        l2 = np.asarray(self._l2)
        t0 = t - tau
        inside = (ts > t0) & (ts <= t)
        xs = np.concatenate(([t0], ts[inside]))
        ys = np.concatenate(([np.interp(t0, ts, l2)], l2[inside]))
        return float(np.trapezoid(ys, xs))


def mass_bound(p: ModelParameters, g: Grid, u0_mass: float) -> float:
    """Ceiling for int u: max of r|Omega|/mu and the initial mass. With
    mu = 0 the logistic ceiling is void and mass is (at most) conserved."""
    if p.mu > 0:
        return max(p.r * g.area / p.mu, u0_mass)
    return u0_mass


def windowed_l2_bound(p: ModelParameters, m: float, tau: float) -> float:
    """Ceiling for the trailing-window integral of int u^2: m(r*tau+1)/mu."""
    return m * (p.r * tau + 1.0) / p.mu


@dataclass
class Verdict:
    name: str
    passed: bool
    worst_time: float
    worst_ratio: float
    heuristic: bool = False
    note: str = ""


@dataclass
class BoundReport:
    verdicts: List[Verdict]

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def __getitem__(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_json(self) -> str:
        entries = []
        for v in self.verdicts:
            d = dataclasses.asdict(v)
            d["pass"] = d.pop("passed")
            entries.append(d)
        return json.dumps(entries, indent=2)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def _ceiling_verdict(name, times, values, ceiling, tol, heuristic=False):
    ratios = np.asarray(values) / ceiling
    worst = int(np.argmax(ratios))
    return Verdict(
        name=name,
        passed=bool(ratios[worst] <= 1.0 + tol),
        worst_time=float(times[worst]),
        worst_ratio=float(ratios[worst]),
        heuristic=heuristic,
    )


def _plateau_verdict(name, times, values, tol):
    """No late-time growth: the max over the final third of samples must not
    exceed the max over the middle third by more than tol (relative). The
    slack is taken relative to the overall series magnitude, so a functional
    that has decayed to ~0 cannot fail on noise-level differences."""
    n = len(values)
    third = n // 3
    if third == 0:
        # too few samples to see a trend; vacuously passes
        return Verdict(
            name=name, passed=True, worst_time=float(times[-1]),
            worst_ratio=1.0, heuristic=True,
            note="plateau check skipped: fewer than three samples",
        )
    mid = np.asarray(values[third:2 * third])
    fin = np.asarray(values[2 * third:])
    mid_max = float(mid.max())
    fin_max = float(fin.max())
    scale = float(np.abs(np.asarray(values)).max())
    slack = tol * max(abs(mid_max), scale, 1e-12)
    worst = 2 * third + int(np.argmax(fin))
    denom = mid_max if mid_max != 0 else 1e-300
    return Verdict(
        name=name,
        passed=bool(fin_max <= mid_max + slack),
        worst_time=float(times[worst]),
        worst_ratio=fin_max / denom,
        heuristic=True,
        note="plateau check: boundedness constant is not explicit",
    )


def verdicts(
    series: List[DiagnosticsRecord],
    p: ModelParameters,
    g: Grid,
    cfg: DiagnosticsConfig,
    blowup_threshold: Optional[float] = None,
) -> BoundReport:
    """Per-bound verdicts over a completed series. The series must start at
    t = 0 (the first record supplies the initial mass and min v)."""
    if not series:
        raise EmptySeries("no diagnostics samples")
    times = [r.t for r in series]
    out: List[Verdict] = []

    m = mass_bound(p, g, series[0].mass)
    out.append(_ceiling_verdict(
        "mass_bound", times, [r.mass for r in series], m, cfg.bound_tolerance
    ))

    if p.mu > 0:
        wb = windowed_l2_bound(p, m, cfg.tau)
        wt, wv = zip(*[(r.t, r.windowed_l2) for r in series
                       if math.isfinite(r.windowed_l2)]) \
            if any(math.isfinite(r.windowed_l2) for r in series) else ((), ())
        if wv:
            out.append(_ceiling_verdict(
                "windowed_l2_bound", list(wt), list(wv), wb, cfg.bound_tolerance
            ))

    if p.kappa == 1:
        # discrete comparison principle: min v decays no faster than e^{-alpha t}
        min_v0 = series[0].min_v
        floors = [math.exp(-p.alpha * r.t) * min_v0 for r in series]
        ratios = [f / r.min_v for f, r in zip(floors, series)]
        worst = int(np.argmax(ratios))
        out.append(Verdict(
            name="v_comparison",
            passed=bool(series[worst].min_v
                        >= floors[worst] * (1.0 - cfg.bound_tolerance)),
            worst_time=float(times[worst]),
            worst_ratio=float(ratios[worst]),
        ))

    for name in ("lp_v", "grad_v_sq", "u_ln_u", "z_func", "cross_func"):
        out.append(_plateau_verdict(
            f"plateau_{name}", times, [getattr(r, name) for r in series],
            cfg.plateau_tolerance,
        ))

    if blowup_threshold is not None:
        out.append(_ceiling_verdict(
            "sup_u_threshold", times, [r.sup_u for r in series],
            blowup_threshold, 0.0,
        ))
    return BoundReport(out)


# --- time-series CSV --------------------------------------------------------

def write_series_csv(records: List[DiagnosticsRecord], path) -> None:
    """One row per sample, columns exactly the record fields in declaration
    order; repr formatting so float64 values round-trip exactly."""
    with open(path, "w") as fh:
        fh.write(",".join(DiagnosticsRecord.FIELDS) + "\n")
        for r in records:
            fh.write(",".join(repr(float(getattr(r, f)))
                              for f in DiagnosticsRecord.FIELDS))
            fh.write("\n")


def read_series_csv(path) -> List[DiagnosticsRecord]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != DiagnosticsRecord.FIELDS:
            raise ValueError(f"bad series header: {header}")
        out = []
        for line in fh:
            vals = [float(x) for x in line.strip().split(",")]
            out.append(DiagnosticsRecord(*vals))
    return out
