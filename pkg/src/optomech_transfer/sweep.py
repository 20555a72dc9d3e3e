"""Parameter sweeps that regenerate the data behind the channel figures."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import channel, fock, langevin
from .channel import PulseSchedule, SystemParams
from .errors import DomainError

__all__ = [
    "LEVELS",
    "COLUMNS",
    "SCHEMA",
    "SweepResult",
    "effective_channel",
    "evaluate",
    "fig2_records",
    "trajectory",
    "find_crossings",
    "fig4_points",
    "boundary_polyline",
    "write_wigner_csv",
    "format_value",
]

LEVELS = ("adiabatic", "rwa", "full")
SCHEMA = "sweep-v1"
COLUMNS = ("family", "fixed", "sweep", "tau1", "tau2", "T1", "T2", "T", "VN",
           "VN_neg", "VN_ent", "p0", "p1", "p2plus", "margin", "W00")


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


@dataclass
class SweepResult:
    records: list
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([r[name] for r in self.records], dtype=float)

    def write_csv(self, stream):
        stream.write(f"# schema: {SCHEMA}\n")
        for key, value in self.metadata.items():
            stream.write(f"# {key}: {format_value(value)}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(COLUMNS)
        for rec in self.records:
            writer.writerow([format_value(rec[c]) for c in COLUMNS])


def effective_channel(params: SystemParams, schedule: PulseSchedule, level="adiabatic",
                      envelopes="matched", dt=None):
    """``(T, VN)`` at the requested fidelity level."""
    if level == "adiabatic":
        ch = channel.adiabatic_channel(params, schedule)
        return ch.T, ch.VN
    if level not in LEVELS:
        raise DomainError(f"level must be one of {LEVELS}, got {level!r}")
    modes = langevin.matched_modes(params, schedule, envelopes)
    ext = langevin.propagate(params, schedule, *modes, rapid=level == "full", dt=dt)
    return ext.T_full, ext.VN_full


def _fock_columns(T, VN):
    if not math.isfinite(VN) or T >= 1:
        return dict(p0=math.nan, p1=math.nan, p2plus=math.nan, margin=math.nan, W00=math.nan)
    # moment extraction can land a hair below the vacuum level
    spec = fock.GaussianChannelSpec(min(max(T, 0.0), 1.0), max(VN, 1.0) if VN > 1 - 1e-8 else VN)
    state = fock.apply_channel_single_photon(spec)
    p0, p1, p2plus = fock.fock_triple(state)
    verdict = fock.nongauss_certified(state)
    return dict(p0=p0, p1=p1, p2plus=p2plus, margin=verdict.margin,
                W00=fock.wigner_at_origin(state))


def evaluate(params: SystemParams, schedule: PulseSchedule, level="adiabatic",
             envelopes="matched", dt=None, family="point", fixed=math.nan, sweep=math.nan):
    """One sweep record: channel, thresholds and Fock-space diagnostics."""
    T, VN = effective_channel(params, schedule, level, envelopes, dt)
    rec = dict(family=family, fixed=fixed, sweep=sweep, tau1=schedule.tau1, tau2=schedule.tau2,
               T1=float(channel.swap_transmittance(params.g0_sqrtN1, schedule.tau1, params.kappa)),
               T2=float(channel.swap_transmittance(params.g0_sqrtN2, schedule.tau2, params.kappa)),
               T=T, VN=VN)
    if T < 1:
        rec["VN_neg"] = float(channel.negativity_threshold(T))
        rec["VN_ent"] = float(channel.entanglement_threshold(T))
    else:
        rec["VN_neg"] = rec["VN_ent"] = math.nan
    rec.update(_fock_columns(T, VN))
    return rec


def _run(tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda job: job(), tasks))
    return [job() for job in tasks]


def _duration_for(T, g, kappa=1.0):
    """Pulse length giving swap transmittance ``T`` at coupling ``g``."""
    if T <= 0:
        return 0.0
    if g <= 0:
        raise DomainError("cannot reach a non-zero transmittance without coupling")
    return -math.log1p(-T) * kappa / (2 * g * g)


def trajectory(params, tau1_max, tau2_max, tau_s, n_points, level="adiabatic",
               envelopes="matched", dt=None, jobs=1):
    """Records along ``tau1 = s tau1_max, tau2 = s tau2_max`` for ``s`` in [0, 1]."""
    tasks = []
    for s in np.linspace(0.0, 1.0, n_points):
        sched = PulseSchedule(s * tau1_max, s * tau2_max, tau_s)
        tasks.append(lambda sched=sched, s=s: evaluate(
            params, sched, level, envelopes, dt, family="T1_eq_T2", sweep=s))
    return _run(tasks, jobs)


def fig2_records(params, tau1_max, tau2_max, tau_s, n_points, fixed_values,
                 level="adiabatic", envelopes="matched", dt=None, mode="duration",
                 allow_out_of_range=False, jobs=1):
    """The three line families of the noise-vs-transmittance figure.

    In ``"duration"`` mode the swap transmittances are tuned through the
    pulse durations at fixed coupling.  ``"direct"`` mode sweeps the swap
    transmittances themselves (adiabatic level only) with the storage time
    of the preset.
    """
    g1, g2 = params.g0_sqrtN1, params.g0_sqrtN2
    if mode == "direct":
        if level != "adiabatic":
            raise DomainError("direct (T1, T2) sweeps exist only at the adiabatic level")
        delta = channel.storage_decay(params.gamma, tau_s)
        records = []
        grid = np.linspace(0.0, 1.0, n_points, endpoint=False)
        families = [("T1_eq_T2", math.nan)]
        families += [("T1_fixed", f) for f in fixed_values]
        families += [("T2_fixed", f) for f in fixed_values]
        for family, fixed in families:
            for s in grid:
                T1, T2 = {"T1_eq_T2": (s, s), "T1_fixed": (fixed, s),
                          "T2_fixed": (s, fixed)}[family]
                T = float(channel.total_transmittance(T1, T2, params.eta, delta))
                VN = float(channel.added_noise_variance(params, T1, T2, delta))
                rec = dict(family=family, fixed=fixed, sweep=s,
                           tau1=_duration_for(T1, g1, params.kappa),
                           tau2=_duration_for(T2, g2, params.kappa),
                           T1=T1, T2=T2, T=T, VN=VN,
                           VN_neg=float(channel.negativity_threshold(T)),
                           VN_ent=float(channel.entanglement_threshold(T)))
                rec.update(_fock_columns(T, VN))
                records.append(rec)
        return records
    if mode != "duration":
        raise DomainError(f"mode must be 'duration' or 'direct', got {mode!r}")

    records = trajectory(params, tau1_max, tau2_max, tau_s, n_points, level, envelopes, dt, jobs)
    for s, rec in zip(np.linspace(0.0, 1.0, n_points), records):
        rec["sweep"] = s * tau1_max
    tasks = []
    for family in ("T1_fixed", "T2_fixed"):
        for fixed in fixed_values:
            g_fixed = g1 if family == "T1_fixed" else g2
            tau_fixed = _duration_for(fixed, g_fixed, params.kappa)
            limit = tau1_max if family == "T1_fixed" else tau2_max
            if tau_fixed > limit and not allow_out_of_range:
                continue
            swept_max = tau2_max if family == "T1_fixed" else tau1_max
            for tau in np.linspace(0.0, swept_max, n_points):
                sched = (PulseSchedule(tau_fixed, tau, tau_s) if family == "T1_fixed"
                         else PulseSchedule(tau, tau_fixed, tau_s))
                tasks.append(lambda sched=sched, family=family, fixed=fixed, tau=tau: evaluate(
                    params, sched, level, envelopes, dt, family=family, fixed=fixed, sweep=tau))
    return records + _run(tasks, jobs)


def find_crossings(records, column, x_key="sweep"):
    """Linear-interpolated points where ``column`` changes sign between records."""
    out = []
    for a, b in zip(records, records[1:]):
        ya, yb = a[column], b[column]
        if not (math.isfinite(ya) and math.isfinite(yb)) or (ya > 0) == (yb > 0):
            continue
        w = ya / (ya - yb)
        out.append({k: a[k] + w * (b[k] - a[k]) for k in (x_key, "tau1", "tau2", "T1", "T2")})
    return out


def _refine(fn, s_grid):
    vals = [fn(s) for s in s_grid]
    for (sa, va), (sb, vb) in zip(zip(s_grid, vals), zip(s_grid[1:], vals[1:])):
        if (va > 0) != (vb > 0):
            return brentq(fn, sa, sb, xtol=1e-12)
    return None


def fig4_points(params, tau1_max, tau2_max, tau_s, spread=0.25):
    """Four labelled ``(T, VN)`` points along the adiabatic ``T1 = T2`` trajectory.

    A and B straddle the Wigner-negativity threshold, C and D the
    non-Gaussianity boundary.  Each pair sits a fraction ``spread`` of the
    crossing duration before and after it (clipped to the allowed range).
    """
    def chan(s):
        return channel.adiabatic_channel(params, PulseSchedule(s * tau1_max, s * tau2_max, tau_s))

    def neg_margin(s):
        ch = chan(s)
        return float(channel.negativity_threshold(ch.T)) - ch.VN

    def ng_margin(s):
        ch = chan(s)
        state = fock.apply_channel_single_photon(fock.GaussianChannelSpec(ch.T, ch.VN))
        return fock.nongauss_certified(state).margin

    grid = np.linspace(1e-6, 1.0, 400)
    points = {}
    for (before, after), fn in ((("A", "B"), neg_margin), (("C", "D"), ng_margin)):
        s_cross = _refine(fn, grid)
        if s_cross is None:
            raise DomainError(f"trajectory never crosses the threshold for points {before}/{after}")
        for label, s in ((before, s_cross * (1 - spread)), (after, min(1.0, s_cross * (1 + spread)))):
            ch = chan(s)
            points[label] = dict(label=label, s=s, tau1=s * tau1_max, tau2=s * tau2_max,
                                 T=ch.T, VN=ch.VN, crossing=s_cross)
    return points


def boundary_polyline(n_points=200, r_max=3.0):
    """Samples ``(r, p0, p1G, p2plusG)`` of the Gaussian-mixture boundary."""
    r = np.linspace(0.0, r_max, n_points)
    p0, p1G = fock.nongauss_boundary(r)
    return r, p0, p1G, 1 - p0 - p1G


def write_wigner_csv(stream, grid: fock.WignerGrid, metadata: dict):
    """Matrix CSV: comment metadata, ``x``/``y`` axis lines, then rows in ``y``."""
    stream.write("# schema: wigner-grid-v1\n")
    for key, value in metadata.items():
        stream.write(f"# {key}: {format_value(value)}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["x"] + [format_value(v) for v in grid.x_axis])
    writer.writerow(["y"] + [format_value(v) for v in grid.y_axis])
    for row in grid.values:
        writer.writerow([format_value(v) for v in row])

