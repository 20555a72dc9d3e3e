"""Command-line front end: ``optomech-transfer <command> [options]``.

Settings are resolved with precedence command line > config file > preset.
A config file holds flat ``key = value`` lines with ``#`` comments, e.g.::

    preset = electro_ockeloen
    level = rwa
    tau1 = 500      # durations in units of 1/kappa
    nth = 10

Exit codes: 0 success, 2 usage error, 3 numerical singularity,
4 truncation failure.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import channel, fock, sweep
from .channel import PulseSchedule, SystemParams
from .errors import ConfigurationError, DomainError, SingularityError, TruncationError
from .presets import PRESETS, get_preset

EXIT_USAGE, EXIT_SINGULAR, EXIT_TRUNCATION = 2, 3, 4

_PARAM_KEYS = {f.name for f in fields(SystemParams)}
_FLOAT_KEYS = _PARAM_KEYS | {"eta", "g", "tau1", "tau2", "tau_s", "tau1_max", "tau2_max", "dt"}
_INT_KEYS = {"points", "jobs", "grid_points"}
_STR_KEYS = {"preset", "level", "envelopes", "mode", "out"}
_KNOWN = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | {"fixed", "allow_out_of_range"}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    preset: str
    params: SystemParams
    tau1: float
    tau2: float
    tau_s: float
    tau1_max: float
    tau2_max: float
    level: str = "adiabatic"
    envelopes: str = "matched"
    mode: str = "duration"
    points: int = 51
    grid_points: int = 161
    jobs: int = 1
    dt: float | None = None
    fixed: tuple = (0.9, 0.99, 0.999)
    out: str | None = None
    allow_out_of_range: bool = False

    @property
    def schedule(self) -> PulseSchedule:
        return PulseSchedule(self.tau1, self.tau2, self.tau_s)


def read_config_file(path) -> dict:
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"cannot parse config file {path}: {exc}") from None
    return dict(parser["run"])


def _parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"override {item!r} is not of the form key=value")
        out[key.strip()] = value.strip()
    return out


def _coerce(key, value):
    if key not in _KNOWN:
        raise UsageError(f"unknown setting {key!r}")
    if not isinstance(value, str):
        return value
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
        if key == "fixed":
            return tuple(float(v) for v in value.replace(",", " ").split())
        if key == "allow_out_of_range":
            return value.lower() in ("1", "true", "yes", "on")
    except ValueError:
        raise UsageError(f"bad value {value!r} for {key}") from None
    return value


def build_config(args) -> RunConfig:
    settings = {}
    if getattr(args, "config", None):
        settings.update(read_config_file(args.config))
    settings.update(_parse_overrides(getattr(args, "override", None)))
    for key in ("preset", "level", "envelopes", "mode", "points", "grid_points", "jobs", "out",
                "fixed"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if getattr(args, "allow_out_of_range", False):
        settings["allow_out_of_range"] = True
    settings = {k: _coerce(k, v) for k, v in settings.items()}

    try:
        preset = get_preset(settings.pop("preset", "electro_palomaki"))
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None

    param_changes = {k: settings.pop(k) for k in list(settings) if k in _PARAM_KEYS}
    if "eta" in settings:
        param_changes["kappa_e"] = settings.pop("eta") * param_changes.get("kappa", preset.params.kappa)
    if "g" in settings:
        g = settings.pop("g")
        param_changes.update(g0_sqrtN1=g, g0_sqrtN2=g)
    try:
        params = replace(preset.params, **param_changes)
    except DomainError as exc:
        raise UsageError(str(exc)) from None

    tau1_max = settings.pop("tau1_max", preset.tau1_max)
    tau2_max = settings.pop("tau2_max", preset.tau2_max)
    cfg = RunConfig(preset=preset.name, params=params,
                    tau1=settings.pop("tau1", tau1_max), tau2=settings.pop("tau2", tau2_max),
                    tau_s=settings.pop("tau_s", preset.tau_s),
                    tau1_max=tau1_max, tau2_max=tau2_max, **settings)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.level not in sweep.LEVELS:
        raise UsageError(f"level must be one of {', '.join(sweep.LEVELS)}")
    if cfg.envelopes not in ("matched", "adiabatic"):
        raise UsageError("envelopes must be 'matched' or 'adiabatic'")
    if cfg.mode not in ("duration", "direct"):
        raise UsageError("mode must be 'duration' or 'direct'")
    if cfg.points < 2 or cfg.grid_points < 2 or cfg.jobs < 1:
        raise UsageError("points and grid_points need at least 2, jobs at least 1")
    if min(cfg.tau1, cfg.tau2, cfg.tau_s) < 0:
        raise UsageError("durations must be non-negative")
    if not cfg.allow_out_of_range and (cfg.tau1 > cfg.tau1_max or cfg.tau2 > cfg.tau2_max):
        raise UsageError(
            f"durations ({cfg.tau1}, {cfg.tau2}) exceed the preset limits "
            f"({cfg.tau1_max}, {cfg.tau2_max}); pass --allow-out-of-range to override")
    if any(not 0 <= f < 1 for f in cfg.fixed):
        raise UsageError("fixed transmittances must lie in [0, 1)")


def _open_out(path):
    if path is None:
        return sys.stdout, False
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p.open("w", newline=""), True


def _emit(result: sweep.SweepResult, path):
    stream, close = _open_out(path)
    try:
        result.write_csv(stream)
    finally:
        if close:
            stream.close()


def _base_metadata(cfg: RunConfig):
    return {"preset": cfg.preset, "level": cfg.level, "envelopes": cfg.envelopes,
            "eta_squared": cfg.params.eta**2, "tau_s": cfg.tau_s}


def cmd_channel(cfg: RunConfig):
    rec = sweep.evaluate(cfg.params, cfg.schedule, cfg.level, cfg.envelopes, cfg.dt)
    if not math.isfinite(rec["VN"]):
        raise SingularityError("added noise variance is singular at this point")
    report = dict(rec, preset=cfg.preset, level=cfg.level,
                  negativity=bool(rec["VN"] < rec["VN_neg"]),
                  entanglement=bool(rec["VN"] < rec["VN_ent"]),
                  nongaussian=bool(rec["margin"] > 0))
    del report["family"], report["fixed"], report["sweep"]
    for key, value in report.items():
        print(f"{key:>12}: {value if isinstance(value, (bool, str)) else sweep.format_value(value)}")
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def cmd_fig2(cfg: RunConfig):
    records = sweep.fig2_records(cfg.params, cfg.tau1_max, cfg.tau2_max, cfg.tau_s, cfg.points,
                                 cfg.fixed, cfg.level, cfg.envelopes, cfg.dt, cfg.mode,
                                 cfg.allow_out_of_range, cfg.jobs)
    meta = _base_metadata(cfg)
    meta["mode"] = cfg.mode
    result = sweep.SweepResult(records, meta)
    _emit(result, cfg.out)
    return result


def cmd_fig3(cfg: RunConfig):
    records = sweep.trajectory(cfg.params, cfg.tau1_max, cfg.tau2_max, cfg.tau_s, cfg.points,
                               cfg.level, cfg.envelopes, cfg.dt, cfg.jobs)
    meta = _base_metadata(cfg)
    for i, c in enumerate(sweep.find_crossings(records, "margin")):
        meta[f"nongauss_crossing_{i}"] = (f"s={c['sweep']:.6g} tau1={c['tau1']:.6g} "
                                          f"tau2={c['tau2']:.6g} T1={c['T1']:.9g} T2={c['T2']:.9g}")
    result = sweep.SweepResult(records, meta)
    _emit(result, cfg.out)
    if cfg.out:
        p = Path(cfg.out)
        with p.with_name(p.stem + "_boundary.csv").open("w", newline="") as fh:
            _write_boundary(fh, cfg.points * 4)
    return result


def _write_boundary(stream, n_points):
    r, p0, p1G, p2 = sweep.boundary_polyline(n_points)
    stream.write("# schema: nongauss-boundary-v1\n")
    stream.write("r,p0,p1G,p2plusG\n")
    for row in zip(r, p0, p1G, p2):
        stream.write(",".join(sweep.format_value(v) for v in row) + "\n")


def cmd_boundary(cfg: RunConfig):
    stream, close = _open_out(cfg.out)
    try:
        _write_boundary(stream, cfg.points)
    finally:
        if close:
            stream.close()


def cmd_fig4(cfg: RunConfig):
    points = sweep.fig4_points(cfg.params, cfg.tau1_max, cfg.tau2_max, cfg.tau_s)
    outdir = Path(cfg.out or "fig4")
    outdir.mkdir(parents=True, exist_ok=True)
    summary = []
    for label, pt in points.items():
        state = fock.apply_channel_single_photon(fock.GaussianChannelSpec(pt["T"], pt["VN"]))
        var = 3 * pt["T"] + (1 - pt["T"]) * pt["VN"]
        grid = fock.wigner_of_state(state, extent=6 * math.sqrt(var), n_points=cfg.grid_points)
        verdict = fock.nongauss_certified(state)
        row = dict(pt, W00=fock.wigner_at_origin(state), margin=verdict.margin,
                   integral=grid.integral())
        summary.append(row)
        with (outdir / f"fig4_{label}.csv").open("w", newline="") as fh:
            sweep.write_wigner_csv(fh, grid, {k: row[k] for k in
                                              ("label", "T", "VN", "W00", "margin", "tau1", "tau2")})
    keys = ["label", "s", "tau1", "tau2", "T", "VN", "W00", "margin", "integral", "crossing"]
    with (outdir / "fig4_points.csv").open("w", newline="") as fh:
        fh.write(f"# preset: {cfg.preset}\n")
        fh.write(",".join(keys) + "\n")
        for row in summary:
            fh.write(",".join(sweep.format_value(row[k]) for k in keys) + "\n")
        for row in summary:
            print(f"{row['label']}: T={row['T']:.6f} VN={row['VN']:.6f} "
                  f"W00={row['W00']:+.6f} margin={row['margin']:+.6f}")
    return summary


def cmd_presets(cfg: RunConfig):
    table = {name: dict(asdict(p.params), tau1_max=p.tau1_max, tau2_max=p.tau2_max,
                        tau_s=p.tau_s, description=p.description)
             for name, p in PRESETS.items()}
    text = json.dumps(table, indent=2)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n")
    else:
        print(text)
    return table


COMMANDS = {
    "channel": (cmd_channel, "effective channel and verdicts for one configuration"),
    "fig2": (cmd_fig2, "added noise versus transmittance line families"),
    "fig3": (cmd_fig3, "(p1, p2+) trajectory and non-Gaussianity crossings"),
    "fig4": (cmd_fig4, "Wigner grids before/after the negativity and non-Gaussianity thresholds"),
    "boundary": (cmd_boundary, "sampled non-Gaussianity boundary"),
    "presets": (cmd_presets, "list the experimental parameter sets"),
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optomech-transfer", description=__doc__.split("\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--config", help="key = value settings file")
        p.add_argument("--level", choices=sweep.LEVELS)
        p.add_argument("--envelopes", choices=("matched", "adiabatic"),
                       help="temporal modes for the rwa/full levels (default matched)")
        p.add_argument("--out", help="output file (directory for fig4)")
        p.add_argument("--points", type=int, help="samples per sweep line")
        p.add_argument("--grid-points", type=int, dest="grid_points",
                       help="Wigner grid samples per axis")
        p.add_argument("--jobs", type=int, help="worker threads for sweeps")
        p.add_argument("--mode", choices=("duration", "direct"),
                       help="fig2: tune T1, T2 through durations or sweep them directly")
        p.add_argument("--fixed", help="fig2: comma-separated fixed swap transmittances")
        p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="override any setting; repeatable")
        p.add_argument("--allow-out-of-range", action="store_true",
                       help="permit durations beyond the preset limits")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        COMMANDS[args.command][0](cfg)
    except (UsageError, DomainError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SingularityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except TruncationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
