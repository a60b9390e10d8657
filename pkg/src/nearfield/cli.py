"""Command-line front end.

    nearfield <command> [--scenario PATH] [--seed N] [--out DIR] ...

Outputs are written only when a command succeeds, together with a
``manifest.json`` listing them. Exit codes: 0 success, 2 configuration
error, 3 physics validation error, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from pathlib import Path

import numpy as np

from .atomic import (
    Transition,
    all_states,
    breit_rabi_energies,
    field_sensitivity,
    find_clock_field,
    transition_frequency,
)
from .budget import budget_csv, budget_report
from .calibration import (
    NullingResult,
    ShotClock,
    crosstalk_task,
    monitor_drift,
    null_crosstalk,
    null_polarization,
)
from .dynamics import scan_pulse_duration
from .errors import ConfigError, ConvergenceError, PhysicsError
from .fields import DriveChannel, DriveSettings, analytic_null
from .fitting import estimate_rabi
from .scenario import RunManifest, load_scenario, tool_version, validate_scenario

OUT_ENV = "NEARFIELD_OUT"
DEFAULT_SCENARIO = "reference.yaml"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def _label(s) -> str:
    return f"F{s.F}_m{s.mF:+d}"


def _grid(args) -> np.ndarray:
    if args.bstep <= 0 or args.bmax < args.bmin or args.bmin < 0:
        raise ConfigError("need 0 <= bmin <= bmax and bstep > 0")
    n = int(round((args.bmax - args.bmin) / args.bstep))
    return args.bmin + args.bstep * np.arange(n + 1)


def _transitions():
    """All magnetic-dipole F=4 -> F=3 transitions."""
    out = []
    for lo in (s for s in all_states() if s.F == 4):
        for up in (s for s in all_states() if s.F == 3):
            if abs(up.mF - lo.mF) <= 1:
                out.append(Transition.between(lo, up))
    return out


def cmd_levels(sc, args) -> dict[str, str]:
    states = all_states()
    rows = []
    for B in _grid(args):
        E = {lv.label: lv.energy for lv in breit_rabi_energies(sc.constants, float(B))}
        rows.append([float(B)] + [E[s] for s in states])
    return {"levels.csv": _csv(["B_gauss"] + [f"energy_{_label(s)}_hz" for s in states], rows)}


def cmd_clock_scan(sc, args) -> dict[str, str]:
    grid = _grid(args)
    rows, roots = [], []
    for t in _transitions():
        name = f"{_label(t.lower)}->{_label(t.upper)}"
        for B in grid:
            B = float(B)
            rows.append([name, B, transition_frequency(sc.constants, t, B), field_sensitivity(sc.constants, t, B)])
        r = find_clock_field(sc.constants, t, (float(grid[0]), float(grid[-1])))
        if r is not None:
            roots.append([name, r, transition_frequency(sc.constants, t, r)])
    return {
        "clock_scan.csv": _csv(["transition", "B_gauss", "freq_hz", "dfdB_hz_per_gauss"], rows),
        "clock_roots.csv": _csv(["transition", "B_gauss", "freq_hz"], roots),
    }


def _settings(sc, args) -> DriveSettings:
    x = sc.crosstalk
    if args.drive:
        chans = []
        for d in args.drive:
            try:
                e, a, p = d.split(":")
                chans.append(DriveChannel(int(e), float(a), float(p)))
            except ValueError:
                raise ConfigError(f"--drive expects ELECTRODE:AMPLITUDE:PHASE, got {d!r}") from None
        return DriveSettings(tuple(chans))
    if args.nulling:
        return NullingResult.from_text(Path(args.nulling).read_text()).settings
    a, p = analytic_null(sc.field_map, x.driven_electrode, x.nulling_electrode, x.nulled_zone,
                         sc.qubit.polarization, x.driven_amplitude)
    return DriveSettings((DriveChannel(x.driven_electrode, x.driven_amplitude, 0.0),
                          DriveChannel(x.nulling_electrode, a, p)))


def cmd_rabi_scan(sc, args) -> dict[str, str]:
    zone = args.zone or sc.crosstalk.driven_zone
    if zone not in sc.field_map.zones:
        raise ConfigError(f"unknown zone {zone!r}")
    if args.tmax is None or args.tmax <= 0:
        raise ConfigError("rabi-scan needs --tmax > 0")
    if args.points < 8:
        raise ConfigError("--points must be >= 8")
    drives = _settings(sc, args)
    durations = args.tmax * np.arange(args.points + 1) / args.points
    scan = scan_pulse_duration(sc.env(zone), drives, sc.drive_frequency, sc.spam, durations, args.shots,
                               workers=args.workers)
    fit = estimate_rabi(scan)
    text = "".join(f"{k}: {v!r}\n" for k, v in [
        ("zone", zone), ("omega_hz", fit.omega), ("omega_std_hz", fit.omega_std), ("contrast", fit.contrast),
        ("offset", fit.offset), ("decay_time_s", fit.decay_time), ("converged", fit.converged),
    ])
    return {"rabi_scan.csv": scan.to_csv(), "rabi_fit.txt": text}


def _null(sc, args) -> NullingResult:
    x = sc.crosstalk
    params = sc.optimizer if args.workers == 1 else _with_workers(sc.optimizer, args.workers)
    r = null_crosstalk(sc.env(x.driven_zone), x.driven_electrode, x.nulling_electrode, x.nulled_zone, params,
                       spam=sc.spam, driven_amplitude=x.driven_amplitude, initial=x.initial,
                       qubit=sc.qubit, frequency=sc.drive_frequency)
    if r.diverged:
        raise ConvergenceError(f"nulling diverged: best R = {r.R:.3g}")
    return r


def _with_workers(params, workers):
    from dataclasses import replace

    return replace(params, workers=workers)


def cmd_null(sc, args) -> dict[str, str]:
    r = _null(sc, args)
    return {"nulling_result.txt": r.to_text(), "nulling_trace.csv": r.trace_csv()}


def cmd_polarization(sc, args) -> dict[str, str]:
    p = sc.polarization
    if p is None:
        raise ConfigError("scenario has no polarization section")
    params = sc.optimizer if args.workers == 1 else _with_workers(sc.optimizer, args.workers)
    r = null_polarization(sc.env(p.zone), (p.fixed_electrode, p.nulling_electrode), params, spam=sc.spam,
                          fixed_amplitude=p.fixed_amplitude, initial=p.initial)
    if r.diverged:
        raise ConvergenceError(f"polarization nulling diverged: best R = {r.R:.3g}")
    return {"polarization_result.txt": r.to_text(), "polarization_trace.csv": r.trace_csv()}


def cmd_drift(sc, args) -> dict[str, str]:
    x = sc.crosstalk
    r = _null(sc, args)
    task = crosstalk_task(sc.env(x.driven_zone), x.driven_electrode, x.nulling_electrode, x.nulled_zone,
                          sc.spam, driven_amplitude=x.driven_amplitude, initial=x.initial, qubit=sc.qubit,
                          frequency=sc.drive_frequency)
    duration = sc.monitor.duration if args.tmax is None else args.tmax
    params = sc.optimizer if args.workers == 1 else _with_workers(sc.optimizer, args.workers)
    rec = monitor_drift(task, r, duration, sc.monitor.sample_interval, params)
    return {"nulling_result.txt": r.to_text(), "drift.csv": rec.to_csv()}


def cmd_budget(sc, args) -> dict[str, str]:
    result = NullingResult.from_text(Path(args.nulling).read_text()) if args.nulling else None
    cols = {"low_field": budget_report(sc, result)}
    for p in sc.budget.projections:
        cols[p.name] = budget_report(sc, result, p.qubit, p.B)
    text = "\n".join(f"[{name}]\n{b.to_text()}" for name, b in cols.items())
    return {"budget.csv": budget_csv(cols), "budget.txt": text}


COMMANDS = {
    "levels": cmd_levels,
    "clock-scan": cmd_clock_scan,
    "rabi-scan": cmd_rabi_scan,
    "null": cmd_null,
    "polarization": cmd_polarization,
    "drift": cmd_drift,
    "budget": cmd_budget,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default=DEFAULT_SCENARIO,
                        help="scenario YAML (default: the bundled reference scenario)")
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./out)")
    common.add_argument("--workers", type=int, default=1, help="threads for shot simulation")

    ap = argparse.ArgumentParser(prog="nearfield", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("levels", "ground-level energies versus field"),
        ("clock-scan", "transition frequencies, field sensitivities and clock fields"),
        ("rabi-scan", "simulated pulse-duration scan with fit"),
        ("null", "crosstalk nulling"),
        ("polarization", "sigma+ polarization nulling"),
        ("drift", "nulling followed by long-term monitoring"),
        ("budget", "addressing-error budget"),
        ("validate", "check a scenario file"),
    ]:
        p = sub.add_parser(name, parents=[common], help=help_)
        if name in ("levels", "clock-scan"):
            p.add_argument("--bmin", type=float, default=0.0, help="gauss")
            p.add_argument("--bmax", type=float, default=400.0, help="gauss")
            p.add_argument("--bstep", type=float, default=1.0 if name == "levels" else 0.5, help="gauss")
        if name in ("rabi-scan", "drift"):
            p.add_argument("--tmax", type=float, default=None, help="s: scan length or monitoring duration")
        if name == "rabi-scan":
            p.add_argument("--shots", type=int, default=200)
            p.add_argument("--points", type=int, default=40)
            p.add_argument("--zone", default=None)
            p.add_argument("--drive", action="append", help="ELECTRODE:AMPLITUDE:PHASE, repeatable")
        if name in ("rabi-scan", "budget"):
            p.add_argument("--nulling", default=None, help="nulling result file supplying drive settings")
    return ap


def _write(out: Path, files: dict[str, str], manifest: RunManifest) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    (out / "manifest.json").write_text(manifest.to_json())


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        if args.command == "validate":
            rep = validate_scenario(args.scenario)
            for m in rep.messages:
                print(m, file=sys.stdout if rep.ok else sys.stderr)
            return rep.exit_code
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        sc = load_scenario(args.scenario)
        if args.seed is not None:
            sc = sc.with_seed(args.seed)
        files = COMMANDS[args.command](sc, args)
    except PhysicsError as e:
        print(f"physics error: {e}", file=sys.stderr)
        return 3
    except ConvergenceError as e:
        print(f"not converged: {e}", file=sys.stderr)
        return 4
    except (ConfigError, OSError, KeyError, ValueError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    manifest = RunManifest(args.command, sc.hash, sc.seed, tool_version(), sorted(files),
                           round(time.perf_counter() - t0, 3), argv)
    _write(out, files, manifest)
    for name in sorted(files):
        print(out / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
