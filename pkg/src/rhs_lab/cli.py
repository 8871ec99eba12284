"""Command-line front end: ``rhs-lab run|sweep|check``.

Exit codes: 0 success, 1 I/O error, 2 usage error, 3 numerical failure (a
solver failure, a failed check, or blow-up under ``--expect-completion``).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .checks import SUITES, UnknownSuiteError, run_suite
from .diagnostics import MisuseError, default_workers
from .dynamics import BLOWUP, COMPLETED, SOLVER_FAILURE, IntegratorConfig, Trajectory, energy_drift, integrate
from .scenarios import BUILTIN, Scenario, ScenarioError, get_scenario

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
SWEEP_R = (2, 4, 6, 8, 10, 12, 14, 16, 18, 20)
SNAPSHOT_SAMPLES = 1001
DEFAULTS = {
    "scenario": "one_point",
    "r": None,
    "dt": 1e-3,
    "t_end": None,
    "record_every": 10,
    "output": ".",
    "format": "csv",
    "snapshots": None,
    "points": None,
    "pairs": None,
    "u0": None,
    "expect_completion": False,
}
_FLOAT = "%.17g"


class UsageError(ValueError):
    pass


# -- arguments and config ------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rhs-lab", description="Particle solutions of the r-Hunter-Saxton equation.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--scenario", help=f"one of {sorted(BUILTIN)} or custom")
        sp.add_argument("--dt", type=float)
        sp.add_argument("--t-end", type=float, dest="t_end")
        sp.add_argument("--record-every", type=int, dest="record_every")
        sp.add_argument("--output", help="output directory")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--points", type=int, help="interior nodes for profile scenarios")
        sp.add_argument("--pairs", help="custom point data, 'q:u,q:u,...'")
        sp.add_argument("--u0", help="custom initial profile, an expression in x")
        sp.add_argument("--config", help="INI file; command-line flags take precedence")
        sp.add_argument("--expect-completion", action="store_true", default=None, dest="expect_completion")

    run = sub.add_parser("run", help="integrate one scenario")
    common(run)
    run.add_argument("--r", type=int)
    run.add_argument("--snapshots", help="comma-separated times for u(x) snapshots")

    sweep = sub.add_parser("sweep", help="integrate one scenario for several r")
    common(sweep)
    sweep.add_argument("--r", help="comma-separated exponents (default 2,4,...,20)")

    check = sub.add_parser("check", help="run a diagnostic suite")
    check.add_argument("suite", help=f"one of {sorted(SUITES)}")
    check.add_argument("--output", help="also write the report to this directory")
    return p


def _read_config(path: str) -> dict:
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path}: {exc}") from None
    out = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"unknown config key {key!r} in [{section}]")
            out[key] = value
    return out


def _convert(key: str, value):
    if value is None or not isinstance(value, str):
        return value
    try:
        if key in ("dt", "t_end"):
            return float(value)
        if key in ("record_every", "points"):
            return int(value)
        if key == "expect_completion":
            return value.strip().lower() in ("1", "true", "yes", "on")
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None
    return value


def _settings(args) -> dict:
    cfg = _read_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for key, default in DEFAULTS.items():
        val = getattr(args, key, None)
        if val is None:
            val = cfg.get(key, default)
        out[key] = _convert(key, val)
    if out["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, not {out['format']!r}")
    if not out["dt"] > 0 or (out["t_end"] is not None and out["t_end"] < 0) or out["record_every"] < 1:
        raise UsageError("need dt > 0, t_end >= 0 and record_every >= 1")
    return out


def _parse_r_list(text) -> list[int]:
    if text is None:
        return list(SWEEP_R)
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad r list {text!r}") from None
    if not vals:
        raise UsageError("empty r list")
    return vals


def _parse_r(text) -> int:
    if text is None:
        return 2
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"bad r {text!r}") from None


def _parse_times(text) -> list[float]:
    if not text:
        return []
    try:
        times = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad snapshot list {text!r}") from None
    if any(t < 0 for t in times):
        raise UsageError("snapshot times must be non-negative")
    return times


def _scenario(opts) -> Scenario:
    return get_scenario(opts["scenario"], points=opts["pairs"], u0=opts["u0"], n=opts["points"],
                        t_end=opts["t_end"])


# -- writers -------------------------------------------------------------------


def _fmt(x) -> str:
    return _FLOAT % x


def _trajectory_columns(traj: Trajectory) -> tuple[list[str], np.ndarray]:
    n = traj.n
    names = (["t"] + [f"Q_{i}" for i in range(1, n + 1)] + [f"P_{i}" for i in range(1, n + 1)]
             + [f"u_{i}" for i in range(1, n + 1)] + ["E", "c_spread", "max_abs_slope"])
    data = np.column_stack([traj.t, traj.Q, traj.P, traj.u[:, 1:-1], traj.energy, traj.c_spread, traj.max_slope])
    return names, data


def _write_table(stem: Path, names: list[str], rows, fmt: str) -> Path:
    rows = list(rows)
    path = stem.parent / f"{stem.name}.{fmt}"  # not with_suffix: stems may contain dots
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for row in rows:
                w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    else:
        cols = {name: [_json_value(row[j]) for row in rows] for j, name in enumerate(names)}
        _write_json(path, cols)
    return path


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _json_value(obj)


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _snapshots(traj: Trajectory, times: list[float], outdir: Path, fmt: str, dt: float):
    written, skipped = [], []
    x = np.linspace(traj.domain.a, traj.domain.b, SNAPSHOT_SAMPLES)
    for t in times:
        if t > traj.t[-1] + 0.5 * dt:
            print(f"warning: snapshot at t={t:g} skipped; the run ended at t={traj.t[-1]:g} ({traj.termination})",
                  file=sys.stderr)
            skipped.append(t)
            continue
        k = int(np.argmin(np.abs(traj.t - t)))
        u = traj.velocity(k)(x)
        path = _write_table(outdir / f"snapshot_t{t:g}", ["x", "u"], zip(x, u), fmt)
        written.append({"requested": t, "time": float(traj.t[k]), "file": path.name})
    return written, skipped


def _summary(sc: Scenario, r: int, icfg: IntegratorConfig, traj: Trajectory) -> dict:
    return {
        "scenario": sc.name,
        "points": [list(p) for p in sc.points] if sc.points is not None else None,
        "u0": sc.expression,
        "n": traj.n,
        "r": r,
        "dt": icfg.dt,
        "t_end": icfg.t_end,
        "record_every": icfg.record_every,
        "samples": len(traj),
        "final_time": float(traj.t[-1]),
        "termination": traj.termination,
        "blowup_time": traj.blowup_time,
        "blowup_reason": traj.blowup_reason,
        "energy_drift": energy_drift(traj),
        "energy_drift_slope_le_100": energy_drift(traj, traj.before(100.0)),
        "message": traj.message,
        "solver": traj.stats,
    }


def _integrate(sc: Scenario, r: int, opts: dict, snapshot_times=()) -> tuple[IntegratorConfig, Trajectory]:
    icfg = IntegratorConfig(dt=opts["dt"], t_end=sc.t_end, record_every=opts["record_every"],
                            record_times=tuple(snapshot_times))
    state, vel = sc.initial(r)
    return icfg, integrate(state, r, icfg, guess=vel.interior)


def _status(traj: Trajectory, expect_completion: bool) -> int:
    if traj.termination == SOLVER_FAILURE:
        return EXIT_NUMERIC
    if expect_completion and traj.termination != COMPLETED:
        return EXIT_NUMERIC
    return EXIT_OK


# -- verbs ---------------------------------------------------------------------


def cmd_run(args) -> int:
    opts = _settings(args)
    sc = _scenario(opts)
    r = _parse_r(args.r if args.r is not None else opts["r"])
    times = _parse_times(args.snapshots if args.snapshots is not None else opts["snapshots"])
    outdir = Path(opts["output"])
    outdir.mkdir(parents=True, exist_ok=True)
    icfg, traj = _integrate(sc, r, opts, times)
    names, data = _trajectory_columns(traj)
    path = _write_table(outdir / "trajectory", names, data, opts["format"])
    written, skipped = _snapshots(traj, times, outdir, opts["format"], icfg.dt)
    summary = _summary(sc, r, icfg, traj)
    summary.update(trajectory_file=path.name, snapshots=written, skipped_snapshots=skipped)
    _write_json(outdir / "summary.json", summary)
    print(f"{sc.name} r={r}: {traj.termination}"
          + (f" at t={traj.blowup_time:.6g} ({traj.blowup_reason})" if traj.termination == BLOWUP else "")
          + f", {len(traj)} samples -> {outdir}")
    return _status(traj, opts["expect_completion"])


def _infinity_columns(traj: Trajectory) -> dict:
    Q, u = traj.Q[:, 0], traj.u[:, 1]
    z = max(u[0] / Q[0], u[0] / (1 - Q[0]))
    return {"z": z, "inf_deviation": float(np.max(np.abs(u - z * np.minimum(Q, 1 - Q))))}


def cmd_sweep(args) -> int:
    opts = _settings(args)
    sc = _scenario(opts)
    r_list = _parse_r_list(args.r if args.r is not None else opts["r"])
    outdir = Path(opts["output"])
    outdir.mkdir(parents=True, exist_ok=True)
    one_point = sc.name == "one_point"
    lock = threading.Lock()

    def job(r):
        row = {"r": r, "status": "error", "blew_up": 0, "blowup_time": math.nan, "max_drift": math.nan}
        if one_point:
            row.update(z=math.nan, inf_deviation=math.nan)
        try:
            icfg, traj = _integrate(sc, r, opts)
            sub = outdir / f"r_{r:02d}"
            sub.mkdir(exist_ok=True)
            names, data = _trajectory_columns(traj)
            _write_table(sub / "trajectory", names, data, opts["format"])
            _write_json(sub / "summary.json", _summary(sc, r, icfg, traj))
            row.update(status=traj.termination, max_drift=energy_drift(traj))
            if traj.termination == BLOWUP:
                row.update(blew_up=1, blowup_time=traj.blowup_time)
            if one_point:
                row.update(_infinity_columns(traj))
            failed = _status(traj, opts["expect_completion"]) != EXIT_OK
        except (ValueError, ArithmeticError) as exc:
            row["status"] = f"error: {exc}"
            failed = True
        with lock:
            print(f"r={r}: {row['status']}", file=sys.stderr)
        return row, failed

    with ThreadPoolExecutor(max_workers=default_workers(len(r_list))) as pool:
        results = list(pool.map(job, r_list))
    rows = [row for row, _ in results]
    names = list(rows[0].keys())
    path = _write_table(outdir / "aggregate", names, [[row[k] for k in names] for row in rows], opts["format"])
    print(f"{sc.name}: {len(rows)} runs -> {path}")
    return EXIT_NUMERIC if any(f for _, f in results) else EXIT_OK


def cmd_check(args) -> int:
    report = run_suite(args.suite)
    text = json.dumps(_clean(report), indent=2, sort_keys=True)
    print(text)
    if args.output:
        outdir = Path(args.output)
        outdir.mkdir(parents=True, exist_ok=True)
        _write_json(outdir / f"check_{args.suite}.json", report)
    return EXIT_OK if report["status"] == "pass" else EXIT_NUMERIC


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return {"run": cmd_run, "sweep": cmd_sweep, "check": cmd_check}[args.verb](args)
    except (UsageError, ScenarioError, UnknownSuiteError, MisuseError) as exc:
        print(f"rhs-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:  # invalid parameters caught by the library (e.g. r)
        print(f"rhs-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"rhs-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
