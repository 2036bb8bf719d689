"""Command-line entry points: single-case solve and factorial sweep.

    minmaneuver solve --config <file> [--case <file>] [--no-frame-change]
                      [--stop-lambda4 <v>] [--out <dir>]
    minmaneuver sweep --config <file> --sweep <file> [--no-frame-change]
                      [--jobs N] [--out <dir>]

Outputs: trajectory CSV and summary JSON per solve; JSON-lines and an
aggregate text table per sweep.  Solver tolerances and step counts can be
overridden with MINMANEUVER_* environment variables (see README).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .config import (LauncherConfig, SweepSpec, generate_cases, parse_config)
from .continuation import (RunOutcome, RunStatus, SolverOptions, solve_case,
                           solve_with_frame_search)
from .errors import ParseError
from .frames import velocity_to_angles
from .model import VehicleParams
from .shooting import CaseSpec

CSV_COLUMNS = ["t", "v_x", "v_y", "v_z", "theta", "psi", "phi",
               "omega_x", "omega_y",
               "p_vx", "p_vy", "p_vz", "p_theta", "p_psi", "p_phi",
               "p_omega_x", "p_omega_y", "u1", "u2", "u_norm", "zeta"]

_ENV_FLOAT = {
    "MINMANEUVER_TOL": "tol",
    "MINMANEUVER_GAMMA": "gamma",
    "MINMANEUVER_STOP_LAMBDA4": "stop_lambda4",
    "MINMANEUVER_MIN_STEP": "min_step",
    "MINMANEUVER_INITIAL_STEP": "initial_step",
}
_ENV_INT = {
    "MINMANEUVER_N_STEPS": "n_steps",
    "MINMANEUVER_MAX_EVAL": "max_eval",
    "MINMANEUVER_MAX_FRAME_ATTEMPTS": "max_frame_attempts",
}


def apply_env_overrides(opts: SolverOptions, env=None) -> SolverOptions:
    env = os.environ if env is None else env
    for var, attr in _ENV_FLOAT.items():
        if var in env:
            setattr(opts, attr, float(env[var]))
    for var, attr in _ENV_INT.items():
        if var in env:
            setattr(opts, attr, int(env[var]))
    if "MINMANEUVER_DELTA_ALPHA_DEG" in env:
        opts.delta_alpha = math.radians(
            float(env["MINMANEUVER_DELTA_ALPHA_DEG"]))
    return opts


def write_trajectory_csv(path: str, out: RunOutcome,
                         validate: bool = True) -> None:
    """Emit the trajectory table; for successful runs the last row is
    re-validated against the terminal conditions before writing."""
    traj = out.trajectory
    if traj is None:
        raise ValueError("outcome carries no trajectory")
    if validate and out.status is not RunStatus.FAILED:
        _validate_terminal(out)
    times = traj.times
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for i in range(len(traj)):
            u1, u2 = traj.controls[i]
            row = ([times[i]] + list(traj.states[i]) + list(traj.costates[i])
                   + [u1, u2, math.hypot(u1, u2), math.atan2(u2, u1)])
            writer.writerow(f"{v:.12g}" for v in row)


def _validate_terminal(out: RunOutcome, tol: float = 1e-6) -> None:
    case = out.case
    xf = out.trajectory.states[-1]
    errs = {
        "theta": abs(xf[3] - case.theta_f),
        "psi": abs(xf[4] - case.psi_f),
        "phi": abs(xf[5] - case.phi_f),
        "omega_x": abs(xf[6] - case.omega_xf),
        "omega_y": abs(xf[7] - case.omega_yf),
    }
    vnorm = max(1.0, float(np.linalg.norm(xf[:3])))
    sthf, cthf = math.sin(case.theta_f), math.cos(case.theta_f)
    spsf, cpsf = math.sin(case.psi_f), math.cos(case.psi_f)
    errs["v_parallel_1"] = abs(xf[2] * spsf + xf[1] * cthf * cpsf) / vnorm
    errs["v_parallel_2"] = abs(xf[2] * sthf - xf[0] * cthf) / vnorm
    bad = {k: v for k, v in errs.items() if v > tol}
    if bad:
        raise ValueError(f"terminal conditions violated at write time: {bad}")


def _case_record(case: CaseSpec) -> dict:
    va = velocity_to_angles(case.v0)
    deg = math.degrees
    return {
        "v0": va.v, "theta_v0": deg(va.theta_v), "psi_v0": deg(va.psi_v),
        "theta0": deg(case.theta0), "psi0": deg(case.psi0),
        "phi0": deg(case.phi0),
        "omega_x0": deg(case.omega_x0), "omega_y0": deg(case.omega_y0),
        "theta_f": deg(case.theta_f), "psi_f": deg(case.psi_f),
        "phi_f": deg(case.phi_f),
        "omega_xf": deg(case.omega_xf), "omega_yf": deg(case.omega_yf),
    }


def outcome_summary(out: RunOutcome, wall_time: float = None) -> dict:
    return {
        "status": out.status.value,
        "t_f": None if out.t_f is None or math.isnan(out.t_f) else out.t_f,
        "lambda4_final": out.lam4_final,
        "residual_norm": (None if math.isinf(out.residual_norm)
                          else out.residual_norm),
        "stage_times": out.stage_times,
        "stage_sims": out.stage_sims,
        "frame_attempts": out.frame_attempts,
        "alpha_star": out.alpha_star,
        "beta_star": out.beta_star,
        "failure_stage": out.failure_stage,
        "failure_lambda": out.failure_lam,
        "wall_time": wall_time,
        "case": _case_record(out.case),
        "message": out.message,
    }


def run_solve(launcher: LauncherConfig, case: CaseSpec, out_dir: str,
              use_frames: bool = True) -> int:
    """Solve one case, write trajectory.csv and summary.json, and return the
    process exit code (0 for optimal or sub-optimal, 1 for failed)."""
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    if use_frames:
        out = solve_with_frame_search(case, launcher.vehicle, launcher.solver)
    else:
        out = solve_case(case, launcher.vehicle, launcher.solver)
    wall = time.perf_counter() - t0
    summary = outcome_summary(out, wall)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    if out.trajectory is not None:
        write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), out)
    status = out.status.value
    print(f"status={status} t_f={out.t_f if out.t_f else float('nan'):.4f} "
          f"lambda4={out.lam4_final:.4f} wall={wall:.2f}s")
    return 0 if out.status is not RunStatus.FAILED else 1


@dataclass
class SweepSummary:
    name: str
    n_cases: int
    n_easy: int
    n_difficult: int
    success_total_pct: float
    success_before_lambda4_pct: float
    mean_time_total: dict      # {'easy': s, 'difficult': s}
    mean_time_stage: dict      # {'lambda1': {'easy': ..}, ...}
    mean_sims_total: dict
    mean_sims_stage: dict
    mean_frame_attempts: dict

    @classmethod
    def from_records(cls, records: list, name: str = "",
                     easy_threshold: float = 50.0) -> "SweepSummary":
        """Aggregate per-case JSON records into the published table layout.

        Success is full optimality (lambda4 = 1); 'before lambda4' counts
        cases whose first three stages completed.  Stage means are assessed
        on the successful cases, split easy/difficult at the wall-time
        threshold.
        """
        n = len(records)
        optimal = [r for r in records if r["status"] == "optimal"]
        before = [r for r in records
                  if r["status"] in ("optimal", "suboptimal")]
        easy = [r for r in records if r["wall_time"] < easy_threshold]
        stages = ("lambda1", "lambda2", "lambda3", "lambda4")

        def split(rs):
            return {"easy": [r for r in rs
                             if r["wall_time"] < easy_threshold],
                    "difficult": [r for r in rs
                                  if r["wall_time"] >= easy_threshold]}

        def mean(rs, get):
            vals = [get(r) for r in rs]
            vals = [v for v in vals if v is not None]
            return float(np.mean(vals)) if vals else 0.0

        ok = split(optimal)
        mean_time_total = {k: mean(v, lambda r: r["wall_time"])
                           for k, v in ok.items()}
        mean_sims_total = {k: mean(v, lambda r: sum(r["stage_sims"].values()))
                           for k, v in ok.items()}
        mean_time_stage = {s: {k: mean(v, lambda r: r["stage_times"].get(s))
                               for k, v in ok.items()} for s in stages}
        mean_sims_stage = {s: {k: mean(v, lambda r: r["stage_sims"].get(s))
                               for k, v in ok.items()} for s in stages}
        mean_frames = {k: mean(v, lambda r: r["frame_attempts"])
                       for k, v in ok.items()}
        return cls(name, n, len(easy), n - len(easy),
                   100.0 * len(optimal) / n if n else 0.0,
                   100.0 * len(before) / n if n else 0.0,
                   mean_time_total, mean_time_stage,
                   mean_sims_total, mean_sims_stage, mean_frames)

    def table(self) -> str:
        lines = [
            f"Sweep results: {self.name}",
            f"  Number of cases                 {self.n_cases}",
            f"  - Easy (wall < 50 s)            {self.n_easy}",
            f"  - Difficult (wall >= 50 s)      {self.n_difficult}",
            "  Rate of success (%)",
            f"  - Total                         {self.success_total_pct:.1f}",
            f"  - Before lambda4-continuation   "
            f"{self.success_before_lambda4_pct:.1f}",
            "  Average execution time (s)      easy / difficult",
            f"  - Total                         "
            f"{self.mean_time_total['easy']:.2f} / "
            f"{self.mean_time_total['difficult']:.2f}",
        ]
        for s in ("lambda1", "lambda2", "lambda3", "lambda4"):
            st = self.mean_time_stage[s]
            lines.append(f"  - In {s}-continuation      "
                         f"{st['easy']:.2f} / {st['difficult']:.2f}")
        lines.append("  Average number of simulations   easy / difficult")
        lines.append(f"  - Total                         "
                     f"{self.mean_sims_total['easy']:.0f} / "
                     f"{self.mean_sims_total['difficult']:.0f}")
        for s in ("lambda1", "lambda2", "lambda3", "lambda4"):
            ss = self.mean_sims_stage[s]
            lines.append(f"  - In {s}-continuation      "
                         f"{ss['easy']:.0f} / {ss['difficult']:.0f}")
        lines.append(f"  Average frame changes           "
                     f"{self.mean_frame_attempts['easy']:.1f} / "
                     f"{self.mean_frame_attempts['difficult']:.1f}")
        return "\n".join(lines)


def _sweep_worker(args) -> dict:
    index, case, vp, opts, use_frames = args
    t0 = time.perf_counter()
    try:
        if use_frames:
            out = solve_with_frame_search(case, vp, opts)
        else:
            out = solve_case(case, vp, opts)
        rec = outcome_summary(out, time.perf_counter() - t0)
    except Exception as exc:  # a sweep never aborts on one case
        rec = {"status": "failed", "t_f": None, "lambda4_final": 0.0,
               "residual_norm": None, "stage_times": {}, "stage_sims": {},
               "frame_attempts": 0, "alpha_star": None, "beta_star": None,
               "failure_stage": "exception", "failure_lambda": None,
               "wall_time": time.perf_counter() - t0,
               "case": _case_record(case), "message": repr(exc)}
    rec["index"] = index
    return rec


def run_sweep(launcher: LauncherConfig, sweep: SweepSpec, out_dir: str,
              use_frames: bool = True, jobs: int = 1,
              cases: list = None) -> SweepSummary:
    """Run the factorial experiment and write JSON-lines plus a text table.

    Case generation is deterministic (lexicographic over the grids); results
    are written in case order regardless of completion order.  Per-case
    failures are recorded, never raised.
    """
    os.makedirs(out_dir, exist_ok=True)
    if cases is None:
        cases = generate_cases(sweep)
    args = [(i, c, launcher.vehicle, launcher.solver, use_frames)
            for i, c in enumerate(cases)]
    if jobs <= 1:
        records = [_sweep_worker(a) for a in args]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(_sweep_worker, args))
    records.sort(key=lambda r: r["index"])

    jsonl = os.path.join(out_dir, "cases.jsonl")
    with open(jsonl, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    summary = SweepSummary.from_records(records, name=sweep.name)
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(summary.table() + "\n")
    print(summary.table())
    return summary


def _load_launcher(path: str) -> tuple:
    launcher, payload = parse_config(path)
    if launcher is None:
        raise ParseError(f"{path} has no [launcher] section")
    apply_env_overrides(launcher.solver)
    return launcher, payload


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="minmaneuver",
        description="Minimum-time launcher maneuvers by indirect shooting "
                    "and continuation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a single maneuver case")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--case", default=None)
    p_solve.add_argument("--no-frame-change", action="store_true")
    p_solve.add_argument("--stop-lambda4", type=float, default=None)
    p_solve.add_argument("--out", default="out")

    p_sweep = sub.add_parser("sweep", help="run a factorial sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--sweep", required=True)
    p_sweep.add_argument("--no-frame-change", action="store_true")
    p_sweep.add_argument("--jobs", type=int,
                         default=int(os.environ.get("MINMANEUVER_JOBS", 1)))
    p_sweep.add_argument("--out", default="out")

    ns = parser.parse_args(argv)
    try:
        if ns.command == "solve":
            launcher, payload = _load_launcher(ns.config)
            case = payload if isinstance(payload, CaseSpec) else None
            if ns.case is not None:
                _, case = parse_config(ns.case)
            if not isinstance(case, CaseSpec):
                raise ParseError("no [case] section found "
                                 "(pass --case or add it to the config)")
            if ns.stop_lambda4 is not None:
                launcher.solver.stop_lambda4 = ns.stop_lambda4
            return run_solve(launcher, case, ns.out,
                             use_frames=not ns.no_frame_change)
        launcher, payload = _load_launcher(ns.config)
        _, sweep = parse_config(ns.sweep)
        if not isinstance(sweep, SweepSpec):
            raise ParseError(f"{ns.sweep} has no [sweep] section")
        run_sweep(launcher, sweep, ns.out,
                  use_frames=not ns.no_frame_change, jobs=ns.jobs)
        return 0
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
