"""Scratch: full pipeline on the planar flight case."""
import math
import sys
import time
import numpy as np

from minmaneuver.config import case_from_degrees, PRESET_VEHICLES
from minmaneuver.continuation import SolverOptions, solve_case
from minmaneuver.model import VehicleParams, HomotopyState
from minmaneuver.diagnostics import control_flips, hamiltonian_profile, \
    max_control_jump

stop = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
theta0 = float(sys.argv[2]) if len(sys.argv) > 2 else 38.0
v0 = float(sys.argv[3]) if len(sys.argv) > 3 else 2000.0

vp = VehicleParams(**PRESET_VEHICLES["ariane-flight"])
case = case_from_degrees(v0=v0, theta_v0=theta0, psi_v0=0.0,
                         theta0=theta0, psi0=0.0, phi0=0.0,
                         omega_x0=0.0, omega_y0=0.0,
                         theta_f=40.0, psi_f=0.0)
opts = SolverOptions(stop_lambda4=stop)
t0 = time.perf_counter()
out = solve_case(case, vp, opts)
wall = time.perf_counter() - t0
print(f"status={out.status.value} lam4={out.lam4_final:.4f} "
      f"t_f={out.t_f:.4f} res={out.residual_norm:.2e} wall={wall:.1f}s")
print("stage times:", {k: round(v, 2) for k, v in out.stage_times.items()})
print("stage sims :", out.stage_sims)
if out.trajectory is not None:
    flips = control_flips(out.trajectory)
    print("control flips at t =", np.round(flips, 2))
    print("max |du| adjacent =", round(max_control_jump(out.trajectory), 4))
    hs = HomotopyState(1.0, 1.0, 0.0, out.lam4_final, opts.gamma)
    H = hamiltonian_profile(out.trajectory, vp, hs)
    print(f"max |H(t)| over nodes = {np.max(np.abs(H)):.2e}")
    hist = out.stage_histories.get("lambda4", [])
    if hist:
        print("lam4 history (lam, t_f):",
              [(round(l, 3), round(t, 2)) for l, t in hist[:6]], "...",
              [(round(l, 4), round(t, 2)) for l, t in hist[-3:]])
