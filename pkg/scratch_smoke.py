"""Scratch smoke checks (not part of the package)."""
import math
import numpy as np

from minmaneuver.model import (Costate, HomotopyState, State, VehicleParams,
                               adjoint_dynamics, dynamics, hamiltonian,
                               control_law, Control)
from minmaneuver.frames import (EulerAngles, FrameChange, apply_frame_change,
                                body_axis, choose_beta)
from minmaneuver.ocp0 import Ocp0Problem, embed_in_mtcp, solve_ocp0
from minmaneuver.shooting import CaseSpec, ShootingPoint, residual_s1
from minmaneuver.integrator import propagate

rng = np.random.default_rng(0)

# --- 1. adjoint vs central differences of H ---
vp = VehicleParams(a=25.0, b_bar=0.0158)
hs = HomotopyState(1.0, 1.0, 0.0, 0.0, 1.0)
worst = 0.0
for _ in range(200):
    x = State(*rng.normal(0, 100, 3), *rng.uniform(-1.2, 1.2, 3),
              *rng.uniform(-0.2, 0.2, 2))
    p = Costate(*rng.normal(0, 1, 8))
    u = Control(*rng.uniform(-0.7, 0.7, 2))
    ana = adjoint_dynamics(x, p, u, vp, 0.0)
    xa = x.as_array()
    fd = np.empty(8)
    for i in range(8):
        h = 1e-6 * max(1.0, abs(xa[i]))
        xp, xm = xa.copy(), xa.copy()
        xp[i] += h; xm[i] -= h
        fd[i] = -(hamiltonian(State.from_array(xp), p, u, vp, hs)
                  - hamiltonian(State.from_array(xm), p, u, vp, hs)) / (2*h)
    err = np.max(np.abs(ana - fd) / np.maximum(1.0, np.abs(fd)))
    worst = max(worst, err)
print(f"adjoint vs FD worst rel err (no aero): {worst:.2e}")

vp_peg = VehicleParams(a=24.873, b_bar=0.0607, c_x=5e-6, c_z=5e-6)
worst = 0.0
for _ in range(200):
    v = rng.normal(0, 200, 3)
    if math.hypot(v[1], v[2]) < 5.0:
        continue
    x = State(*v, *rng.uniform(-1.2, 1.2, 3), *rng.uniform(-0.2, 0.2, 2))
    p = Costate(*rng.normal(0, 1, 8))
    u = Control(*rng.uniform(-0.7, 0.7, 2))
    lam3 = rng.choice([0.5, 1.0])
    ana = adjoint_dynamics(x, p, u, vp_peg, lam3)
    hs3 = HomotopyState(1.0, 1.0, lam3, 0.0, 1.0)
    xa = x.as_array()
    fd = np.empty(8)
    for i in range(8):
        h = 1e-6 * max(1.0, abs(xa[i]))
        xp, xm = xa.copy(), xa.copy()
        xp[i] += h; xm[i] -= h
        fd[i] = -(hamiltonian(State.from_array(xp), p, u, vp_peg, hs3)
                  - hamiltonian(State.from_array(xm), p, u, vp_peg, hs3)) / (2*h)
    err = np.max(np.abs(ana - fd) / np.maximum(1.0, np.abs(fd)))
    worst = max(worst, err)
print(f"adjoint vs FD worst rel err (aero):    {worst:.2e}")

# --- 2. OCP0 + embedding residual at lam1=0 ---
case = CaseSpec(
    v0=np.array([2000*math.sin(math.radians(38)), 0.0,
                 2000*math.cos(math.radians(38))]),
    theta0=math.radians(38), psi0=0.0, phi0=0.0, omega_x0=0.0, omega_y0=0.0,
    theta_f=math.radians(40), psi_f=0.0, phi_f=0.0, omega_xf=0.0,
    omega_yf=0.0)
w = body_axis(case.theta_f, case.psi_f)
prob = Ocp0Problem(case.v0, w, vp.a, vp.g_vec)
sol = solve_ocp0(prob, case.psi0, case.psi_f)
print(f"ocp0: t_f={sol.t_f:.4f}  e*={sol.e_star}  theta*={math.degrees(sol.theta_star):.2f} deg")
x0, p0 = embed_in_mtcp(prob, sol)
vtf = case.v0 + (vp.a*sol.e_star + vp.g_vec)*sol.t_f
print(f"ocp0 parallelism: |v(tf) x w|/|v| = {np.linalg.norm(np.cross(vtf, w))/np.linalg.norm(vtf):.2e}")

hs0 = HomotopyState(0.0, 0.0, 0.0, 0.0, 1.0)
sp = ShootingPoint(p0, sol.t_f)
r = residual_s1(sp, case, vp, hs0, sol)
print(f"embedded seed residual at lam1=0: {np.max(np.abs(r)):.2e}")
print("rows:", np.array2string(r, precision=2))

# --- 3. frame-change round trip + Hamiltonian invariance ---
fc = FrameChange(0.4, -0.2)
x = State(100.0, -30.0, 60.0, 0.5, 0.2, -0.3, 0.05, -0.02)
p = Costate(*rng.normal(0, 1, 8))
xp_, pp_ = apply_frame_change(fc, x, p)
xb, pb = apply_frame_change(fc, xp_, pp_, inverse=True)
print(f"round trip err: {np.max(np.abs(xb.as_array()-x.as_array())):.2e} "
      f"{np.max(np.abs(pb.as_array()-p.as_array())):.2e}")
u = control_law(p, vp, hs)
H1 = hamiltonian(x, p, u, vp, hs)
vp_rot = VehicleParams(vp.a, vp.b_bar, vp.c_x, vp.c_z,
                       g=tuple(fc.transfer_matrix() @ vp.g_vec))
H2 = hamiltonian(xp_, pp_, u, vp_rot, hs)
print(f"H invariance: {H1:.10f} vs {H2:.10f}  diff={abs(H1-H2):.2e}")

# --- 4. choose_beta sanity ---
att0 = EulerAngles(math.radians(38), math.radians(10), 0.0)
attf = EulerAngles(math.radians(40), math.radians(30), 0.0)
beta = choose_beta(0.0, att0, attf)
from minmaneuver.frames import transform_attitude
L = FrameChange(0.0, beta).transfer_matrix()
a0p = transform_attitude(L, *att0.as_tuple())
afp = transform_attitude(L, *attf.as_tuple())
print(f"choose_beta: beta={math.degrees(beta):.3f} deg, "
      f"psi0'={math.degrees(a0p.psi):.4f}, psif'={math.degrees(afp.psi):.4f}, "
      f"sum={a0p.psi+afp.psi:.2e}")
