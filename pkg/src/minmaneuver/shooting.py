"""Shooting residuals for the continuation stages.

The unknowns are the 8 initial costates and the final time; each stage maps
them to a 9-component residual built from a single propagation of the
extremal flow.  Velocity rows are divided by max(1, |v0|) so the mixed-unit
system stays well scaled for the root finder; the transversality condition is
kept as a residual row instead of eliminating an unknown.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError
from .frames import body_axis
from .integrator import DEFAULT_STEPS, Trajectory, propagate, terminal_point
from .model import (GIMBAL_THRESHOLD, Costate, HomotopyState, State,
                    VehicleParams, hamiltonian_core)
from .ocp0 import Ocp0Solution

_T_F_MAX = 1e5


@dataclass
class ShootingPoint:
    """The 9 unknowns: initial costate and final time."""

    p0: Costate
    t_f: float

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p0.as_array(), [self.t_f]])

    @classmethod
    def from_vector(cls, z) -> "ShootingPoint":
        z = np.asarray(z, dtype=float)
        return cls(Costate.from_array(z[:8]), float(z[8]))


@dataclass
class NaturalEndpoint:
    """Free terminal attitude reached at the end of the first stage."""

    theta_e: float
    psi_e: float
    phi_e: float
    omega_xe: float
    omega_ye: float


@dataclass
class CaseSpec:
    """Terminal data of one maneuver problem (angles in radians)."""

    v0: np.ndarray
    theta0: float
    psi0: float
    phi0: float
    omega_x0: float
    omega_y0: float
    theta_f: float
    psi_f: float
    phi_f: float
    omega_xf: float
    omega_yf: float
    natural: NaturalEndpoint = None

    def __post_init__(self):
        self.v0 = np.asarray(self.v0, dtype=float)

    @property
    def target_direction(self) -> np.ndarray:
        return body_axis(self.theta_f, self.psi_f)

    @property
    def velocity_scale(self) -> float:
        return max(1.0, float(np.linalg.norm(self.v0)))


class SimCounter:
    """Counts extremal propagations (the paper's 'simulations')."""

    def __init__(self):
        self.count = 0

    def add(self, k: int = 1):
        self.count += k


def blend_initial_state(case: CaseSpec, lam1: float,
                        seed: Ocp0Solution) -> State:
    """Initial state of the lam1 family: velocity fixed at v0, attitude and
    rates blended linearly from the order-zero values to the case values."""
    th = seed.theta_star * (1.0 - lam1) + case.theta0 * lam1
    ps = seed.psi_star * (1.0 - lam1) + case.psi0 * lam1
    ph = seed.phi_star * (1.0 - lam1) + case.phi0 * lam1
    wx = case.omega_x0 * lam1
    wy = case.omega_y0 * lam1
    return State(case.v0[0], case.v0[1], case.v0[2], th, ps, ph, wx, wy)


def _propagate_terminal(sp: ShootingPoint, case: CaseSpec, vp: VehicleParams,
                        hs: HomotopyState, seed: Ocp0Solution,
                        n_steps: int, sing_threshold: float,
                        counter: SimCounter):
    if not math.isfinite(sp.t_f) or sp.t_f <= 0.0 or sp.t_f > _T_F_MAX:
        return None
    x0 = blend_initial_state(case, hs.lam1, seed)
    if counter is not None:
        counter.add()
    try:
        traj = propagate(x0, sp.p0, sp.t_f, vp, hs, n_steps, sing_threshold)
    except NonFiniteError:
        return None
    return traj


def _terminal_rows(traj: Trajectory, case: CaseSpec, vp: VehicleParams,
                   hs: HomotopyState, sing_threshold: float):
    """Common terminal quantities: velocity rows, transversality row, H."""
    xf = traj.states[-1]
    pf = traj.costates[-1]
    u1, u2 = traj.controls[-1]
    sthf, cthf = math.sin(case.theta_f), math.cos(case.theta_f)
    spsf, cpsf = math.sin(case.psi_f), math.cos(case.psi_f)
    vscale = case.velocity_scale
    vel1 = (xf[2] * spsf + xf[1] * cthf * cpsf) / vscale
    vel2 = (xf[2] * sthf - xf[0] * cthf) / vscale
    trans = pf[1] * spsf - (pf[0] * sthf * cpsf + pf[2] * cthf * cpsf)
    ham = hamiltonian_core(xf, pf, u1, u2, vp, hs, sing_threshold)
    return xf, pf, vel1, vel2, trans, ham


def residual_s1(sp: ShootingPoint, case: CaseSpec, vp: VehicleParams,
                hs: HomotopyState, seed: Ocp0Solution,
                n_steps: int = DEFAULT_STEPS,
                sing_threshold: float = GIMBAL_THRESHOLD,
                counter: SimCounter = None) -> np.ndarray:
    """Stage-one residual: free terminal attitude (costate rows), the two
    velocity-parallelism rows, transversality, and H(t_f)."""
    traj = _propagate_terminal(sp, case, vp, hs, seed, n_steps,
                               sing_threshold, counter)
    if traj is None:
        return np.full(9, np.nan)
    xf, pf, vel1, vel2, trans, ham = _terminal_rows(traj, case, vp, hs,
                                                    sing_threshold)
    return np.array([pf[6], pf[7], pf[3], pf[4], pf[5], ham,
                     vel1, vel2, trans])


def residual_s2(sp: ShootingPoint, case: CaseSpec, vp: VehicleParams,
                hs: HomotopyState, seed: Ocp0Solution,
                n_steps: int = DEFAULT_STEPS,
                sing_threshold: float = GIMBAL_THRESHOLD,
                counter: SimCounter = None) -> np.ndarray:
    """Later-stage residual: terminal attitude/rate rows blended by lam2 from
    the natural endpoint to the target, then velocity rows, transversality,
    and H(t_f).  Reused unchanged for the aero and bang-control stages."""
    if case.natural is None:
        raise ValueError("natural endpoint must be recorded before stage two")
    traj = _propagate_terminal(sp, case, vp, hs, seed, n_steps,
                               sing_threshold, counter)
    if traj is None:
        return np.full(9, np.nan)
    xf, pf, vel1, vel2, trans, ham = _terminal_rows(traj, case, vp, hs,
                                                    sing_threshold)
    nat = case.natural
    lam2 = hs.lam2
    return np.array([
        xf[6] - (1.0 - lam2) * nat.omega_xe - lam2 * case.omega_xf,
        xf[7] - (1.0 - lam2) * nat.omega_ye - lam2 * case.omega_yf,
        xf[3] - (1.0 - lam2) * nat.theta_e - lam2 * case.theta_f,
        xf[4] - (1.0 - lam2) * nat.psi_e - lam2 * case.psi_f,
        xf[5] - (1.0 - lam2) * nat.phi_e - lam2 * case.phi_f,
        vel1, vel2, trans, ham,
    ])


def record_natural_endpoint(traj: Trajectory, case: CaseSpec) -> CaseSpec:
    """Copy of the case with the free terminal attitude of the converged
    stage-one extremal recorded as the lam2 blend origin."""
    end = terminal_point(traj)
    nat = NaturalEndpoint(end.x.theta, end.x.psi, end.x.phi,
                          end.x.omega_x, end.x.omega_y)
    return dataclasses.replace(case, natural=nat)
