"""Post-processing of propagated extremals: control angle, switch detection,
control continuity, and Hamiltonian profiles."""

from __future__ import annotations

import math

import numpy as np

from .integrator import Trajectory
from .model import GIMBAL_THRESHOLD, HomotopyState, VehicleParams, \
    hamiltonian_core


def control_angle(traj: Trajectory) -> np.ndarray:
    """Direction zeta of the control at every node (u1 = |u| cos zeta)."""
    return np.arctan2(traj.controls[:, 1], traj.controls[:, 0])


def control_flips(traj: Trajectory, angle_threshold: float = 0.5 * math.pi,
                  min_norm: float = 0.3) -> np.ndarray:
    """Times where the control direction jumps by more than the threshold.

    Nodes with control norm below min_norm on either side are skipped (the
    direction is meaningless near a vanishing control).
    """
    zeta = control_angle(traj)
    norms = np.hypot(traj.controls[:, 0], traj.controls[:, 1])
    times = traj.times
    flips = []
    for i in range(len(zeta) - 1):
        if norms[i] < min_norm or norms[i + 1] < min_norm:
            continue
        d = abs(math.remainder(zeta[i + 1] - zeta[i], 2.0 * math.pi))
        if d > angle_threshold:
            flips.append(0.5 * (times[i] + times[i + 1]))
    return np.array(flips)


def max_control_jump(traj: Trajectory) -> float:
    """Largest adjacent-node change of any control component."""
    d = np.abs(np.diff(traj.controls, axis=0))
    return float(d.max()) if d.size else 0.0


def hamiltonian_profile(traj: Trajectory, vp: VehicleParams,
                        hs: HomotopyState,
                        sing_threshold: float = GIMBAL_THRESHOLD
                        ) -> np.ndarray:
    """Stage Hamiltonian evaluated at every node of the trajectory."""
    out = np.empty(len(traj))
    for i in range(len(traj)):
        out[i] = hamiltonian_core(traj.states[i], traj.costates[i],
                                  traj.controls[i, 0], traj.controls[i, 1],
                                  vp, hs, sing_threshold)
    return out
