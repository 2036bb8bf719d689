"""Fixed-step RK4 propagation of the coupled extremal system.

The flow runs on normalized time tau in [0, 1] with the final time as a
multiplier, which is the standard free-final-time transformation; with a
uniform grid this is identical to stepping the physical-time field with
dt = t_f/n.  The closed-loop control is recomputed at every stage evaluation
and the singular-limit field is substituted pointwise near cos(psi)=0.
No event localization is done at control switches: the fixed-step scheme
marches through them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError
from .model import (GIMBAL_THRESHOLD, Costate, HomotopyState, State,
                    VehicleParams, control_core, extremal_core)

DEFAULT_STEPS = 512
_OVERFLOW_LIMIT = 1e12
_R16 = tuple(range(16))


@dataclass
class ExtremalPoint:
    x: State
    p: Costate
    tau: float


@dataclass
class Trajectory:
    """Extremal stored on a uniform tau grid, first node tau=0, last tau=1."""

    taus: np.ndarray       # (n+1,)
    states: np.ndarray     # (n+1, 8)
    costates: np.ndarray   # (n+1, 8)
    controls: np.ndarray   # (n+1, 2)
    t_f: float

    def __len__(self) -> int:
        return len(self.taus)

    @property
    def times(self) -> np.ndarray:
        return self.taus * self.t_f

    def point(self, i: int) -> ExtremalPoint:
        return ExtremalPoint(State.from_array(self.states[i]),
                             Costate.from_array(self.costates[i]),
                             float(self.taus[i]))


def rk4_solve(f, y0, t_span=(0.0, 1.0), n_steps: int = DEFAULT_STEPS):
    """Generic fixed-step RK4 for dy/dt = f(t, y); returns (ts, ys).

    Kept independent of the extremal machinery so it can be checked against
    closed-form flows.
    """
    t0, t1 = t_span
    y = np.asarray(y0, dtype=float)
    ts = np.linspace(t0, t1, n_steps + 1)
    ys = np.empty((n_steps + 1,) + y.shape)
    ys[0] = y
    h = (t1 - t0) / n_steps
    for i in range(n_steps):
        t = ts[i]
        k1 = np.asarray(f(t, y))
        k2 = np.asarray(f(t + 0.5 * h, y + 0.5 * h * k1))
        k3 = np.asarray(f(t + 0.5 * h, y + 0.5 * h * k2))
        k4 = np.asarray(f(t + h, y + h * k3))
        y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        ys[i + 1] = y
    return ts, ys


def _check_node(y, tau: float):
    for c in y:
        if not math.isfinite(c) or abs(c) > _OVERFLOW_LIMIT:
            raise NonFiniteError(
                f"non-finite extremal component at tau={tau:.6f}", tau=tau)


def propagate(x0: State, p0: Costate, t_f: float, vp: VehicleParams,
              hs: HomotopyState, n_steps: int = DEFAULT_STEPS,
              sing_threshold: float = GIMBAL_THRESHOLD) -> Trajectory:
    """RK4 flow of the 16-dim extremal system over [0, t_f].

    Raises NonFiniteError (with the failing tau) on overflow and ValueError
    on a non-positive final time or fewer than 16 steps.
    """
    if t_f <= 0.0:
        raise ValueError(f"final time must be > 0, got {t_f}")
    if n_steps < 16:
        raise ValueError("n_steps must be >= 16")

    field = extremal_core
    b_bar, gamma, lam4 = vp.b_bar, hs.gamma, hs.lam4
    y = tuple(x0.as_array()) + tuple(p0.as_array())
    _check_node(y, 0.0)

    n = n_steps
    dt = t_f / n
    states = np.empty((n + 1, 8))
    costates = np.empty((n + 1, 8))
    controls = np.empty((n + 1, 2))
    taus = np.linspace(0.0, 1.0, n + 1)

    states[0] = y[:8]
    costates[0] = y[8:]
    controls[0] = control_core(y[14], y[15], b_bar, gamma, lam4)

    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(n):
        k1 = field(y, vp, hs, sing_threshold)
        y2 = tuple(y[j] + half * k1[j] for j in _R16)
        k2 = field(y2, vp, hs, sing_threshold)
        y3 = tuple(y[j] + half * k2[j] for j in _R16)
        k3 = field(y3, vp, hs, sing_threshold)
        y4 = tuple(y[j] + dt * k3[j] for j in _R16)
        k4 = field(y4, vp, hs, sing_threshold)
        y = tuple(y[j] + sixth * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j])
                  for j in _R16)
        tau = taus[i + 1]
        _check_node(y, tau)
        states[i + 1] = y[:8]
        costates[i + 1] = y[8:]
        controls[i + 1] = control_core(y[14], y[15], b_bar, gamma, lam4)

    return Trajectory(taus, states, costates, controls, t_f)


def terminal_point(traj: Trajectory) -> ExtremalPoint:
    """The tau = 1 node of a propagated extremal."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    return traj.point(len(traj) - 1)
