"""Closed-form order-zero problem: steer velocity parallel to a target
direction in minimum time with a freely-oriented constant-norm thrust.

The attitude is treated as an instantaneous control, which reduces the
dynamics to v_dot = a*e + g with |e| = 1 and terminal condition
v(t_f) // w.  The optimum is a constant thrust direction orthogonal to w,
the final time is a quadratic root, and the velocity costate is proportional
to the thrust direction.  The solution embeds into the full problem as an
exact equilibrium of the attitude sub-extremal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateThrustError, InfeasibleError
from .model import Costate, State


@dataclass
class Ocp0Problem:
    v0: np.ndarray        # initial velocity [m/s]
    w: np.ndarray         # unit target direction
    a: float              # thrust acceleration [m/s^2]
    g: np.ndarray         # gravity vector [m/s^2]

    def __post_init__(self):
        self.v0 = np.asarray(self.v0, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        nw = np.linalg.norm(self.w)
        if abs(nw - 1.0) > 1e-9:
            raise ValueError(f"target direction must be unit (|w|={nw})")
        if self.a <= 0.0:
            raise ValueError("thrust acceleration must be > 0")


@dataclass
class Ocp0Solution:
    e_star: np.ndarray    # optimal unit thrust direction
    t_f: float            # minimal time [s]
    p_v: np.ndarray       # velocity costate
    theta_star: float     # pitch reproducing e_star
    psi_star: float       # yaw reproducing e_star
    phi_star: float       # roll (free; chosen)


def _fallback_direction(w: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Deterministic unit direction orthogonal to w (t_f = 0 degenerate
    case, where the thrust direction is immaterial)."""
    pg = g - np.dot(g, w) * w
    npg = np.linalg.norm(pg)
    if npg > 1e-12:
        return -pg / npg
    k = int(np.argmin(np.abs(w)))
    e = np.zeros(3)
    e[k] = 1.0
    e -= np.dot(e, w) * w
    return e / np.linalg.norm(e)


def solve_ocp0(prob: Ocp0Problem, psi0: float = 0.0, psif: float = 0.0,
               phi_star: float = 0.0) -> Ocp0Solution:
    """Closed-form optimum of the order-zero problem.

    psi0/psif select the Euler branch for the thrust direction; phi_star is
    the (free) roll angle carried into the embedding.
    Raises InfeasibleError when the quadratic has no admissible root and
    DegenerateThrustError when thrust cannot dominate transverse gravity.
    """
    v0, w, a, g = prob.v0, prob.w, prob.a, prob.g
    gw = float(np.dot(g, w))
    vw = float(np.dot(v0, w))
    pg = g - gw * w
    pv0 = v0 - vw * w
    a1 = a * a - float(np.dot(pg, pg))
    a2 = -2.0 * float(np.dot(pv0, pg))
    a3 = -float(np.dot(pv0, pv0))

    if abs(a1) < 1e-9 * a * a:
        raise DegenerateThrustError(
            "thrust magnitude equals transverse gravity (a1 ~ 0)")
    disc = a2 * a2 - 4.0 * a1 * a3
    if disc < 0.0:
        raise InfeasibleError("negative discriminant in the order-zero root")
    sq = math.sqrt(disc)
    if a1 > 0.0:
        t_f = (-a2 + sq) / (2.0 * a1)
    else:
        # weak thrust: the published root formula does not fix the sign, so
        # take the smallest positive root with forward orientation
        candidates = [t for t in ((-a2 + sq) / (2.0 * a1),
                                  (-a2 - sq) / (2.0 * a1))
                      if t > 0.0 and vw + gw * t > 0.0]
        if not candidates:
            raise InfeasibleError("no positive forward root for a1 < 0")
        t_f = min(candidates)
    if t_f < 0.0:
        raise InfeasibleError(f"negative minimal time t_f={t_f}")

    k = vw + gw * t_f
    if t_f > 1e-12:
        if k <= 0.0:
            raise InfeasibleError(
                "final velocity would be anti-parallel to the target")
        e_star = ((k * w - v0) / t_f - g) / a
    else:
        t_f = 0.0
        if vw <= 0.0:
            raise InfeasibleError(
                "already parallel but pointing away from the target")
        e_star = _fallback_direction(w, g)
    ne = np.linalg.norm(e_star)
    if abs(ne - 1.0) > 1e-6:
        raise InfeasibleError(f"thrust direction norm {ne} (expected 1)")
    e_star = e_star / ne

    denom = a + float(np.dot(e_star, g))
    if abs(denom) < 1e-12:
        raise InfeasibleError("a + <e*, g> = 0: costate normalization fails")
    p_v = e_star / denom  # -p0 = 1

    theta_star, psi_star = extract_euler(e_star, psi0, psif)
    return Ocp0Solution(e_star, t_f, p_v, theta_star, psi_star, phi_star)


def extract_euler(e_star: np.ndarray, psi0: float, psif: float) -> tuple:
    """Pitch/yaw pair reproducing a unit direction through body_axis.

    Two branches exist (cos(psi) of either sign); the returned pair minimizes
    |psi0 - psi| + |psif - psi|, with ties broken toward the principal
    branch.
    """
    ex, ey, ez = (float(c) for c in e_star)
    sy = max(-1.0, min(1.0, -ey))
    th1 = math.atan2(ex, ez)
    psi1 = math.asin(sy)
    th2 = math.atan2(-ex, -ez)
    sign = 1.0 if ey >= 0.0 else -1.0
    psi2 = -sign * (math.pi - math.asin(min(1.0, abs(ey))))
    cost1 = abs(psi0 - psi1) + abs(psif - psi1)
    cost2 = abs(psi0 - psi2) + abs(psif - psi2)
    if cost2 < cost1:
        return th2, psi2
    return th1, psi1


def embed_in_mtcp(prob: Ocp0Problem, sol: Ocp0Solution,
                  phi_star: float = None) -> tuple:
    """Initial (State, Costate) of the order-zero extremal seen in the full
    problem: attitude frozen at the optimal direction, zero rates, zero
    attitude costates, u = (0,0)."""
    phi = sol.phi_star if phi_star is None else phi_star
    x = State(prob.v0[0], prob.v0[1], prob.v0[2],
              sol.theta_star, sol.psi_star, phi, 0.0, 0.0)
    p = Costate(sol.p_v[0], sol.p_v[1], sol.p_v[2], 0.0, 0.0, 0.0, 0.0, 0.0)
    return x, p


def parallelism_defect(v: np.ndarray, w: np.ndarray) -> float:
    """|v x w| / max(|v|, tiny): relative departure from parallelism."""
    cross = np.cross(v, w)
    return float(np.linalg.norm(cross) / max(np.linalg.norm(v), 1e-300))
