"""Rotation matrices, Euler-angle maps, velocity angles, and frame changes.

All rotation matrices are passive (coordinate-transform) matrices: if a frame
is rotated by ``angle`` about ``axis``, then ``axis_rotation(axis, angle)``
maps old coordinates to new coordinates.  The sign convention is pinned by the
requirement that the vehicle symmetry axis, expressed in the launch frame for
the z(roll)-x(yaw)-y(pitch) attitude matrix, equals
``(sin(theta)cos(psi), -sin(psi), cos(theta)cos(psi))``.

The frame change is two single-axis rotations: first ``alpha`` about y (the
prose convention; the axis is configurable), then ``beta`` about x.  It acts
on the extremal as a canonical point transformation, so it preserves the
Hamiltonian exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import GimbalLockError, NoSolutionError, ZeroVelocityError
from .model import Costate, State


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


def axis_rotation(axis: str, angle: float) -> np.ndarray:
    """Passive rotation matrix about one coordinate axis."""
    if not math.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    c, s = math.cos(angle), math.sin(angle)
    if axis == "x":
        return np.array([[1.0, 0.0, 0.0],
                         [0.0, c, s],
                         [0.0, -s, c]])
    if axis == "y":
        return np.array([[c, 0.0, -s],
                         [0.0, 1.0, 0.0],
                         [s, 0.0, c]])
    if axis == "z":
        return np.array([[c, s, 0.0],
                         [-s, c, 0.0],
                         [0.0, 0.0, 1.0]])
    raise ValueError(f"unknown axis {axis!r}")


@dataclass
class EulerAngles:
    """Pitch/yaw/roll attitude, each normalized to (-pi, pi]."""

    theta: float
    psi: float
    phi: float = 0.0

    def normalized(self) -> "EulerAngles":
        return EulerAngles(normalize_angle(self.theta),
                           normalize_angle(self.psi),
                           normalize_angle(self.phi))

    def as_tuple(self) -> tuple:
        return (self.theta, self.psi, self.phi)


def attitude_matrix(theta: float, psi: float, phi: float = 0.0) -> np.ndarray:
    """Transfer matrix from the launch frame to the body frame."""
    return (axis_rotation("z", phi) @ axis_rotation("x", psi)
            @ axis_rotation("y", theta))


def euler_from_matrix(m: np.ndarray, tol: float = 1e-9) -> EulerAngles:
    """Extract (theta, psi, phi) with psi in [-pi/2, pi/2] from a transfer
    matrix of the z-x-y sequence.  Raises GimbalLockError when cos(psi) is
    smaller than ``tol`` (roll undefined)."""
    cpsi = math.hypot(m[2, 0], m[2, 2])
    if cpsi < tol:
        raise GimbalLockError("attitude matrix at cos(psi)=0")
    psi = math.asin(max(-1.0, min(1.0, -m[2, 1])))
    theta = math.atan2(m[2, 0], m[2, 2])
    phi = math.atan2(m[0, 1], m[1, 1])
    return EulerAngles(theta, psi, phi)


def body_axis(theta: float, psi: float) -> np.ndarray:
    """Unit symmetry axis of the vehicle expressed in the launch frame."""
    cpsi = math.cos(psi)
    return np.array([math.sin(theta) * cpsi,
                     -math.sin(psi),
                     math.cos(theta) * cpsi])


@dataclass
class VelocityAngles:
    """Polar description of a velocity vector.

    theta_v/psi_v are the pitch/yaw of the velocity in the same convention as
    the attitude: v = v*(sin(theta_v)cos(psi_v), -sin(psi_v),
    cos(theta_v)cos(psi_v)).  xi is the flight-path angle (cos(xi) = v_x/v)
    and kappa the bank angle (tan(kappa) = -v_y/v_z).
    """

    v: float
    theta_v: float
    psi_v: float
    xi: float
    kappa: float


def velocity_to_angles(v: np.ndarray) -> VelocityAngles:
    vx, vy, vz = (float(c) for c in v)
    mod = math.sqrt(vx * vx + vy * vy + vz * vz)
    if mod == 0.0:
        raise ZeroVelocityError("velocity angles undefined for v = 0")
    theta_v = math.atan2(vx, vz)
    psi_v = math.asin(max(-1.0, min(1.0, -vy / mod)))
    xi = math.acos(max(-1.0, min(1.0, vx / mod)))
    kappa = math.atan2(vy, -vz)
    return VelocityAngles(mod, theta_v, psi_v, xi, kappa)


def velocity_from_angles(v: float, theta_v: float, psi_v: float) -> np.ndarray:
    cpsi = math.cos(psi_v)
    return np.array([v * math.sin(theta_v) * cpsi,
                     -v * math.sin(psi_v),
                     v * math.cos(theta_v) * cpsi])


@dataclass
class FrameChange:
    """Reference-frame rotation: ``alpha`` about ``first_axis``, then ``beta``
    about x.  first_axis defaults to y; z is kept as an escape hatch."""

    alpha: float
    beta: float
    first_axis: str = "y"

    def transfer_matrix(self) -> np.ndarray:
        return axis_rotation("x", self.beta) @ axis_rotation(
            self.first_axis, self.alpha)

    @property
    def is_identity(self) -> bool:
        return self.alpha == 0.0 and self.beta == 0.0


def _rates_to_body_matrix(psi: float, phi: float) -> np.ndarray:
    """K with omega_body = K(psi, phi) @ (theta_dot, psi_dot, phi_dot)."""
    sps, cps = math.sin(psi), math.cos(psi)
    sph, cph = math.sin(phi), math.cos(phi)
    return np.array([[sph * cps, cph, 0.0],
                     [cph * cps, -sph, 0.0],
                     [-sps, 0.0, 1.0]])


def transform_attitude(transfer: np.ndarray, theta: float, psi: float,
                       phi: float) -> EulerAngles:
    """Euler angles of the same body attitude seen from the rotated frame."""
    m_new = attitude_matrix(theta, psi, phi) @ transfer.T
    return euler_from_matrix(m_new, tol=math.sin(1e-6))


def attitude_jacobian(old: EulerAngles, new: EulerAngles) -> np.ndarray:
    """Jacobian d(new angles)/d(old angles) of the attitude re-expression.

    The body angular velocity is frame-independent here, so
    K(new) @ d(new) = K(old) @ d(old) gives the Jacobian analytically.
    """
    k_old = _rates_to_body_matrix(old.psi, old.phi)
    k_new = _rates_to_body_matrix(new.psi, new.phi)
    return np.linalg.solve(k_new, k_old)


def apply_frame_change(fc: FrameChange, x: State, p: Costate,
                       inverse: bool = False) -> tuple:
    """Map a state/costate pair into the rotated reference frame.

    Velocity and its costate rotate by the transfer matrix; the Euler angles
    are re-extracted and their costates follow the inverse-transpose Jacobian
    (canonical transformation); body rates and their costates are unchanged.
    With inverse=True the transformation is undone.
    """
    transfer = fc.transfer_matrix()
    if inverse:
        transfer = transfer.T
    old = EulerAngles(x.theta, x.psi, x.phi)
    new = transform_attitude(transfer, x.theta, x.psi, x.phi)
    jac = attitude_jacobian(old, new)
    v_new = transfer @ x.velocity
    pv_new = transfer @ p.p_v
    p_att_new = np.linalg.solve(jac.T, np.array([p.p_theta, p.p_psi, p.p_phi]))
    x_new = State(v_new[0], v_new[1], v_new[2],
                  new.theta, new.psi, new.phi, x.omega_x, x.omega_y)
    p_new = Costate(pv_new[0], pv_new[1], pv_new[2],
                    p_att_new[0], p_att_new[1], p_att_new[2],
                    p.p_omega_x, p.p_omega_y)
    return x_new, p_new


def choose_beta(alpha: float, att0: EulerAngles, attf: EulerAngles,
                first_axis: str = "y", samples: int = 720) -> float:
    """Rotation about x making the transformed terminal yaws opposite.

    Solves psi'(tf) = -psi'(0) for beta by bracketing sign changes of the sum
    of the transformed yaws over (-pi, pi] and refining with Brent's method;
    among the roots the one closest to zero is returned.  Raises
    NoSolutionError when no bracket exists.
    """

    def yaw_sum(beta: float) -> float:
        transfer = FrameChange(alpha, beta, first_axis).transfer_matrix()
        try:
            p0 = transform_attitude(transfer, *att0.as_tuple()).psi
            pf = transform_attitude(transfer, *attf.as_tuple()).psi
        except GimbalLockError:
            return math.nan
        return p0 + pf

    betas = np.linspace(-math.pi, math.pi, samples + 1)
    values = [yaw_sum(b) for b in betas]
    roots = []
    for b, v in zip(betas, values):
        if v == 0.0:
            roots.append(float(b))
    for i in range(samples):
        v0, v1 = values[i], values[i + 1]
        if math.isnan(v0) or math.isnan(v1) or v0 == 0.0 or v1 == 0.0:
            continue
        if v0 * v1 < 0.0:
            roots.append(float(brentq(yaw_sum, betas[i], betas[i + 1],
                                      xtol=1e-13)))
    roots = [normalize_angle(r) for r in roots]
    if not roots:
        raise NoSolutionError(
            f"no beta in (-pi, pi] makes the yaws opposite for alpha={alpha}")
    return min(roots, key=abs)
