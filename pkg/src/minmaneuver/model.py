"""State/costate types, extremal vector fields, Hamiltonians and control laws.

State ordering (8 components, all finite):
    v_x, v_y, v_z   velocity in the launch frame [m/s]
    theta, psi, phi pitch/yaw/roll Euler angles [rad]
    omega_x, omega_y body angular rates [rad/s]
The costate carries one conjugate component per state component; the abnormal
multiplier is fixed at P0 = -1 (normal extremals only).

The attitude kinematics blow up at cos(psi)=0.  Below ``GIMBAL_THRESHOLD`` the
fields are replaced by their finite limits (singular_limit_field), which is how
every propagation in this package crosses the yaw singular set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NearGimbalLockError, SingularControlError

P0 = -1.0
GIMBAL_THRESHOLD = 1e-4

# default gravity: x_R points radially outward, so g pulls along -x_R
DEFAULT_GRAVITY = (-9.80665, 0.0, 0.0)


@dataclass
class VehicleParams:
    """Thrust/attitude authority and aerodynamic coefficients of a launcher.

    a      thrust acceleration [m/s^2], > 0
    b_bar  angular acceleration per unit control [rad/s^2], > 0
    c_x    drag coefficient [1/m], >= 0
    c_z    lift coefficient [1/m], >= 0
    g      gravity vector in the launch frame [m/s^2]
    """

    a: float
    b_bar: float
    c_x: float = 0.0
    c_z: float = 0.0
    g: tuple = DEFAULT_GRAVITY

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError("thrust acceleration a must be > 0")
        if self.b_bar <= 0.0:
            raise ValueError("angular acceleration b_bar must be > 0")
        if self.c_x < 0.0 or self.c_z < 0.0:
            raise ValueError("aerodynamic coefficients must be >= 0")
        self.g = tuple(float(c) for c in self.g)

    @property
    def g_vec(self) -> np.ndarray:
        return np.array(self.g, dtype=float)


@dataclass
class State:
    v_x: float
    v_y: float
    v_z: float
    theta: float
    psi: float
    phi: float
    omega_x: float
    omega_y: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.v_x, self.v_y, self.v_z, self.theta, self.psi, self.phi,
             self.omega_x, self.omega_y], dtype=float)

    @classmethod
    def from_array(cls, x) -> "State":
        return cls(*(float(c) for c in x))

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.v_x, self.v_y, self.v_z], dtype=float)


@dataclass
class Costate:
    p_vx: float
    p_vy: float
    p_vz: float
    p_theta: float
    p_psi: float
    p_phi: float
    p_omega_x: float
    p_omega_y: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.p_vx, self.p_vy, self.p_vz, self.p_theta, self.p_psi,
             self.p_phi, self.p_omega_x, self.p_omega_y], dtype=float)

    @classmethod
    def from_array(cls, p) -> "Costate":
        return cls(*(float(c) for c in p))

    @property
    def p_v(self) -> np.ndarray:
        return np.array([self.p_vx, self.p_vy, self.p_vz], dtype=float)


@dataclass
class Control:
    u1: float
    u2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2], dtype=float)

    @property
    def norm(self) -> float:
        return math.hypot(self.u1, self.u2)


@dataclass
class HomotopyState:
    """Continuation parameters: lam1..lam4 in [0,1], gamma > 0."""

    lam1: float = 0.0
    lam2: float = 0.0
    lam3: float = 0.0
    lam4: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("lam1", "lam2", "lam3", "lam4"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be > 0")


def _sat(v: float) -> float:
    if v > 1.0:
        return 1.0
    if v < -1.0:
        return -1.0
    return v


def control_core(p_wx: float, p_wy: float, b_bar: float, gamma: float,
                 lam4: float) -> tuple:
    """Stage-dependent extremal control from the rate costates.

    lam4 = 0 gives the regularized law u_i = sat(b_bar*p_w/2*gamma) on the
    square, lam4 = 1 the bang law Phi/|Phi| on the disk, with the published
    interpolation in between.  At lam4 = 1 with an exactly-zero switching
    vector (a singular arc, e.g. the embedded order-zero extremal) the
    singular-arc control (0, 0) is returned; the public control_law wrapper
    raises instead.
    """
    if lam4 >= 1.0:
        n = math.hypot(p_wx, p_wy)
        if n == 0.0:
            return 0.0, 0.0
        return _sat(p_wy / n), _sat(-p_wx / n)
    den = 2.0 * gamma * (1.0 - lam4) + b_bar * lam4 * math.hypot(p_wx, p_wy)
    return _sat(b_bar * p_wy / den), _sat(-b_bar * p_wx / den)


def control_law(p: Costate, vp: VehicleParams, h: HomotopyState) -> Control:
    """Extremal control; raises SingularControlError when lam4 = 1 and both
    switching components vanish (singular junction)."""
    if h.lam4 >= 1.0 and p.p_omega_x == 0.0 and p.p_omega_y == 0.0:
        raise SingularControlError("switching function vanished at lambda4=1")
    u1, u2 = control_core(p.p_omega_x, p.p_omega_y, vp.b_bar, h.gamma, h.lam4)
    return Control(u1, u2)


def switching_function(p: Costate, vp: VehicleParams) -> np.ndarray:
    """Phi = (b_bar*p_omega_y, -b_bar*p_omega_x); zeros are switching points."""
    return np.array([vp.b_bar * p.p_omega_y, -vp.b_bar * p.p_omega_x])


def _aero_accel(vx, vy, vz, c_x, c_z, lam3):
    """Aerodynamic acceleration (drag + lift) in launch-frame Cartesian form.

    Equivalent to the (v, xi, kappa) polar expressions with
    cos(xi) = v_x/v: drag is -c_x*v*(v_x,v_y,v_z) and the lift column uses
    s = sqrt(v_y^2+v_z^2).  Degenerates gracefully when s ~ 0 (lift direction
    undefined): the lift contribution is dropped there.
    """
    v = math.sqrt(vx * vx + vy * vy + vz * vz)
    ax = -c_x * v * vx
    ay = -c_x * v * vy
    az = -c_x * v * vz
    if c_z != 0.0:
        s = math.sqrt(vy * vy + vz * vz)
        if s > 1e-12 * max(1.0, v):
            ax -= c_z * v * s
            ay -= c_z * v * vx * vy / s
            az -= c_z * v * vx * vz / s
    return lam3 * ax, lam3 * ay, lam3 * az


def _aero_adjoint(vx, vy, vz, pvx, pvy, pvz, c_x, c_z, lam3):
    """d(p_v)/dt contribution -(dA/dv)^T p_v for the aero acceleration A."""
    v = math.sqrt(vx * vx + vy * vy + vz * vz)
    if v == 0.0:
        return 0.0, 0.0, 0.0
    # drag part: A_d = -c_x * v * u, dA_d/dv = -c_x (v I + u u^T / v)
    up = vx * pvx + vy * pvy + vz * pvz
    dx = c_x * (v * pvx + vx * up / v)
    dy = c_x * (v * pvy + vy * up / v)
    dz = c_x * (v * pvz + vz * up / v)
    if c_z != 0.0:
        s = math.sqrt(vy * vy + vz * vz)
        if s > 1e-12 * max(1.0, v):
            # lift part: A_l = -c_z * v * w, w = (s, vx*vy/s, vx*vz/s);
            # (dA_l/dv)^T p = -c_z * (u <w,p>/v + v W p) with W = dw/du
            # symmetric
            wx, wy, wz = s, vx * vy / s, vx * vz / s
            wp = wx * pvx + wy * pvy + wz * pvz
            s3 = s * s * s
            w11, w12, w13 = 0.0, vy / s, vz / s
            w22 = vx * vz * vz / s3
            w23 = -vx * vy * vz / s3
            w33 = vx * vy * vy / s3
            dx += c_z * (vx * wp / v + v * (w11 * pvx + w12 * pvy + w13 * pvz))
            dy += c_z * (vy * wp / v + v * (w12 * pvx + w22 * pvy + w23 * pvz))
            dz += c_z * (vz * wp / v + v * (w13 * pvx + w23 * pvy + w33 * pvz))
    return lam3 * dx, lam3 * dy, lam3 * dz


def dynamics_core(x, u1, u2, vp: VehicleParams, lam3: float) -> tuple:
    """Regular state derivative; requires |cos(psi)| >= GIMBAL_THRESHOLD."""
    vx, vy, vz, th, ps, ph, wx, wy = x
    a = vp.a
    gx, gy, gz = vp.g
    sth, cth = math.sin(th), math.cos(th)
    sps, cps = math.sin(ps), math.cos(ps)
    sph, cph = math.sin(ph), math.cos(ph)
    dvx = a * sth * cps + gx
    dvy = -a * sps + gy
    dvz = a * cth * cps + gz
    if lam3 != 0.0 and (vp.c_x != 0.0 or vp.c_z != 0.0):
        ax, ay, az = _aero_accel(vx, vy, vz, vp.c_x, vp.c_z, lam3)
        dvx += ax
        dvy += ay
        dvz += az
    ws = wx * sph + wy * cph
    dth = ws / cps
    dps = wx * cph - wy * sph
    dph = ws * sps / cps
    dwx = -vp.b_bar * u2
    dwy = vp.b_bar * u1
    return dvx, dvy, dvz, dth, dps, dph, dwx, dwy


def adjoint_core(x, p, u1, u2, vp: VehicleParams, lam3: float) -> tuple:
    """Regular costate derivative -dH/dx; same gimbal guard as dynamics_core."""
    vx, vy, vz, th, ps, ph, wx, wy = x
    pvx, pvy, pvz, pth, pps, pph, pwx, pwy = p
    a = vp.a
    sth, cth = math.sin(th), math.cos(th)
    sps, cps = math.sin(ps), math.cos(ps)
    sph, cph = math.sin(ph), math.cos(ph)
    ws = wx * sph + wy * cph
    wc = wx * cph - wy * sph
    cps2 = cps * cps
    if lam3 != 0.0 and (vp.c_x != 0.0 or vp.c_z != 0.0):
        dpvx, dpvy, dpvz = _aero_adjoint(vx, vy, vz, pvx, pvy, pvz,
                                         vp.c_x, vp.c_z, lam3)
    else:
        dpvx = dpvy = dpvz = 0.0
    dpth = -a * cps * (pvx * cth - pvz * sth)
    dpps = (a * sps * sth * pvx + a * cps * pvy + a * cth * sps * pvz
            - sps * ws / cps2 * pth - ws / cps2 * pph)
    dpph = -wc / cps * pth + ws * pps - sps / cps * wc * pph
    dpwx = -sph / cps * pth - cph * pps - sps * sph / cps * pph
    dpwy = -cph / cps * pth + sph * pps - sps * cph / cps * pph
    return dpvx, dpvy, dpvz, dpth, dpps, dpph, dpwx, dpwy


def singular_limit_core(x, p, u1, u2, vp: VehicleParams, lam3: float) -> tuple:
    """Limit fields at cos(psi)=0: theta/phi (and their costates) freeze.

    The p_psi row carries sin(psi) (= +-1 on the singular set) so both yaw
    branches have the correct limit.  Velocity rows are unchanged.
    """
    vx, vy, vz, th, ps, ph, wx, wy = x
    pvx, pvy, pvz, pth, pps, pph, pwx, pwy = p
    a = vp.a
    gx, gy, gz = vp.g
    sth, cth = math.sin(th), math.cos(th)
    sps = math.sin(ps)
    sph, cph = math.sin(ph), math.cos(ph)
    dvx = gx
    dvy = -a * sps + gy
    dvz = gz
    if lam3 != 0.0 and (vp.c_x != 0.0 or vp.c_z != 0.0):
        ax, ay, az = _aero_accel(vx, vy, vz, vp.c_x, vp.c_z, lam3)
        dvx += ax
        dvy += ay
        dvz += az
        dpvx, dpvy, dpvz = _aero_adjoint(vx, vy, vz, pvx, pvy, pvz,
                                         vp.c_x, vp.c_z, lam3)
    else:
        dpvx = dpvy = dpvz = 0.0
    dx = (dvx, dvy, dvz,
          0.0, wx * cph - wy * sph, 0.0,
          -vp.b_bar * u2, vp.b_bar * u1)
    dp = (dpvx, dpvy, dpvz,
          0.0, a * sps * (sth * pvx + cth * pvz), 0.0,
          -pps * cph, pps * sph)
    return dx, dp


def extremal_core(y, vp: VehicleParams, hs: HomotopyState,
                  threshold: float = GIMBAL_THRESHOLD) -> tuple:
    """Coupled 16-dim extremal field with the closed-loop control.

    Switches to the singular-limit field when |cos(psi)| < threshold.
    Returns the 16 time-derivatives as a tuple.
    """
    x = y[:8]
    p = y[8:]
    u1, u2 = control_core(p[6], p[7], vp.b_bar, hs.gamma, hs.lam4)
    if abs(math.cos(x[4])) < threshold:
        dx, dp = singular_limit_core(x, p, u1, u2, vp, hs.lam3)
    else:
        dx = dynamics_core(x, u1, u2, vp, hs.lam3)
        dp = adjoint_core(x, p, u1, u2, vp, hs.lam3)
    return dx + dp


def hamiltonian_core(x, p, u1, u2, vp: VehicleParams, hs: HomotopyState,
                     threshold: float = GIMBAL_THRESHOLD) -> float:
    """<p, f(x,u)> + p0*(1 + gamma*(u1^2+u2^2)*(1-lam4)).

    Uses the same field branch (regular vs singular-limit) as the
    propagation so the value is well defined arbitrarily close to the yaw
    singular set.
    """
    if abs(math.cos(x[4])) < threshold:
        dx, _ = singular_limit_core(x, p, u1, u2, vp, hs.lam3)
    else:
        dx = dynamics_core(x, u1, u2, vp, hs.lam3)
    h = P0 * (1.0 + hs.gamma * (u1 * u1 + u2 * u2) * (1.0 - hs.lam4))
    for pi, di in zip(p, dx):
        h += pi * di
    return h


def _check_gimbal(psi: float, threshold: float):
    if abs(math.cos(psi)) < threshold:
        raise NearGimbalLockError(
            f"|cos(psi)| < {threshold:g} at psi={psi:.6f}; "
            "use singular_limit_field")


def dynamics(x: State, u: Control, vp: VehicleParams,
             lam3: float = 0.0) -> np.ndarray:
    """State derivative of the coupled attitude-trajectory system.

    Aerodynamic (drag/lift) terms are scaled by lam3.  Raises
    NearGimbalLockError within GIMBAL_THRESHOLD of cos(psi)=0.
    """
    _check_gimbal(x.psi, GIMBAL_THRESHOLD)
    return np.array(dynamics_core(x.as_array(), u.u1, u.u2, vp, lam3))


def adjoint_dynamics(x: State, p: Costate, u: Control, vp: VehicleParams,
                     lam3: float = 0.0) -> np.ndarray:
    """Costate derivative -dH/dx, aerodynamic terms included for lam3 > 0."""
    _check_gimbal(x.psi, GIMBAL_THRESHOLD)
    return np.array(adjoint_core(x.as_array(), p.as_array(), u.u1, u.u2,
                                 vp, lam3))


def singular_limit_field(x: State, p: Costate, u: Control,
                         vp: VehicleParams,
                         lam3: float = 0.0) -> tuple:
    """Limit vector fields on the yaw singular set (cos(psi) ~ 0)."""
    dx, dp = singular_limit_core(x.as_array(), p.as_array(), u.u1, u.u2,
                                 vp, lam3)
    return np.array(dx), np.array(dp)


def hamiltonian(x: State, p: Costate, u: Control, vp: VehicleParams,
                h: HomotopyState) -> float:
    """Homotopy-stage Hamiltonian; equals the minimum-time one at lam4=1."""
    return hamiltonian_core(x.as_array(), p.as_array(), u.u1, u.u2, vp, h)
