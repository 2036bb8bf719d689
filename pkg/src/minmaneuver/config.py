"""Configuration ingestion: launcher presets, case files, and sweep grids.

Files are flat key-value text with sections (INI syntax).  Angles are given
in degrees in files and converted to radians at the boundary; unknown
sections or keys are rejected with the offending name.

The sweep presets reproduce the published factorial-experiment case counts
(108 / 234 / 480).  The per-variable grids are not published, only the
totals; the grids below were chosen to hit the totals exactly and are
documented in the README.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from .continuation import SolverOptions
from .errors import ParseError
from .frames import velocity_from_angles
from .model import DEFAULT_GRAVITY, VehicleParams
from .shooting import CaseSpec

PRESET_VEHICLES = {
    "ariane-launch": dict(a=18.0, b_bar=0.0138, c_x=0.0, c_z=0.0),
    "ariane-flight": dict(a=25.0, b_bar=0.0158, c_x=0.0, c_z=0.0),
    "pegasus": dict(a=24.873, b_bar=0.0607, c_x=5e-6, c_z=5e-6),
}


@dataclass
class LauncherConfig:
    name: str
    vehicle: VehicleParams
    solver: SolverOptions


@dataclass
class SweepSpec:
    """Factorial sweep: per-variable value lists (degrees / m/s) plus the
    restriction windows on theta_f - theta0 and theta_v0 - theta0."""

    name: str = "custom"
    v0: list = field(default_factory=lambda: [300.0])
    theta_v0: list = field(default_factory=lambda: [90.0])
    psi_v0: list = field(default_factory=lambda: [0.0])
    theta0: list = field(default_factory=lambda: [90.0])
    psi0: list = field(default_factory=lambda: [0.0])
    theta_f: list = field(default_factory=lambda: [60.0])
    psi_f: list = field(default_factory=lambda: [0.0])
    omega_x0: list = field(default_factory=lambda: [0.0])
    omega_y0: list = field(default_factory=lambda: [0.0])
    dtheta_f_bounds: tuple = None    # (lo, hi) on theta_f - theta0, degrees
    dtheta_v_bounds: tuple = None    # (lo, hi) on theta_v0 - theta0, degrees


def _grid(lo: float, hi: float, count: int) -> list:
    return [float(v) for v in np.linspace(lo, hi, count)]


PRESET_SWEEPS = {
    # 18 x 6 = 108 cases
    "ariane-launch": SweepSpec(
        name="ariane-launch",
        v0=_grid(50.0, 500.0, 18),
        theta_v0=[90.0], psi_v0=[0.0], theta0=[90.0], psi0=[0.0],
        theta_f=[60.0, 65.0, 70.0, 75.0, 80.0, 85.0],
        psi_f=[0.0], omega_x0=[0.0], omega_y0=[0.0]),
    # 6 x 39 admissible (theta0, theta_f) pairs = 234 cases
    "ariane-flight": SweepSpec(
        name="ariane-flight",
        v0=[2000.0, 2800.0, 3600.0, 4400.0, 5200.0, 6000.0],
        theta_v0=_grid(0.0, 60.0, 9),
        psi_v0=[0.0],
        theta0=_grid(0.0, 60.0, 9),
        psi0=[0.0],
        theta_f=_grid(0.0, 60.0, 9),
        psi_f=[0.0], omega_x0=[0.0], omega_y0=[0.0],
        dtheta_f_bounds=(-20.0, 20.0),
        dtheta_v_bounds=(0.0, 0.0)),
    # 6 admissible (theta_v0, theta0) pairs x 4 x 10 x 2 = 480 cases
    "pegasus": SweepSpec(
        name="pegasus",
        v0=[300.0],
        theta_v0=[-10.0, -5.0, 0.0],
        psi_v0=[0.0],
        theta0=_grid(0.0, 50.0, 11),
        psi0=[0.0],
        theta_f=[60.0, 70.0, 80.0, 90.0],
        psi_f=_grid(0.0, 90.0, 10),
        omega_x0=[-10.0, 10.0],
        omega_y0=[0.0],
        dtheta_v_bounds=(-10.0, 0.0)),
}


def case_from_degrees(v0: float, theta_v0: float, psi_v0: float,
                      theta0: float, psi0: float, phi0: float,
                      omega_x0: float, omega_y0: float,
                      theta_f: float, psi_f: float, phi_f: float = 0.0,
                      omega_xf: float = 0.0,
                      omega_yf: float = 0.0) -> CaseSpec:
    """CaseSpec from degree-valued terminal data (rates in deg/s)."""
    r = math.radians
    return CaseSpec(
        v0=velocity_from_angles(v0, r(theta_v0), r(psi_v0)),
        theta0=r(theta0), psi0=r(psi0), phi0=r(phi0),
        omega_x0=r(omega_x0), omega_y0=r(omega_y0),
        theta_f=r(theta_f), psi_f=r(psi_f), phi_f=r(phi_f),
        omega_xf=r(omega_xf), omega_yf=r(omega_yf))


def generate_cases(spec: SweepSpec) -> list:
    """All grid combinations passing the restriction windows, in a stable
    lexicographic order over the variable grids."""
    eps = 1e-9
    cases = []
    for v0 in spec.v0:
        for tv in spec.theta_v0:
            for pv in spec.psi_v0:
                for t0 in spec.theta0:
                    if spec.dtheta_v_bounds is not None:
                        lo, hi = spec.dtheta_v_bounds
                        if not lo - eps <= tv - t0 <= hi + eps:
                            continue
                    for p0 in spec.psi0:
                        for tf in spec.theta_f:
                            if spec.dtheta_f_bounds is not None:
                                lo, hi = spec.dtheta_f_bounds
                                if not lo - eps <= tf - t0 <= hi + eps:
                                    continue
                            for pf in spec.psi_f:
                                for wx in spec.omega_x0:
                                    for wy in spec.omega_y0:
                                        cases.append(case_from_degrees(
                                            v0, tv, pv, t0, p0, 0.0, wx, wy,
                                            tf, pf))
    return cases


_LAUNCHER_KEYS = {"preset", "name", "a", "b_bar", "c_x", "c_z",
                  "g_x", "g_y", "g_z"}
_SOLVER_KEYS = {"gamma", "n_steps", "tol", "max_eval", "initial_step",
                "min_step", "max_step", "stop_lambda4", "phi_star_deg",
                "sing_threshold", "carry_jacobian", "delta_alpha_deg",
                "max_frame_attempts", "frame_first_axis", "min_seed_t_f"}
_CASE_KEYS = {"v0", "theta_v0", "psi_v0", "theta0", "psi0", "phi0",
              "omega_x0", "omega_y0", "theta_f", "psi_f", "phi_f",
              "omega_xf", "omega_yf"}
_SWEEP_KEYS = {"preset"} | {f"{v}_values" for v in
                            ("v0", "theta_v0", "psi_v0", "theta0", "psi0",
                             "theta_f", "psi_f", "omega_x0", "omega_y0")} | {
    "dtheta_f_min", "dtheta_f_max", "dtheta_v_min", "dtheta_v_max", "name"}


def _get_float(section, key, default=None):
    raw = section.get(key)
    if raw is None:
        if default is None:
            raise ParseError(f"missing required field [{section.name}] {key}")
        return default
    try:
        return float(raw)
    except ValueError:
        raise ParseError(
            f"field [{section.name}] {key} = {raw!r} is not a number") from None


def _get_float_list(section, key):
    raw = section.get(key)
    try:
        return [float(tok) for tok in raw.replace(",", " ").split()]
    except ValueError:
        raise ParseError(
            f"field [{section.name}] {key} = {raw!r} is not a number list"
        ) from None


def _check_keys(section, allowed):
    for key in section:
        if key not in allowed:
            raise ParseError(f"unknown field [{section.name}] {key}")


def _parse_launcher(section) -> tuple:
    _check_keys(section, _LAUNCHER_KEYS)
    preset = section.get("preset")
    if preset is not None:
        if preset not in PRESET_VEHICLES:
            raise ParseError(
                f"unknown launcher preset {preset!r}; choose from "
                f"{sorted(PRESET_VEHICLES)}")
        base = dict(PRESET_VEHICLES[preset])
        name = section.get("name", preset)
    else:
        base = dict(a=None, b_bar=None, c_x=0.0, c_z=0.0)
        name = section.get("name", "custom")
    a = _get_float(section, "a", base["a"])
    b_bar = _get_float(section, "b_bar", base["b_bar"])
    if a is None or b_bar is None:
        raise ParseError("[launcher] needs a preset or explicit a and b_bar")
    g = (_get_float(section, "g_x", DEFAULT_GRAVITY[0]),
         _get_float(section, "g_y", DEFAULT_GRAVITY[1]),
         _get_float(section, "g_z", DEFAULT_GRAVITY[2]))
    vp = VehicleParams(a=a, b_bar=b_bar,
                       c_x=_get_float(section, "c_x", base["c_x"]),
                       c_z=_get_float(section, "c_z", base["c_z"]),
                       g=g)
    return name, vp


def _parse_solver(section) -> SolverOptions:
    _check_keys(section, _SOLVER_KEYS)
    opts = SolverOptions()
    for key in section:
        if key == "n_steps":
            opts.n_steps = int(_get_float(section, key))
        elif key == "max_eval":
            opts.max_eval = int(_get_float(section, key))
        elif key == "max_frame_attempts":
            opts.max_frame_attempts = int(_get_float(section, key))
        elif key == "phi_star_deg":
            opts.phi_star = math.radians(_get_float(section, key))
        elif key == "delta_alpha_deg":
            opts.delta_alpha = math.radians(_get_float(section, key))
        elif key == "frame_first_axis":
            axis = section.get(key)
            if axis not in ("y", "z"):
                raise ParseError(
                    f"field [solver] frame_first_axis must be y or z, "
                    f"got {axis!r}")
            opts.frame_first_axis = axis
        elif key == "carry_jacobian":
            raw = section.get(key).strip().lower()
            if raw not in ("true", "false", "1", "0", "yes", "no"):
                raise ParseError(f"field [solver] carry_jacobian = {raw!r} "
                                 "is not a boolean")
            opts.carry_jacobian = raw in ("true", "1", "yes")
        else:
            setattr(opts, key, _get_float(section, key))
    return opts


def _parse_case(section) -> CaseSpec:
    _check_keys(section, _CASE_KEYS)
    values = {}
    for key in _CASE_KEYS:
        default = None if key in ("v0", "theta_v0", "theta0", "theta_f") \
            else 0.0
        values[key] = _get_float(section, key, default)
    return case_from_degrees(**values)


def _parse_sweep(section) -> SweepSpec:
    _check_keys(section, _SWEEP_KEYS)
    preset = section.get("preset")
    if preset is not None:
        if preset not in PRESET_SWEEPS:
            raise ParseError(
                f"unknown sweep preset {preset!r}; choose from "
                f"{sorted(PRESET_SWEEPS)}")
        base = PRESET_SWEEPS[preset]
        spec = dataclasses.replace(
            base, **{f.name: (list(getattr(base, f.name))
                              if isinstance(getattr(base, f.name), list)
                              else getattr(base, f.name))
                     for f in dc_fields(SweepSpec)})
    else:
        spec = SweepSpec(name=section.get("name", "custom"))
    for f in dc_fields(SweepSpec):
        key = f"{f.name}_values"
        if key in section:
            setattr(spec, f.name, _get_float_list(section, key))
    if "dtheta_f_min" in section or "dtheta_f_max" in section:
        spec.dtheta_f_bounds = (_get_float(section, "dtheta_f_min", -360.0),
                                _get_float(section, "dtheta_f_max", 360.0))
    if "dtheta_v_min" in section or "dtheta_v_max" in section:
        spec.dtheta_v_bounds = (_get_float(section, "dtheta_v_min", -360.0),
                                _get_float(section, "dtheta_v_max", 360.0))
    return spec


def parse_config(path: str) -> tuple:
    """Parse a configuration file.

    Returns (LauncherConfig | None, CaseSpec | SweepSpec | None) depending on
    which sections the file holds.  Raises ParseError with the offending
    section/field name on any malformed or unknown entry.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ParseError(f"cannot read config file {path}")
    known = {"launcher", "solver", "case", "sweep"}
    for sec in parser.sections():
        if sec not in known:
            raise ParseError(f"unknown section [{sec}]")

    launcher = None
    if parser.has_section("launcher"):
        name, vp = _parse_launcher(parser["launcher"])
        solver = (_parse_solver(parser["solver"])
                  if parser.has_section("solver") else SolverOptions())
        launcher = LauncherConfig(name, vp, solver)
    elif parser.has_section("solver"):
        raise ParseError("[solver] section requires a [launcher] section")

    payload = None
    if parser.has_section("case") and parser.has_section("sweep"):
        raise ParseError("a file may hold either [case] or [sweep], not both")
    if parser.has_section("case"):
        payload = _parse_case(parser["case"])
    elif parser.has_section("sweep"):
        payload = _parse_sweep(parser["sweep"])
    return launcher, payload
