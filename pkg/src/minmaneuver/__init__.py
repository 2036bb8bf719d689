"""Minimum-time launcher attitude-trajectory maneuvers by indirect shooting
on the extremal equations, seeded by a closed-form order-zero solution and
driven by a four-parameter continuation with chattering-aware sub-optimal
stopping."""

from .continuation import (RunOutcome, RunStatus, SolverOptions, solve_case,
                           solve_with_frame_search)
from .frames import (EulerAngles, FrameChange, VelocityAngles,
                     apply_frame_change, axis_rotation, body_axis,
                     choose_beta, velocity_to_angles)
from .integrator import ExtremalPoint, Trajectory, propagate, terminal_point
from .model import (Control, Costate, HomotopyState, State, VehicleParams,
                    adjoint_dynamics, control_law, dynamics, hamiltonian,
                    singular_limit_field, switching_function)
from .ocp0 import (Ocp0Problem, Ocp0Solution, embed_in_mtcp, extract_euler,
                   solve_ocp0)
from .shooting import (CaseSpec, NaturalEndpoint, ShootingPoint,
                       blend_initial_state, record_natural_endpoint,
                       residual_s1, residual_s2)

__version__ = "0.1.0"

__all__ = [
    "CaseSpec", "Control", "Costate", "EulerAngles", "ExtremalPoint",
    "FrameChange", "HomotopyState", "NaturalEndpoint", "Ocp0Problem",
    "Ocp0Solution", "RunOutcome", "RunStatus", "ShootingPoint",
    "SolverOptions", "State", "Trajectory", "VehicleParams", "VelocityAngles",
    "adjoint_dynamics", "apply_frame_change", "axis_rotation",
    "blend_initial_state", "body_axis", "choose_beta", "control_law",
    "dynamics", "embed_in_mtcp", "extract_euler", "hamiltonian",
    "propagate", "record_natural_endpoint", "residual_s1", "residual_s2",
    "singular_limit_field", "solve_case", "solve_ocp0",
    "solve_with_frame_search", "switching_function", "terminal_point",
    "velocity_to_angles",
]
