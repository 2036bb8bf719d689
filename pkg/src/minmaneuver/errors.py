"""Exception types shared across the solver."""


class MinManeuverError(Exception):
    """Base class for all solver errors."""


class ZeroVelocityError(MinManeuverError):
    """Velocity angles requested for a zero velocity vector."""


class GimbalLockError(MinManeuverError):
    """An Euler-angle extraction landed on the yaw singular set."""


class NearGimbalLockError(MinManeuverError):
    """The regular attitude field was evaluated too close to cos(psi)=0.

    Callers should switch to the singular-limit vector field instead.
    """


class SingularControlError(MinManeuverError):
    """Both switching-function components vanish at lambda4=1.

    The maximization condition does not determine the control direction;
    this signals a singular junction.
    """


class NoSolutionError(MinManeuverError):
    """A scalar equation has no root in the admissible interval."""


class InfeasibleError(MinManeuverError):
    """The order-zero problem admits no valid closed-form solution."""


class DegenerateThrustError(MinManeuverError):
    """Thrust cannot dominate transverse gravity (a1 ~ 0 in order zero)."""


class NonFiniteError(MinManeuverError):
    """A propagated component overflowed or became NaN.

    ``tau`` records the normalized time at which the failure occurred.
    """

    def __init__(self, message: str, tau: float = float("nan")):
        super().__init__(message)
        self.tau = tau


class ParseError(MinManeuverError):
    """A configuration file is malformed; the message names the field."""
