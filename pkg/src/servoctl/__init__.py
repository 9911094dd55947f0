"""Design, simulate and compare position controllers for a DC servo motor."""

from servoctl.errors import ServoctlError
from servoctl.lti import MotorParams, StateSpace, TransferFunction, motor_to_ss, motor_to_tf
from servoctl.numerics import Polynomial

__all__ = [
    "MotorParams",
    "Polynomial",
    "ServoctlError",
    "StateSpace",
    "TransferFunction",
    "motor_to_ss",
    "motor_to_tf",
]

__version__ = "0.1.0"
