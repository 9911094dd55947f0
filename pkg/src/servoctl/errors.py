"""Exception hierarchy.

Every error carries the exit code the command line uses for it:
2 for configuration problems, 3 for design failures and 4 for numerical
failures.
"""


class ServoctlError(Exception):
    exit_code = 4

    @property
    def category(self) -> str:
        return type(self).__name__


class ConfigError(ServoctlError, ValueError):
    exit_code = 2


# numerical failures
class InvalidPolynomial(ServoctlError):
    pass


class DimensionMismatch(ServoctlError):
    pass


class SingularMatrix(ServoctlError):
    pass


class PoleAtOrigin(ServoctlError):
    pass


class NoCriticalGain(ServoctlError):
    pass


class NumericalDivergence(ServoctlError):
    pass


class NonSettled(ServoctlError):
    pass


# design failures
class ImproperSystem(ServoctlError):
    exit_code = 3


class Uncontrollable(ServoctlError):
    exit_code = 3


class InvalidPoleSet(ServoctlError):
    exit_code = 3


class UnstableDesign(ServoctlError):
    exit_code = 3

    def __init__(self, message: str, poles=()):
        super().__init__(message)
        self.poles = list(poles)
