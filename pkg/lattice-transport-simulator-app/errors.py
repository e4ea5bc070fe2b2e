# errors.py - Exception hierarchy with CLI exit-code categories


class LatticeTransportError(Exception):
    """Base class for every error raised by the simulator"""
    exit_code = 1


class ConfigError(LatticeTransportError, ValueError):
    exit_code = 2


class PhysicsError(LatticeTransportError, ValueError):
    exit_code = 3


class NumericalError(LatticeTransportError, RuntimeError):
    exit_code = 4


# Configuration
class UnknownConfigKey(ConfigError):
    pass


class InvalidConfigValue(ConfigError):
    pass


# Physics / bad inputs
class UnstableAxis(PhysicsError):
    """No confining minimum along an axis (non-positive squared frequency)"""


class NonCommensurateGrid(PhysicsError):
    """Window is not an integer number of lattice periods"""


class InvalidDuration(PhysicsError):
    pass


class AxisMismatch(PhysicsError):
    pass


class OutOfWindow(PhysicsError):
    pass


class GridMismatch(PhysicsError):
    pass


class ShapeMismatch(PhysicsError):
    pass


# Numerical failures
class NoConvergence(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class DegenerateSeed(NumericalError):
    pass


class NoBracket(NumericalError):
    pass
