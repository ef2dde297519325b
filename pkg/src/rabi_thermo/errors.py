"""Exception and warning types raised by rabi_thermo."""


class RabiThermoError(Exception):
    """Base class for numerical failures in this package."""


class EigensolverFailure(RabiThermoError):
    pass


class DegenerateGap(RabiThermoError, ValueError):
    """Thermal occupation requested at a (near-)zero transition frequency."""


class DimensionTooLarge(RabiThermoError):
    pass


class NonUniqueSteadyState(RabiThermoError):
    pass


class SingularSolve(RabiThermoError):
    pass


class UndefinedTemperature(RabiThermoError):
    pass


class InsufficientSupport(RabiThermoError):
    pass


class TruncationInadequate(RabiThermoError):
    pass


class ConfigError(Exception):
    """Malformed or incomplete run configuration."""


class DegeneracyEncountered(UserWarning):
    """Coupled eigenstate pairs closer than the degeneracy threshold were skipped.

    The secular master equation is not valid at these points. ``pairs`` holds
    ``(m, n, omega_mn)`` tuples with 0-based level indices.
    """

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = tuple(pairs)
