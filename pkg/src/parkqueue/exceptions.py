"""Exception types shared across the package."""


class ParameterDomainError(ValueError):
    """A model parameter is outside its admissible domain."""


class InfeasibleTargetError(ValueError):
    """A requested target (e.g. an occupancy level) cannot be induced."""


class ConfigurationError(ValueError):
    """A scenario configuration file is malformed or inconsistent."""
