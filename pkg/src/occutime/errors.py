"""Exception hierarchy shared across the package."""


class OccutimeError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(OccutimeError):
    """Invalid configuration: bad arguments, unknown keys, unreadable files."""


class SimulationError(OccutimeError):
    """Path simulation failed, e.g. degenerate diffusion coefficient."""


class CapabilityError(OccutimeError):
    """A requested operation is not available for the given inputs."""
