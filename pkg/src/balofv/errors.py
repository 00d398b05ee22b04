"""Exception types shared across the solver."""


class ConfigError(ValueError):
    """Invalid configuration: bad key, bad type, or violated parameter constraint."""


class DomainError(ValueError):
    """An operation received arguments outside its admissible domain."""


class SolverError(RuntimeError):
    """The time integration failed (non-finite values or degenerate time step)."""
