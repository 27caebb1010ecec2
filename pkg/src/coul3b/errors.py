"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid run configuration: bad value, unknown key, or broken invariant."""


class SolverError(RuntimeError):
    """Eigensolver or propagator failed to meet its accuracy contract."""


class MissingTargetError(RuntimeError):
    """No collision state was designated, so a target-dependent command cannot run."""
