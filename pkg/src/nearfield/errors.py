"""Exception taxonomy; the CLI maps these onto exit codes 2, 3 and 4."""


class ConfigError(ValueError):
    """Malformed or missing scenario input."""


class PhysicsError(ValueError):
    """Input is well-formed but violates a physical precondition."""


class ConvergenceError(RuntimeError):
    """A fit or calibration failed to converge."""
