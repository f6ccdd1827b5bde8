"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keep the taxonomy small:
configuration problems, generic numeric failures, calibration failures
(empty feasible sets, missing certificates), and integrability failures
(divergent tail integrals, weights outside L^2).
"""


class ConfigError(ValueError):
    """Malformed or out-of-range experiment configuration."""


class NumericError(RuntimeError):
    """A numerical routine failed to converge or left its validity range."""


class CalibrationError(RuntimeError):
    """Empirical calibration found no feasible certificate or envelope."""


class IntegrabilityError(RuntimeError):
    """A required tail integral diverges (1/phi at infinity, or V outside L^2)."""
