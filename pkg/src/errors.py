"""Exception types for the mode-splitter simulator."""


class SplitterError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SplitterError, ValueError):
    """Invalid or incomplete run configuration."""


class DivergenceError(SplitterError, RuntimeError):
    """Too many positive-P trajectories diverged for the ensemble to be trusted."""


class DegenerateVarianceError(SplitterError, ArithmeticError):
    """A conditioning variance is too small for the inferred-variance estimator."""
