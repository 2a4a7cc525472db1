"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid tuning, sampler or experiment configuration."""


class InsufficientBlocksError(ConfigError):
    """The block schedule leaves too few local means for any contrast sum."""


class ModelEvaluationError(ArithmeticError):
    """A model callable produced non-finite output."""

    def __init__(self, message, x=None, theta=None):
        super().__init__(message)
        self.x = x
        self.theta = theta


class NonPDError(ArithmeticError):
    """An effective diffusion matrix failed its Cholesky factorization."""

    def __init__(self, message, block=None, theta=None):
        super().__init__(message)
        self.block = block
        self.theta = theta


class DegeneratePosteriorError(RuntimeError):
    """The log-target was -inf at every proposal for too long."""


class SimulationExplosionError(RuntimeError):
    """An Euler-Maruyama path left the representable range."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage label and partial output."""

    def __init__(self, stage, cause, partial=None):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial = partial
