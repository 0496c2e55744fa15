"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` ("module.slug") so the
CLI can emit structured error JSON without string-matching messages.
"""


class LevyChaosError(ValueError):
    code = "levychaos.error"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ModelError(LevyChaosError):
    code = "models.invalid"


class MomentError(LevyChaosError):
    code = "models.moments"


class OrderError(LevyChaosError):
    """Requested expansion/index order outside the configured cap."""

    code = "combinatorics.order"


class BasisError(LevyChaosError):
    code = "chaos.basis"


class DegenerateMeasureError(LevyChaosError):
    code = "ortho.degenerate"


class PathError(LevyChaosError):
    code = "paths.invalid"


class EvaluationError(LevyChaosError):
    code = "evaluate.invalid"


class FunctionalError(LevyChaosError):
    code = "taylor.invalid"


class ConfigError(LevyChaosError):
    code = "cli.config"
