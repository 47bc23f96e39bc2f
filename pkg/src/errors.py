class LabError(Exception):
    """Base class for every error raised by the lab."""


class InvalidSpecError(LabError, ValueError):
    """A model object (motion, offspring law, scale, test function) is invalid."""


class PopulationExplosionError(LabError):
    """The live population exceeded the configured cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"Population of {count} exceeds the cap of {cap} individuals")


class BracketError(LabError):
    """A root search could not establish a valid bracket."""


class ConvergenceError(LabError):
    """A quadrature, rejection loop or trend check did not converge."""


class InsufficientSamplesError(LabError, ValueError):
    """Too few samples for the requested statistic."""


class ConfigError(LabError):
    """The experiment configuration is invalid."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"Invalid config field '{field}': {message}")


class PipelineError(LabError, RuntimeError):
    """A pipeline failed for a reason other than a statistical verdict."""
