"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class SingularManifoldError(DomainError):
    """A reconstructed manifold matrix is (numerically) rank deficient."""


class InsufficientPeaksError(RuntimeError):
    """A pseudo-spectrum has fewer local minima than the requested count.

    Raised by peak search; the harness treats it as a resolution failure.
    ``stage`` names the estimator stage when raised inside a pipeline.
    """

    def __init__(self, found, requested, stage=None):
        self.found = found
        self.requested = requested
        self.stage = stage
        where = f" in stage '{stage}'" if stage else ""
        super().__init__(f"found {found} local minima{where}, need {requested}")


class ConfigError(ValueError):
    """Malformed scenario or sweep configuration."""
