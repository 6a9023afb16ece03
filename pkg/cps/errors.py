"""Exceptions raised by the model-set library."""


class ModelSetError(Exception):
    """Base class for all library errors."""
    pass


class OversizeError(ModelSetError):
    """Integer candidate box exceeds the configured candidate budget."""
    pass


class TooFewPoints(ModelSetError):
    """Patch has fewer points than the diagnostic needs."""
    pass


class MarginError(ModelSetError):
    """Outer window does not strictly contain the inner window."""
    pass


class RegionTooSmall(ModelSetError):
    """Averaging box is not covered by the comb region."""
    pass


class UnknownKind(ModelSetError):
    """Oracle or weight kind is not recognised."""
    pass


class SumMismatch(ModelSetError):
    """Candidate decomposition does not add up to the measure."""
    pass


class InnerTooLarge(ModelSetError):
    """Inner averaging radius exceeds half the autocorrelation radius."""
    pass


class CertificationFailure(ModelSetError):
    """A computed set failed its post-hoc certificate."""
    pass


class EmptySet(ModelSetError):
    """Operation needs a nonempty set."""
    pass


class ConfigError(ModelSetError):
    """Experiment configuration is invalid; the message names the field."""
    pass
