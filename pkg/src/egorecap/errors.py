"""Exception taxonomy shared across the engine."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine errors."""


class ConfigError(EngineError):
    """Raised when a pipeline configuration violates an invariant.

    Carries the full list of violations so callers can report them all at once.
    """

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class ValidationError(EngineError):
    """A domain value violates one of its invariants."""


class IngestError(EngineError):
    """Frame extraction or session assembly failed."""

    def __init__(self, message: str, diagnostics: str = ""):
        self.diagnostics = diagnostics
        super().__init__(message if not diagnostics else f"{message}\n{diagnostics}")


class ArchiveError(EngineError):
    """Embedding archive is malformed, truncated, or inconsistent with its header."""


class ProviderError(EngineError):
    """A provider call failed at the transport or model level.

    ``retryable`` distinguishes transient failures (timeouts, connection
    resets) from permanent ones (bad request, missing checkpoint).
    """

    def __init__(self, message: str, role: str = "", retryable: bool = False):
        self.role = role
        self.retryable = retryable
        super().__init__(message)


class ContractViolation(ProviderError):
    """A provider response broke its role contract (wrong dim, length, space)."""

    def __init__(self, message: str, role: str = ""):
        super().__init__(message, role=role, retryable=False)


class PipelineError(EngineError):
    """A pipeline cannot run; ``role`` names the missing provider or archive."""

    def __init__(self, message: str, role: str = ""):
        self.role = role
        super().__init__(message)
