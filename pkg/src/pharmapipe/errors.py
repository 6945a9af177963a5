"""Shared exception types for the pharmapipe package."""


class PharmaPipeError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(PharmaPipeError, ValueError):
    """Input data violates a documented precondition or invariant."""


class ConfigError(PharmaPipeError, ValueError):
    """Invalid configuration (bad enum value, incompatible options)."""


class TransportError(PharmaPipeError, RuntimeError):
    """A remote call failed after exhausting retries.

    Carries the number of attempts made.
    """

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempt(s))")
        self.attempts = attempts


class AuthError(PharmaPipeError, RuntimeError):
    """Remote endpoint rejected the credentials (HTTP 401)."""


class ProtocolError(PharmaPipeError, RuntimeError):
    """Remote endpoint returned a well-formed but contract-violating response."""


class BackendError(PharmaPipeError, RuntimeError):
    """A chat/embedding backend call failed mid-run."""
