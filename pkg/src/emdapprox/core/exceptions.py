"""
Error hierarchy.

Every error raised on purpose by the package derives from EmdApproxError and
carries the process exit code the CLI maps it to. Input problems also derive
from ValueError and run-time problems from RuntimeError, so callers that only
know the builtin types keep working.
"""

from typing import Any, Dict


class EmdApproxError(Exception):
    """Base class for all package errors."""

    exit_code: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class InputError(EmdApproxError, ValueError):
    """Malformed input: shape mismatch, bad parameter, unbalanced supply."""

    exit_code = 2


class DomainError(InputError):
    """Input outside the numeric domain an operation is defined on."""


class RunError(EmdApproxError, RuntimeError):
    """A randomized stage could not complete."""

    exit_code = 3


class SamplerStallError(RunError):
    """Rejection sampling exceeded its attempt budget."""

    def __init__(self, message: str, attempts: int = 0, budget: int = 0):
        super().__init__(message)
        self.attempts = attempts
        self.budget = budget

    def to_dict(self) -> Dict[str, Any]:
        out = super().to_dict()
        out.update(attempts=self.attempts, budget=self.budget)
        return out


class RetryExhaustedError(RunError):
    """A retried randomized step never produced an acceptable outcome."""


class SelfTestError(EmdApproxError):
    """Raised by the selftest command when a property check fails."""

    exit_code = 4
