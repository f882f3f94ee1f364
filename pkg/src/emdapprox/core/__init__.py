"""Configuration, logging and error types shared by every stage."""

from .exceptions import (
    EmdApproxError,
    InputError,
    DomainError,
    RunError,
    SamplerStallError,
    RetryExhaustedError,
    SelfTestError,
)
from .config import Settings, get_settings
from .defaults import SolverDefaultsManager
from .logging_utils import setup_logging, ProgressLogger

__all__ = [
    "EmdApproxError",
    "InputError",
    "DomainError",
    "RunError",
    "SamplerStallError",
    "RetryExhaustedError",
    "SelfTestError",
    "Settings",
    "get_settings",
    "SolverDefaultsManager",
    "setup_logging",
    "ProgressLogger",
]
