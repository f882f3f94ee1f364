"""Pydantic models for run configuration and reports."""

from .run import (
    CommandEnum,
    LambdaSourceEnum,
    ModeEnum,
    MwuParamsModel,
    OracleEnum,
    RunConfig,
    RunReport,
    to_builtin,
)

__all__ = [
    "CommandEnum",
    "LambdaSourceEnum",
    "ModeEnum",
    "MwuParamsModel",
    "OracleEnum",
    "RunConfig",
    "RunReport",
    "to_builtin",
]
