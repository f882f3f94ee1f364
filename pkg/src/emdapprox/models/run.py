"""
Pydantic models for command configuration and JSON reports.

Reports are serialised with sorted keys so the same configuration and seed
give byte-identical output once timings are left out.
"""

import json
import math
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, validator

from .. import REPORT_SCHEMA_VERSION


class ModeEnum(str, Enum):
    """Solver schedule."""
    FAITHFUL = "faithful"
    PRACTICAL = "practical"


class OracleEnum(str, Enum):
    """Closest-pair oracle."""
    BRUTE = "brute"
    GRID = "grid"


class LambdaSourceEnum(str, Enum):
    """How each MWU round sees lambda."""
    AUTO = "auto"
    EXPLICIT = "explicit"
    SAMPLER = "sampler"


class CommandEnum(str, Enum):
    """CLI commands."""
    EXACT = "exact"
    TREE = "tree"
    APPROX = "approx"
    CLOSEPAIRS = "closepairs"
    SAMPLE = "sample"
    BENCH = "bench"
    SELFTEST = "selftest"


class RunConfig(BaseModel):
    """Resolved configuration of one CLI invocation."""

    command: CommandEnum = Field(description="Command to run")
    eps: float = Field(default=0.25, description="Accuracy parameter in (0, 0.5)")
    phi_exp: float = Field(default=0.5, description="Sublinearity exponent in (0, 1)")
    seed: int = Field(default=0, ge=0, description="Root seed")
    mode: ModeEnum = Field(default=ModeEnum.PRACTICAL, description="Solver schedule")
    oracle: OracleEnum = Field(default=OracleEnum.BRUTE, description="Closest-pair oracle")
    lambda_source: LambdaSourceEnum = Field(default=LambdaSourceEnum.AUTO, description="Lambda source")

    x: Optional[str] = Field(default=None, description="Point file for X")
    y: Optional[str] = Field(default=None, description="Point file for Y")
    b: Optional[str] = Field(default=None, description="Supply file for a single point set")
    out: Optional[str] = Field(default=None, description="Report path (stdout when unset)")

    trials: int = Field(default=5, gt=0, le=10000, description="Seeds per benchmark size")
    relax: Optional[float] = Field(default=None, gt=0, description="Practical relaxation factor")
    sizes: List[int] = Field(default=[16, 32], description="Benchmark sizes")
    dim: int = Field(default=4, gt=0, description="Dimension of generated instances")
    samples: int = Field(default=10000, gt=0, description="Draws for the sample command")
    config_file: Optional[str] = Field(default=None, description="Solver defaults YAML")
    verbose: bool = Field(default=False, description="DEBUG console logging")
    timings: bool = Field(default=True, description="Include wall-clock timings in the report")

    @validator('eps')
    def validate_eps(cls, v):
        """eps must lie in (0, 0.5)."""
        if not (0 < v < 0.5):
            raise ValueError(f"eps must be in (0, 0.5), got {v}")
        return v

    @validator('phi_exp')
    def validate_phi_exp(cls, v):
        """phi_exp must lie in (0, 1)."""
        if not (0 < v < 1):
            raise ValueError(f"phi_exp must be in (0, 1), got {v}")
        return v

    @validator('sizes')
    def validate_sizes(cls, v):
        if not v or any(size < 2 for size in v):
            raise ValueError(f"Benchmark sizes must be at least 2, got {v}")
        return v


class MwuParamsModel(BaseModel):
    """Serialisable MWU schedule."""

    mode: ModeEnum
    n: int
    phi: float
    eps: float
    h: int
    d_l: float
    d_u: float
    d_t: float
    gamma_gap: float
    K: float
    eta: float
    R: int
    chi: float
    delta: float
    s: int
    deviations: List[str] = Field(default=[])


class RunReport(BaseModel):
    """JSON report of one command."""

    schema_version: int = Field(default=REPORT_SCHEMA_VERSION, alias="schema")
    command: CommandEnum
    config: Dict[str, Any] = Field(default={})
    result: Dict[str, Any] = Field(default={})
    diagnostics: List[Dict[str, Any]] = Field(default=[])
    timings: Dict[str, float] = Field(default={})

    model_config = {"populate_by_name": True}

    def to_json(self) -> str:
        payload = to_builtin(self.model_dump(by_alias=True))
        if not payload["timings"]:
            payload.pop("timings")
        return json.dumps(payload, sort_keys=True, indent=2)


def to_builtin(value: Any) -> Any:
    """Plain JSON types for nested results; NaN and infinities become None."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value
