"""
Run-time settings.

Values are resolved in layers: command-line flags (applied by the CLI),
then ``EMDAPPROX_*`` environment variables or a ``.env`` file, then the
solver defaults YAML, then the built-in values below.
"""

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Process-wide settings."""

    # Accuracy
    eps: float = Field(default=0.25, description="Accuracy parameter in (0, 0.5)")
    phi_exp: float = Field(default=0.5, description="Sublinearity exponent in (0, 1)")

    # Randomness
    seed: int = Field(default=0, description="Root seed for every derived stream")

    # Solver selection
    mode: str = Field(default="practical", description="faithful or practical")
    oracle: str = Field(default="brute", description="Closest-pair oracle name")
    lambda_source: str = Field(default="auto", description="auto, explicit or sampler")

    # Files
    defaults_file: Optional[str] = Field(
        default=None,
        description="Solver defaults YAML (config/solver_defaults.yaml when unset)"
    )
    output_dir: str = Field(default="output", description="Directory for reports and logs")

    # Logging
    log_level: str = Field(default="INFO", description="Console log level")

    class Config:
        env_file = ".env"
        env_prefix = "EMDAPPROX_"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
