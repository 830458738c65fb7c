import os
from typing import Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field

ENV_PREFIX = "BUCKET_TABLES_"


class SolverSettings(BaseModel):
    """Process-wide defaults; CLI flags and keyword arguments override single fields."""

    model_config = ConfigDict(frozen=True)

    budget_gib: float = Field(32.0, gt=0)
    chunk_rows: int = Field(2**20, ge=1)
    state_limit: int = Field(10**8, ge=1)
    max_retries: int = Field(1000, ge=1)
    latency: float = Field(0.0, ge=0)
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "SolverSettings":
        """Read ``BUCKET_TABLES_<FIELD>`` variables (e.g. ``BUCKET_TABLES_LOG_LEVEL``)."""
        environ = os.environ if environ is None else environ
        values = {}
        for name in cls.model_fields:
            key = ENV_PREFIX + name.upper()
            if key in environ:
                values[name] = environ[key]
        return cls(**values)


DEFAULTS = SolverSettings.from_env()
