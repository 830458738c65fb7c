import pydantic
import pytest

from bucket_tables.inference import DEFAULT_BUDGET_GIB
from bucket_tables.settings import DEFAULTS, SolverSettings


def test_defaults():
    assert DEFAULTS.budget_gib == DEFAULT_BUDGET_GIB
    assert DEFAULTS.chunk_rows == 2**20
    assert DEFAULTS.log_level == "WARNING"


def test_from_env():
    settings = SolverSettings.from_env({"BUCKET_TABLES_BUDGET_GIB": "2", "BUCKET_TABLES_LOG_LEVEL": "debug", "OTHER": "1"})
    assert settings.budget_gib == 2.0
    assert settings.log_level == "debug"
    assert settings.state_limit == DEFAULTS.state_limit


def test_invalid_env():
    with pytest.raises(pydantic.ValidationError):
        SolverSettings.from_env({"BUCKET_TABLES_CHUNK_ROWS": "0"})
