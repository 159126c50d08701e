from functools import lru_cache
from typing import Literal

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # APP
    APP_NAME: str = "selftest-lab"
    ENVIRONMENT: Literal["local", "staging", "production"] = "local"
    LOG_LEVEL: str = "INFO"  # DEBUG, INFO, WARNING, ERROR, CRITICAL

    # SUITES
    SELFTEST_SEED: int = 1
    SUITE_TRIALS: int = 100
    SUITE_SLACK: float = 1e-9
    SUITE_WORKERS: int = 1

    # NUMERICS
    PERFECT_THRESHOLD: float = 1e-9  # omega >= 1 - threshold counts as perfect
    TRUNCATION_FACTOR: int = 4  # M^inf slots per largest dimension
    MAX_TOTAL_DIM: int = 4096

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


@lru_cache()
def get_settings() -> Settings:
    """Cached settings only loads once"""
    return Settings()
