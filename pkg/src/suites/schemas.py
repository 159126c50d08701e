"""Pydantic models for seeded property suites and their summaries."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.config import get_settings


class SuiteConfig(BaseModel):
    """What to run and how.

    Attributes
    ----------
    seed : int
        Suite seed; trial t of suite i draws from SeedSequence(seed, (i, t))
    trials : int
        Trials per suite
    dims : tuple[int, int]
        Inclusive range of the small dimension drawn per trial
    slack : float
        Absolute tolerance added to every bound
    suites : tuple[str, ...]
        Suite selector; empty runs every registered suite
    workers : int
        Thread fan-out for the trials of one suite
    """

    seed: int
    trials: int
    dims: tuple[int, int] = (2, 4)
    slack: float
    suites: tuple[str, ...] = ()
    workers: int = 1

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_settings(cls, **overrides) -> "SuiteConfig":
        """Defaults from Settings, with explicit non-None overrides on top."""
        settings = get_settings()
        fields = {
            "seed": settings.SELFTEST_SEED,
            "trials": settings.SUITE_TRIALS,
            "slack": settings.SUITE_SLACK,
            "workers": settings.SUITE_WORKERS,
        }
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**fields)

    @field_validator("seed")
    @classmethod
    def _seed(cls, v: int) -> int:
        if not 0 <= v < 2**64:
            raise ValueError(f"Seed must fit in 64 bits, got {v}")
        return v

    @model_validator(mode="after")
    def _validate(self) -> "SuiteConfig":
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if not self.slack > 0:
            raise ValueError(f"slack must be positive, got {self.slack}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")
        low, high = self.dims
        if not 1 <= low <= high:
            raise ValueError(f"dims must be an increasing positive range, got {self.dims}")
        return self


class Check(BaseModel):
    """Outcome of one trial: the measured value against its bound."""

    holds: bool
    value: float | None = None
    bound: float | None = None
    detail: str | None = None


class TrialOutcome(BaseModel):
    """A trial that failed, with everything needed to replay it."""

    suite: str
    trial: int
    seed: int
    spawn_key: tuple[int, int]
    value: float | None = None
    bound: float | None = None
    detail: str | None = None


class SuiteResult(BaseModel):
    """Counts for one suite.

    Attributes
    ----------
    min_pass_rate : float
        1.0 for hard invariants; the rounding suite tolerates one percent
    status : str
        "pass", "fail" or "info" for suites that never fail
    """

    name: str
    trials: int
    passed: int
    failed: int
    pass_rate: float
    min_pass_rate: float
    status: Literal["pass", "fail", "info"]
    violations: list[TrialOutcome]


class SuiteSummary(BaseModel):
    seed: int
    trials: int
    slack: float
    passed: bool
    suites: list[SuiteResult]
