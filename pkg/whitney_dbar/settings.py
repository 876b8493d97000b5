from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class WhitneySettings(BaseSettings):
    """
    Budgets and numeric tolerances.

    Every field can be overridden from the environment with the
    ``WHITNEY_DBAR_`` prefix, e.g. ``WHITNEY_DBAR_POINT_BUDGET=200000``.
    """

    model_config = SettingsConfigDict(
        env_prefix="WHITNEY_DBAR_",
        env_file=".env",
        extra="ignore",
    )

    point_budget: int = Field(default=1_000_000, gt=0)
    pair_budget: int = Field(default=500_000_000, gt=0)
    node_budget: int = Field(default=1024 * 1024, gt=0)
    kernel_cap: int = Field(default=20_000, gt=1)
    rank_rtol: float = Field(default=1e-9, gt=0)
    threads: int | None = Field(default=None, gt=0)


@lru_cache
def get_settings() -> WhitneySettings:
    return WhitneySettings()
