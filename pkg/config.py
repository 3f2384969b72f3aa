from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Centralized configuration for the fjobf toolchain using Pydantic Settings.

    Loads settings from environment variables and an optional .env file. Command-line
    flags override whatever is set here.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        extra="ignore",  # Ignore extra environment variables not defined in the model
        case_sensitive=False,
    )

    # --- Interpreters ---
    # Block evaluations (source engine) or statement executions (target engine) before
    # a run is cut off with a resource-limit outcome.
    step_budget: int = Field(1_000_000, validation_alias="FJOBF_STEP_BUDGET", gt=0)
    # CPS code nests one host frame per continuation call; the interpreters raise the
    # interpreter recursion ceiling to this while they run.
    recursion_limit: int = Field(200_000, validation_alias="FJOBF_RECURSION_LIMIT", ge=1_000)

    # --- Obfuscator ---
    flatten: bool = Field(True, validation_alias="FJOBF_FLATTEN")

    # --- Analysis ---
    default_k: int = Field(0, validation_alias="FJOBF_DEFAULT_K", ge=0)
    iso_budget: int = Field(100_000, validation_alias="FJOBF_ISO_BUDGET", gt=0)

    # --- Logging ---
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field("INFO", validation_alias="FJOBF_LOG_LEVEL")
    log_json: bool = Field(True, validation_alias="FJOBF_LOG_JSON")

    @field_validator('log_level', mode='before')
    @classmethod
    def upper_log_level(cls, v):
        if isinstance(v, str):
            return v.upper()
        return v


settings = Settings()
