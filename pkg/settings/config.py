# settings/config.py
from __future__ import annotations

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # --- Output / Runtime ---
    output_dir: str = Field(default="reports", alias="MOE_OUTPUT_DIR", description="Default folder for report files")
    log_config_path: str = Field(default="logging.conf", description="Path of the logging.config file, relative to the repo root")
    debug: bool = Field(default=False, description="Debug mode lowers the root log level to DEBUG")

    # --- Worker pool ---
    workers: int = Field(default=1, ge=1, description="Worker threads shared by all pipelines")
    chunk_size: int = Field(default=4096, ge=1, description="Monte Carlo samples drawn per substream")

    # --- Minimum output entropy search ---
    moe_max_iter: int = Field(default=200, ge=1, description="Gradient iterations per restart")
    moe_grad_tol: float = Field(default=1e-8, gt=0, description="Riemannian gradient norm at which a restart stops")
    oracle_resolution: int = Field(default=24, ge=2, description="Grid points per projective coordinate for the brute-force oracle")

    # --- Nets ---
    max_net_points: int = Field(default=2_000_000, ge=1, description="Hard cap on the size of any constructed net")
    greedy_pool_size: int = Field(default=20_000, ge=100, description="Candidate sphere points for greedy net insertion")
    covering_samples: int = Field(default=10_000, ge=10_000, description="Monte Carlo samples used to certify a net")
    net_phase_quotient: bool = Field(default=True, description="Build certification nets modulo global phase")

    # --- Certification ---
    subspace_retry_cap: int = Field(default=100, ge=1, description="Random subspaces tried before giving up on the existence bound")
    max_product_dim: int = Field(default=64, ge=1, description="Largest input/output dimension allowed for product channels")
    ln_k_cap: float = Field(default=1e300, gt=0, description="Crossover search gives up (reports infinity) above this ln k")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=False,
        populate_by_name=True,
    )


# Instantiate settings to be imported in your application
settings = Settings()
