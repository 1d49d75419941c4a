"""
Global Configuration

All tolerances and numerical knobs live here. Precedence, lowest first:
built-in defaults, RATLIMITS_* environment variables, a JSON file passed as
``--config``, explicit command-line flags.
"""
from __future__ import annotations

import json
import os
from functools import lru_cache
from pathlib import Path
from typing import Any

from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from ratlimits.errors import SchemaError


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="RATLIMITS_", extra="forbid", frozen=True)

    # --- sphere / Möbius ---
    tau_pt: float = Field(1e-9, gt=0)
    tau_moeb: float = Field(1e-9, gt=0)
    tau_sep: float = Field(1e-3, gt=0)
    tau_rot: float = Field(1e-8, gt=0)

    # --- rational maps ---
    tau_res: float = Field(1e-10, gt=0)
    tau_cluster: float = Field(1e-6, gt=0)
    tau_gcd: float = Field(1e-8, gt=0)
    tau_root_merge: float = Field(1e-4, gt=0)   # second-chance clustering radius
    exact_bit_cap: int = Field(20000, ge=64)
    aberth_max_iter: int = Field(100, ge=1)
    aberth_tol: float = Field(1e-15, gt=0)
    root_backward_tol: float = Field(1e-6, gt=0)

    # --- measures ---
    harmonic_cutoff: int = Field(8, ge=1)
    resample_cap: int = Field(10_000, ge=1)

    # --- maximal entropy sampler ---
    burn_in: int = Field(10, ge=0)
    chain_block: int = Field(1024, ge=1)

    # --- barycenter ---
    tau_bc: float = Field(1e-9, gt=0)
    tau_atom: float = Field(1e-9, ge=0)
    barycenter_damping: float = Field(0.5, gt=0, le=1)
    barycenter_max_iter: int = Field(500, ge=1)
    so3_restarts: int = Field(20, ge=1)

    # --- rescaling ---
    tau_proj: float = Field(1e-7, gt=0)
    tau_cauchy: float = Field(1e-3, gt=0)
    tau_vanish: float = Field(1e-6, gt=0)
    max_triple_redraws: int = Field(8, ge=0)
    scheme_min_bits: int = Field(256, ge=53)
    scheme_max_bits: int = Field(1 << 17, ge=53)
    direct_reduce_max_degree: int = Field(4, ge=1)
    direct_check_max_degree: int = Field(16, ge=1)

    # --- sphere trees ---
    tau_glue: float = Field(1e-4, gt=0)
    hausdorff_grid: int = Field(400, ge=8)

    # --- polynomial-like ---
    tau_ann: float = Field(1e-3, gt=0)
    boundary_samples: int = Field(256, ge=16)
    seed_disk_radius: float = Field(0.05, gt=0, lt=1)
    max_disk_halvings: int = Field(8, ge=0)

    # --- execution ---
    threads: int = Field(0, ge=0)           # 0 = machine parallelism
    seed: int = 20240917

    # --- per-run artifact folder ---
    run_log_enabled: bool = False
    run_log_dir: str = "./runs"

    def resolved_threads(self) -> int:
        return self.threads or (os.cpu_count() or 1)


_active: Settings | None = None


@lru_cache(maxsize=1)
def _from_environment() -> Settings:
    return Settings()


def get_settings() -> Settings:
    return _active if _active is not None else _from_environment()


def load_settings(config_path: str | Path | None = None, **overrides: Any) -> Settings:
    """Build settings from environment, an optional JSON file and explicit overrides."""
    values: dict[str, Any] = {}
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise SchemaError(f"cannot read config {config_path}: {e}") from e
        if not isinstance(loaded, dict):
            raise SchemaError("config file must hold a JSON object")
        values.update(loaded)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Settings(**values)
    except ValidationError as e:
        raise SchemaError("invalid configuration", errors=e.errors(include_url=False)) from e


def configure(settings: Settings | None) -> None:
    """Install process-wide settings (None restores the environment defaults)."""
    global _active
    _active = settings
    _from_environment.cache_clear()
