"""Application configuration: defaults < config file (TOML) < environment.

Environment variables use the ``REFSYNTH_`` prefix with upper-cased field
names, e.g. ``REFSYNTH_ADMIN_TOKEN`` or ``REFSYNTH_POOL_FACTOR``.
"""

from __future__ import annotations

import os

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, fields
from pathlib import Path

ENV_PREFIX = "REFSYNTH_"


@dataclass
class AppConfig:
    # corpus
    store_path: str = "corpus.cgst"
    hash_index_path: str = "corpus.cghx"
    dim: int = 768
    # backends; hermetic=true swaps in the deterministic mock backends
    hermetic: bool = False
    embed_endpoint: str = ""
    embed_model: str = "all-mpnet-base-v2"
    llm_endpoint: str = ""
    llm_model: str = "gpt-4o"
    llm_max_context_tokens: int = 120_000
    # pipeline knobs
    pool_factor: int = 5
    shortlist_cap: int = 12
    fetch_cache_dir: str = "cache"
    fetch_delay_seconds: float = 3.0
    # service
    worker_slots: int = 2
    job_dir: str = "jobs"
    job_ttl_days: int = 7
    admin_token: str = ""
    max_upload_bytes: int = 30 * 1024 * 1024
    max_queue: int = 100


def _coerce(value: str, target_type: type):
    if target_type is bool:
        return value.lower() in ("1", "true", "yes", "on")
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return value


def load_config(path: str | Path | None = None, env: dict | None = None) -> AppConfig:
    """Build an AppConfig with documented precedence env > file > defaults."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None and Path(path).exists():
        with open(path, "rb") as fh:
            file_values = tomllib.load(fh)
        for f in fields(AppConfig):
            if f.name in file_values:
                values[f.name] = file_values[f.name]
    for f in fields(AppConfig):
        key = ENV_PREFIX + f.name.upper()
        if key in env:
            values[f.name] = _coerce(env[key], f.type if isinstance(f.type, type) else type(getattr(AppConfig, f.name)))
    return AppConfig(**values)
