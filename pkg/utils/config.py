# utils/config.py

import os
import yaml
from functools import lru_cache

try:
    from dotenv import load_dotenv  # optional
    load_dotenv()
except Exception:
    pass

ENV_OUTPUT_DIR = "ASCENT_OUTPUT_DIR"
ENV_SEED = "ASCENT_SEED"
ENV_THREADS = "ASCENT_THREADS"


def default_config_path() -> str:
    base_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    return os.path.join(base_dir, "configs", "config.yaml")


def _load_config_dict() -> dict:
    config_path = default_config_path()
    if os.path.isfile(config_path):
        with open(config_path, "r") as f:
            return yaml.safe_load(f) or {}
    return {}


def _int_env(name: str):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}")


def env_overrides() -> dict:
    """Run defaults taken from ASCENT_* environment variables, when set."""
    out = {}
    if os.getenv(ENV_OUTPUT_DIR):
        out["output_dir"] = os.getenv(ENV_OUTPUT_DIR)
    seed = _int_env(ENV_SEED)
    if seed is not None:
        out["seed"] = seed
    threads = _int_env(ENV_THREADS)
    if threads is not None:
        out["threads"] = threads
    return out


@lru_cache(maxsize=1)
def get_output_dir() -> str:
    env_dir = os.getenv(ENV_OUTPUT_DIR)
    if env_dir:
        return env_dir
    value = _load_config_dict().get("defaults", {}).get("output_dir")
    if value:
        return value
    raise RuntimeError("Output directory not found in environment or config.yaml.")


@lru_cache(maxsize=1)
def get_seed() -> int:
    seed = _int_env(ENV_SEED)
    if seed is not None:
        return seed
    value = _load_config_dict().get("defaults", {}).get("seed")
    if value is not None:
        return int(value)
    raise RuntimeError("Seed not found in environment or config.yaml.")


@lru_cache(maxsize=1)
def get_threads() -> int:
    threads = _int_env(ENV_THREADS)
    if threads is not None:
        return threads
    return int(_load_config_dict().get("defaults", {}).get("threads", 0))
