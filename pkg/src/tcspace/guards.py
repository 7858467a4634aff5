"""Size guards, overridable through the environment."""

import os

DEFAULT_GUARD_N = 9
DEFAULT_GUARD_K = 4


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    value = int(raw)
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def guard_n() -> int:
    """Largest N for which compatible trees are enumerated."""
    return _env_int("TCS_GUARD_N", DEFAULT_GUARD_N)


def guard_k() -> int:
    """Largest Laakso level built."""
    return _env_int("TCS_GUARD_K", DEFAULT_GUARD_K)
